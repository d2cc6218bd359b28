#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

/**
 * metacog/toy_env.hpp
 *
 * A tiny differentiable policy-training demo that exercises the whole
 * reward stack. A tabular softmax policy with three states and four tokens
 * emits one token per state; the tokens are compiled into a tagged rollout
 * text, which is parsed and graded like any real rollout:
 *
 *   state 0   how many gold units the MK section lists (token + 1 of 4)
 *   state 1   how many plan steps the answer visibly executes (of 3)
 *   state 2   whether the final answer matches the ground truth (token 2)
 *
 * Training runs the on-policy loop sample -> parse -> reference-grade ->
 * reward -> group advantages -> gradient ascent on the clipped objective.
 * Everything is seeded; identical seeds give bit-identical learning
 * curves. A random-search baseline with the same grading budget provides
 * the honesty check for the learning curve.
 */

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "metacog/dataset.hpp"
#include "metacog/grader.hpp"
#include "metacog/group_optim.hpp"
#include "metacog/reward.hpp"
#include "metacog/rng.hpp"
#include "metacog/rollout.hpp"

namespace metacog::toy {

inline constexpr int kStates = 3;
inline constexpr int kVocab = 4;
inline constexpr int kGoldUnits = 4;
inline constexpr int kPlanLength = 3;
inline constexpr int kCorrectToken = 2;

// ============================================================================
// Environment
// ============================================================================

/// Fixed synthetic task. Gold units, plan markers, and the ground truth
/// use disjoint vocabulary so grading is exact arithmetic in the tokens.
class ToyEnvironment {
 public:
  ToyEnvironment() {
    sample_.sample_id = "toy_0001";
    sample_.ground_truth = "the final verdict is vrd42";
    for (int i = 0; i < kGoldUnits; ++i) {
      std::string tag = std::to_string(i + 1);
      sample_.gold_units.push_back(
          {"KU" + tag,
           "axiom" + tag + "a axiom" + tag + "b axiom" + tag + "c"});
    }
    sample_.gold_count = kGoldUnits;
  }

  const dataset::TrainingSample& sample() const { return sample_; }

  /// Compile a trajectory (one token per state, in state order) into a
  /// tagged rollout text.
  std::string render(const optim::ToyTrajectory& trajectory) const {
    int units = 1, executed = 0, answer_token = 0;
    for (const auto& st : trajectory.steps) {
      if (st.state == 0) units = st.token + 1;
      if (st.state == 1) executed = st.token;
      if (st.state == 2) answer_token = st.token;
    }
    if (units > kGoldUnits) units = kGoldUnits;
    if (executed > kPlanLength) executed = kPlanLength;

    std::string body = "MK:\n";
    for (int i = 0; i < units; ++i) {
      body += "- [mk" + std::to_string(i + 1) + "] " +
              sample_.gold_units[static_cast<std::size_t>(i)].text + '\n';
    }
    body += "MR:\n";
    for (const auto& m : kMarkers) {
      body += "- [plan] " + std::string(m) + '\n';
    }

    std::string answer;
    if (executed > 0) {
      answer = "Applied:";
      for (int i = 0; i < executed; ++i) {
        answer += ' ';
        answer += kMarkers[static_cast<std::size_t>(i)];
      }
      answer += '\n';
    }
    answer += answer_token == kCorrectToken ? sample_.ground_truth
                                            : std::string("inconclusive");
    return "<meta>\n" + body + "</meta>\n<answer>" + answer + "</answer>";
  }

  /// Full scoring path: render, parse, reference-grade, reward.
  reward::RewardBreakdown score(const optim::ToyTrajectory& trajectory,
                                const reward::RewardConfig& cfg = {}) const {
    std::string text = render(trajectory);
    auto report = rollout::parse_rollout(text);
    if (!report.ok()) {
      throw Error(errc::unparseable, "toy rollout failed to parse");
    }
    grader::GraderRequest req;
    req.gold_units = sample_.gold_texts();
    req.gold_count = sample_.gold_count;
    req.ground_truth = sample_.ground_truth;
    req.model_output = text;
    req.model_final_answer = report.rollout->answer;
    auto verdict = grader::grade_reference(req, *report.rollout);
    return reward::compute_reward(verdict, sample_.gold_count, cfg);
  }

 private:
  static constexpr std::array<std::string_view, kPlanLength> kMarkers = {
      "mvxa", "mvxb", "mvxc"};
  dataset::TrainingSample sample_;
};

// ============================================================================
// Sampling
// ============================================================================

/// Sample one token per state from the policy's softmax rows.
inline optim::ToyTrajectory sample_trajectory(
    const optim::ToyPolicy& policy, rng::SplitMix64& gen) {
  optim::ToyTrajectory out;
  for (int s = 0; s < policy.num_states(); ++s) {
    auto probs = optim::softmax_row(policy, s);
    double u = gen.uniform();
    int token = 0;
    double acc = 0.0;
    for (std::size_t j = 0; j < probs.size(); ++j) {
      acc += probs[j];
      if (u < acc) {
        token = static_cast<int>(j);
        break;
      }
      token = static_cast<int>(j);  // u in the top bin's rounding slack
    }
    out.steps.push_back({s, token});
  }
  return out;
}

inline optim::ToyPolicy zero_policy() {
  optim::ToyPolicy p;
  p.vocabulary_size = kVocab;
  p.logits.assign(kStates, std::vector<double>(kVocab, 0.0));
  return p;
}

// ============================================================================
// Training loop
// ============================================================================

struct TrainConfig {
  int steps = 200;
  int group_size = 8;
  double learning_rate = 0.8;
  int eval_rollouts = 64;
  std::uint64_t seed = 0;
  reward::RewardConfig reward;
  optim::ClipConfig clip;

  void validate() const {
    if (steps < 0) throw Error(errc::invalid_config, "steps must be >= 0");
    if (group_size < 2) {
      throw Error(errc::invalid_config, "group_size must be >= 2");
    }
    if (!(learning_rate > 0.0)) {
      throw Error(errc::invalid_config, "learning_rate must be positive");
    }
    if (eval_rollouts < 1) {
      throw Error(errc::invalid_config, "eval_rollouts must be >= 1");
    }
    reward.validate();
    clip.validate();
  }
};

struct StepMetrics {
  int step = 0;  // 0 marks the pre-training evaluation
  double mean_reward = 0.0;
  double mean_kmr = 0.0;
  double mean_rmr = 0.0;
  double mean_cr = 0.0;
  double objective = 0.0;  // batch objective at the pre-update policy
};

struct TrainReport {
  StepMetrics initial;             // evaluation before any update
  std::vector<StepMetrics> steps;  // per-step training batch statistics
  StepMetrics final;               // evaluation after the last update
  optim::ToyPolicy policy;
};

namespace detail {

inline StepMetrics evaluate_policy(const ToyEnvironment& env,
                                   const optim::ToyPolicy& policy,
                                   const reward::RewardConfig& cfg,
                                   int rollouts, std::uint64_t seed) {
  rng::SplitMix64 gen(seed);
  StepMetrics m;
  for (int i = 0; i < rollouts; ++i) {
    auto b = env.score(sample_trajectory(policy, gen), cfg);
    m.mean_reward += b.total;
    m.mean_kmr += b.kmr;
    m.mean_rmr += b.rmr;
    m.mean_cr += b.cr;
  }
  double inv = 1.0 / static_cast<double>(rollouts);
  m.mean_reward *= inv;
  m.mean_kmr *= inv;
  m.mean_rmr *= inv;
  m.mean_cr *= inv;
  return m;
}

}  // namespace detail

/**
 * On-policy training: each step samples a fresh group from the current
 * policy (so every importance ratio starts at 1), grades it through the
 * full pipeline, and ascends the analytic gradient of the clipped
 * objective. Deterministic given cfg.seed.
 */
inline TrainReport train_toy(const TrainConfig& cfg) {
  cfg.validate();
  ToyEnvironment env;
  TrainReport report;
  report.policy = zero_policy();

  const std::uint64_t eval_seed = rng::derive_seed(cfg.seed, 0xE7A1);
  report.initial = detail::evaluate_policy(env, report.policy, cfg.reward,
                                           cfg.eval_rollouts, eval_seed);

  for (int step = 1; step <= cfg.steps; ++step) {
    rng::SplitMix64 gen(
        rng::derive_seed(cfg.seed, static_cast<std::uint64_t>(step)));

    optim::ToyGroup group;
    std::vector<double> rewards;
    StepMetrics m;
    m.step = step;
    for (int g = 0; g < cfg.group_size; ++g) {
      auto trajectory = sample_trajectory(report.policy, gen);
      auto b = env.score(trajectory, cfg.reward);
      rewards.push_back(b.total);
      m.mean_reward += b.total;
      m.mean_kmr += b.kmr;
      m.mean_rmr += b.rmr;
      m.mean_cr += b.cr;
      group.old_logprobs.push_back(
          optim::policy_logprobs(report.policy, trajectory));
      group.trajectories.push_back(std::move(trajectory));
    }
    double inv = 1.0 / static_cast<double>(cfg.group_size);
    m.mean_reward *= inv;
    m.mean_kmr *= inv;
    m.mean_rmr *= inv;
    m.mean_cr *= inv;

    group.advantages = optim::group_advantages(rewards, cfg.reward.delta);

    std::vector<optim::ToyGroup> batch;
    batch.push_back(std::move(group));
    m.objective = optim::toy_objective(report.policy, batch, cfg.clip);
    auto grad = optim::objective_gradient(report.policy, batch, cfg.clip);
    for (int s = 0; s < kStates; ++s) {
      for (int j = 0; j < kVocab; ++j) {
        report.policy.logits[static_cast<std::size_t>(s)]
                           [static_cast<std::size_t>(j)] +=
            cfg.learning_rate *
            grad[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)];
      }
    }
    report.steps.push_back(m);
  }

  report.final = detail::evaluate_policy(env, report.policy, cfg.reward,
                                         cfg.eval_rollouts, eval_seed);
  report.final.step = cfg.steps;
  return report;
}

// ============================================================================
// Random-search baseline
// ============================================================================

struct BaselineReport {
  double best_mean_reward = 0.0;
  optim::ToyPolicy best_policy;
  int policies_tried = 0;
  int rollouts_per_policy = 0;
};

/**
 * Oracle baseline for the learning curve: draw `policies` random policies
 * (unit-gaussian logits), estimate each by `rollouts_per_policy` graded
 * rollouts, keep the best estimate. Consumes the same grading budget as a
 * training run with steps = policies and group_size = rollouts_per_policy.
 */
inline BaselineReport random_search_baseline(int policies,
                                             int rollouts_per_policy,
                                             std::uint64_t seed,
                                             const reward::RewardConfig& cfg = {}) {
  if (policies < 1 || rollouts_per_policy < 1) {
    throw Error(errc::invalid_config, "baseline needs positive budgets");
  }
  ToyEnvironment env;
  BaselineReport report;
  report.policies_tried = policies;
  report.rollouts_per_policy = rollouts_per_policy;
  report.best_mean_reward = -1.0;

  for (int p = 0; p < policies; ++p) {
    rng::SplitMix64 gen(
        rng::derive_seed(seed ^ 0xBA5E11FFULL, static_cast<std::uint64_t>(p)));
    auto policy = zero_policy();
    for (auto& row : policy.logits) {
      for (auto& logit : row) logit = gen.gaussian();
    }
    double mean = 0.0;
    for (int i = 0; i < rollouts_per_policy; ++i) {
      mean += env.score(sample_trajectory(policy, gen), cfg).total;
    }
    mean /= static_cast<double>(rollouts_per_policy);
    if (mean > report.best_mean_reward) {
      report.best_mean_reward = mean;
      report.best_policy = policy;
    }
  }
  return report;
}

}  // namespace metacog::toy
