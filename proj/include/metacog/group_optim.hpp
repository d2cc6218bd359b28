#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

/**
 * metacog/group_optim.hpp
 *
 * Group-relative advantage normalization and the clipped token-level policy
 * objective, plus a tabular toy policy with an analytic gradient used to
 * sanity-check the whole chain end to end.
 *
 * Advantages over a group of G rewards:
 *
 *     A_i = (R_i - mean(R)) / (std(R) + delta)        (population std)
 *
 * Objective over a batch of groups, with asymmetric clipping and no KL
 * term; each group is normalized by its total token count and the batch is
 * the unweighted mean over groups:
 *
 *     J = mean_g [ (1 / sum_i |tau_i|) * sum_i sum_t
 *                  min(rho_it * A_i, clip(rho_it, 1-eps_low, 1+eps_high) * A_i) ]
 *
 * where rho_it = exp(logprob_new - logprob_old) per token.
 */

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "metacog/errors.hpp"

namespace metacog::optim {

// ============================================================================
// Types
// ============================================================================

/// Per-rollout data needed by the objective: scalar reward and per-token
/// log-probabilities under the new and old policies.
struct RolloutRecord {
  double reward = 0.0;
  std::vector<double> token_logprob_new;
  std::vector<double> token_logprob_old;
  std::size_t length = 0;
};

struct RolloutGroup {
  std::vector<RolloutRecord> records;
  std::vector<double> advantages;  // one per record; empty until computed
};

struct ClipConfig {
  double eps_low = 0.2;
  double eps_high = 0.28;

  void validate() const {
    if (!(eps_low > 0.0 && eps_low < 1.0)) {
      throw Error(errc::invalid_config, "eps_low must be in (0, 1)");
    }
    if (!(eps_high > 0.0)) {
      throw Error(errc::invalid_config, "eps_high must be positive");
    }
  }
};

/// Tabular softmax policy: one logit row per state over a shared vocabulary.
struct ToyPolicy {
  std::vector<std::vector<double>> logits;  // [state][token]
  int vocabulary_size = 0;

  int num_states() const { return static_cast<int>(logits.size()); }

  void validate() const {
    if (vocabulary_size <= 0) {
      throw Error(errc::invalid_config, "vocabulary_size must be positive");
    }
    for (const auto& row : logits) {
      if (static_cast<int>(row.size()) != vocabulary_size) {
        throw Error(errc::invalid_config,
                    "every logit row must have vocabulary_size entries");
      }
    }
  }
};

struct StateToken {
  int state = 0;
  int token = 0;
};

/// One sampled trajectory through the toy policy.
struct ToyTrajectory {
  std::vector<StateToken> steps;
};

/// A group of toy trajectories with fixed advantages and the log-probs the
/// sampling policy assigned at collection time.
struct ToyGroup {
  std::vector<ToyTrajectory> trajectories;
  std::vector<double> advantages;
  std::vector<std::vector<double>> old_logprobs;  // [trajectory][token]
};

// ============================================================================
// Advantages
// ============================================================================

/**
 * Group-relative advantages with population standard deviation. `delta`
 * stabilizes the division; it may be zero (exact scale invariance) but not
 * negative. Throws GroupTooSmall for fewer than two rewards.
 */
inline std::vector<double> group_advantages(const std::vector<double>& rewards,
                                            double delta = 1e-6) {
  if (rewards.size() < 2) {
    throw Error(errc::group_too_small,
                "advantage normalization needs at least 2 rollouts, got " +
                    std::to_string(rewards.size()));
  }
  if (!(delta >= 0.0)) {
    throw Error(errc::invalid_argument, "delta must be non-negative");
  }
  const double g = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= g;
  double var = 0.0;
  for (double r : rewards) {
    double d = r - mean;
    var += d * d;
  }
  var /= g;
  const double denom = std::sqrt(var) + delta;
  std::vector<double> out(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    double num = rewards[i] - mean;
    out[i] = (num == 0.0 || denom == 0.0) ? 0.0 : num / denom;
  }
  return out;
}

// ============================================================================
// Clipped objective
// ============================================================================

/// Token importance ratio exp(lp_new - lp_old). Throws NonFiniteRatio when
/// either input or the result is not finite (e.g. overflow).
inline double importance_ratio(double logprob_new, double logprob_old) {
  if (!std::isfinite(logprob_new) || !std::isfinite(logprob_old)) {
    throw Error(errc::non_finite_ratio, "log-probs must be finite");
  }
  double rho = std::exp(logprob_new - logprob_old);
  if (!std::isfinite(rho)) {
    throw Error(errc::non_finite_ratio, "importance ratio overflowed");
  }
  return rho;
}

namespace detail {

inline double clamp(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

/// One token's contribution min(rho*A, clip(rho)*A).
inline double clipped_token_term(double rho, double advantage,
                                 const ClipConfig& clip) {
  double unclipped = rho * advantage;
  double clipped =
      clamp(rho, 1.0 - clip.eps_low, 1.0 + clip.eps_high) * advantage;
  return unclipped < clipped ? unclipped : clipped;
}

inline void validate_group(const RolloutGroup& group) {
  if (group.records.empty()) {
    throw Error(errc::invalid_argument, "group has no records");
  }
  if (group.advantages.size() != group.records.size()) {
    throw Error(errc::advantages_missing,
                "group carries " + std::to_string(group.advantages.size()) +
                    " advantages for " + std::to_string(group.records.size()) +
                    " records");
  }
  for (const auto& rec : group.records) {
    if (rec.token_logprob_new.size() != rec.length ||
        rec.token_logprob_old.size() != rec.length) {
      throw Error(errc::length_mismatch,
                  "log-prob lists must have exactly `length` entries");
    }
    if (rec.length == 0) {
      throw Error(errc::length_mismatch, "record has zero tokens");
    }
    for (std::size_t t = 0; t < rec.length; ++t) {
      if (rec.token_logprob_new[t] > 1e-9 || rec.token_logprob_old[t] > 1e-9) {
        throw Error(errc::invalid_argument, "log-probs must be <= 0");
      }
    }
  }
}

}  // namespace detail

/**
 * Batch objective: token-normalized clipped sum per group, unweighted mean
 * across groups. Throws AdvantagesMissing / LengthMismatch on malformed
 * groups and NonFiniteRatio on ratio overflow.
 */
inline double dapo_objective(const std::vector<RolloutGroup>& batch,
                             const ClipConfig& clip = {}) {
  clip.validate();
  if (batch.empty()) {
    throw Error(errc::invalid_argument, "objective over an empty batch");
  }
  double total = 0.0;
  for (const auto& group : batch) {
    detail::validate_group(group);
    std::size_t tokens = 0;
    for (const auto& rec : group.records) tokens += rec.length;
    double sum = 0.0;
    for (std::size_t i = 0; i < group.records.size(); ++i) {
      const auto& rec = group.records[i];
      for (std::size_t t = 0; t < rec.length; ++t) {
        double rho = importance_ratio(rec.token_logprob_new[t],
                                      rec.token_logprob_old[t]);
        sum += detail::clipped_token_term(rho, group.advantages[i], clip);
      }
    }
    total += sum / static_cast<double>(tokens);
  }
  return total / static_cast<double>(batch.size());
}

// ============================================================================
// Toy policy
// ============================================================================

namespace detail {

inline void check_state_token(const ToyPolicy& p, int state, int token) {
  if (state < 0 || state >= p.num_states()) {
    throw Error(errc::index_out_of_range,
                "state " + std::to_string(state) + " outside [0, " +
                    std::to_string(p.num_states()) + ")");
  }
  if (token < 0 || token >= p.vocabulary_size) {
    throw Error(errc::index_out_of_range,
                "token " + std::to_string(token) + " outside [0, " +
                    std::to_string(p.vocabulary_size) + ")");
  }
}

}  // namespace detail

/// Softmax probabilities of one state's logit row.
inline std::vector<double> softmax_row(const ToyPolicy& p, int state) {
  detail::check_state_token(p, state, 0);
  const auto& row = p.logits[static_cast<std::size_t>(state)];
  double mx = row[0];
  for (double v : row) mx = v > mx ? v : mx;
  std::vector<double> out(row.size());
  double z = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    out[j] = std::exp(row[j] - mx);
    z += out[j];
  }
  for (double& v : out) v /= z;
  return out;
}

/// Log-softmax value of one (state, token) entry.
inline double log_prob(const ToyPolicy& p, int state, int token) {
  detail::check_state_token(p, state, token);
  const auto& row = p.logits[static_cast<std::size_t>(state)];
  double mx = row[0];
  for (double v : row) mx = v > mx ? v : mx;
  double z = 0.0;
  for (double v : row) z += std::exp(v - mx);
  return row[static_cast<std::size_t>(token)] - mx - std::log(z);
}

/**
 * Per-token log-probabilities the policy assigns to a trajectory.
 * Throws IndexOutOfRange on out-of-table states or tokens.
 */
inline std::vector<double> policy_logprobs(const ToyPolicy& p,
                                           const ToyTrajectory& trajectory) {
  p.validate();
  std::vector<double> out;
  out.reserve(trajectory.steps.size());
  for (const auto& st : trajectory.steps) {
    out.push_back(log_prob(p, st.state, st.token));
  }
  return out;
}

/**
 * Objective of a toy batch under `policy` as the new policy. Builds the
 * numeric groups (new log-probs from the policy, old log-probs and
 * advantages from the batch) and evaluates dapo_objective, so a finite
 * difference of this function is an independent check of
 * objective_gradient.
 */
inline double toy_objective(const ToyPolicy& policy,
                            const std::vector<ToyGroup>& batch,
                            const ClipConfig& clip = {}) {
  std::vector<RolloutGroup> groups;
  groups.reserve(batch.size());
  for (const auto& toy : batch) {
    if (toy.old_logprobs.size() != toy.trajectories.size()) {
      throw Error(errc::length_mismatch,
                  "old_logprobs must pair with trajectories");
    }
    RolloutGroup g;
    g.advantages = toy.advantages;
    for (std::size_t i = 0; i < toy.trajectories.size(); ++i) {
      RolloutRecord rec;
      rec.token_logprob_new = policy_logprobs(policy, toy.trajectories[i]);
      rec.token_logprob_old = toy.old_logprobs[i];
      rec.length = rec.token_logprob_new.size();
      g.records.push_back(std::move(rec));
    }
    groups.push_back(std::move(g));
  }
  return dapo_objective(groups, clip);
}

/**
 * Analytic gradient of toy_objective with respect to every logit.
 *
 * Per token, the active min-arm decides the local derivative: the ratio arm
 * contributes A * rho through the log-softmax; a token clipped at a bound
 * contributes zero (the bound is constant in the logits). Exact ties at the
 * clip bounds follow the ratio arm.
 */
inline std::vector<std::vector<double>> objective_gradient(
    const ToyPolicy& policy, const std::vector<ToyGroup>& batch,
    const ClipConfig& clip = {}) {
  clip.validate();
  policy.validate();
  if (batch.empty()) {
    throw Error(errc::invalid_argument, "gradient over an empty batch");
  }

  const int S = policy.num_states();
  const int V = policy.vocabulary_size;
  std::vector<std::vector<double>> grad(
      static_cast<std::size_t>(S),
      std::vector<double>(static_cast<std::size_t>(V), 0.0));

  // Accumulated ratio-arm weight per (state, token) and per state.
  std::vector<std::vector<double>> w_tok = grad;
  std::vector<double> w_state(static_cast<std::size_t>(S), 0.0);

  const double lo = 1.0 - clip.eps_low;
  const double hi = 1.0 + clip.eps_high;
  const double inv_groups = 1.0 / static_cast<double>(batch.size());

  for (const auto& toy : batch) {
    if (toy.advantages.size() != toy.trajectories.size() ||
        toy.old_logprobs.size() != toy.trajectories.size()) {
      throw Error(errc::advantages_missing,
                  "toy group needs advantages and old_logprobs per trajectory");
    }
    std::size_t tokens = 0;
    for (const auto& tr : toy.trajectories) tokens += tr.steps.size();
    if (tokens == 0) {
      throw Error(errc::length_mismatch, "toy group has no tokens");
    }
    const double inv_tokens = 1.0 / static_cast<double>(tokens);

    for (std::size_t i = 0; i < toy.trajectories.size(); ++i) {
      const auto& tr = toy.trajectories[i];
      const auto& old_lp = toy.old_logprobs[i];
      if (old_lp.size() != tr.steps.size()) {
        throw Error(errc::length_mismatch,
                    "old log-probs must have one entry per step");
      }
      const double adv = toy.advantages[i];
      for (std::size_t t = 0; t < tr.steps.size(); ++t) {
        const auto& st = tr.steps[t];
        double lp_new = log_prob(policy, st.state, st.token);
        double rho = importance_ratio(lp_new, old_lp[t]);
        bool clipped = (adv > 0.0 && rho > hi) || (adv < 0.0 && rho < lo);
        if (clipped || adv == 0.0) continue;
        double w = inv_groups * inv_tokens * adv * rho;
        w_tok[static_cast<std::size_t>(st.state)]
             [static_cast<std::size_t>(st.token)] += w;
        w_state[static_cast<std::size_t>(st.state)] += w;
      }
    }
  }

  for (int s = 0; s < S; ++s) {
    if (w_state[static_cast<std::size_t>(s)] == 0.0) {
      bool any = false;
      for (int j = 0; j < V; ++j) {
        if (w_tok[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] !=
            0.0) {
          any = true;
          break;
        }
      }
      if (!any) continue;
    }
    std::vector<double> probs = softmax_row(policy, s);
    for (int j = 0; j < V; ++j) {
      grad[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] =
          w_tok[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] -
          w_state[static_cast<std::size_t>(s)] * probs[static_cast<std::size_t>(j)];
    }
  }
  return grad;
}

}  // namespace metacog::optim
