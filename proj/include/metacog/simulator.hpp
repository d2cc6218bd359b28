#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

/**
 * metacog/simulator.hpp
 *
 * Synthetic rollout generator. Produces well-formed tagged rollouts whose
 * quality is controlled by independent knobs, so the parse-grade-reward
 * pipeline can be exercised end to end without a language model.
 *
 * Each rollout ships with the verdict the reference grader is guaranteed
 * to recover from it. Knowledge counts (k, r) and correctness (c) are
 * measured with the grader's own matcher on the constructed sections, so
 * near-duplicate gold units can never desynchronize the promise; alignment
 * is engineered structurally (unique plan markers echoed in the answer)
 * and the shortcut flag follows from which sections are emitted.
 *
 * Draw order per rollout is fixed (shortcut, correctness, one coverage and
 * one recovery uniform per unit, then noisy-mode draws), so runs with
 * paired seeds stay unit-aligned as knobs move.
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "metacog/dataset.hpp"
#include "metacog/errors.hpp"
#include "metacog/grader.hpp"
#include "metacog/reward.hpp"
#include "metacog/rng.hpp"
#include "metacog/rollout.hpp"
#include "metacog/text.hpp"

namespace metacog::sim {

// ============================================================================
// Types
// ============================================================================

struct SimProfile {
  double coverage_p = 1.0;    // P(gold unit appears in MK)
  double recover_q = 0.0;     // P(missed unit appears in LOOKBACK)
  double fidelity_a = 1.0;    // target plan-execution alignment
  double shortcut_rate = 0.0; // P(answer without visible knowledge work)
  double correct_rate = 1.0;  // P(final answer matches ground truth)
  std::uint64_t seed = 0;
  bool noisy = false;  // paraphrase MK lines by dropping tokens

  void validate() const {
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!in_unit(coverage_p) || !in_unit(recover_q) || !in_unit(fidelity_a) ||
        !in_unit(shortcut_rate) || !in_unit(correct_rate)) {
      throw Error(errc::invalid_config,
                  "simulator probabilities must lie in [0, 1]");
    }
  }
};

struct SimulatedRollout {
  std::string text;
  reward::GraderVerdict intended;
};

/// Plan length used by every simulated rollout; alignment targets land on
/// the grader's anchor grid exactly because hits are out of four.
inline constexpr int kPlanSteps = 4;

// ============================================================================
// Construction details
// ============================================================================

namespace detail {

/// Tokens the plan markers must avoid so only deliberately echoed steps
/// can match the answer.
inline std::set<std::string> forbidden_marker_tokens(
    const dataset::TrainingSample& sample, std::string_view wrong_body) {
  std::set<std::string> out;
  for (const auto& t : text::tokens(sample.ground_truth)) out.insert(t);
  for (const auto& t : text::tokens(wrong_body)) out.insert(t);
  out.insert("applied");
  return out;
}

/// Four deterministic single-token plan markers, pairwise distinct and
/// absent from the avoid set.
inline std::array<std::string, kPlanSteps> plan_markers(
    const std::string& sample_id, const std::set<std::string>& avoid) {
  std::array<std::string, kPlanSteps> out;
  for (int i = 0; i < kPlanSteps; ++i) {
    std::string marker =
        "op" + text::fnv1a_hex(sample_id + "#step" + std::to_string(i))
                   .substr(0, 8);
    auto taken = [&](const std::string& m) {
      if (avoid.count(m)) return true;
      for (int j = 0; j < i; ++j) {
        if (out[j] == m) return true;
      }
      return false;
    };
    while (taken(marker)) marker += 'x';
    out[i] = marker;
  }
  return out;
}

/// Wrong-answer body guaranteed not to satisfy the correctness matcher
/// against this ground truth.
inline std::string wrong_answer_body(const dataset::TrainingSample& sample) {
  auto truth_seq = text::tokens(sample.ground_truth);
  int salt = 0;
  for (;;) {
    std::string body = "inconclusive" +
                       (salt == 0 ? std::string() : std::to_string(salt));
    auto body_seq = text::tokens(body);
    if (body_seq != truth_seq &&
        !text::contains_token_run(body_seq, truth_seq)) {
      return body;
    }
    ++salt;
  }
}

/// Token-dropping paraphrase for noisy mode. Keeps at least one token so
/// the MK bullet never collapses to an empty item.
inline std::string paraphrase(const std::string& source,
                              rng::SplitMix64& gen) {
  std::vector<std::string> kept;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    if (gen.uniform() >= 0.25) kept.push_back(word);
    word.clear();
  };
  for (char c : source) {
    if (text::is_space(c)) {
      flush();
    } else {
      word += c;
    }
  }
  flush();
  if (kept.empty()) {
    kept.push_back(text::tokens(source).empty() ? "gap"
                                                : text::tokens(source)[0]);
  }
  std::string out;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (i) out += ' ';
    out += kept[i];
  }
  return out;
}

}  // namespace detail

// ============================================================================
// Generation
// ============================================================================

/**
 * Generate one rollout for `sample`. Deterministic given prof.seed. The
 * returned verdict is exactly what grade_reference recovers from the text
 * with the same MatchConfig.
 */
inline SimulatedRollout simulate_rollout(const dataset::TrainingSample& sample,
                                         const SimProfile& prof,
                                         const grader::MatchConfig& match = {}) {
  prof.validate();
  if (sample.gold_units.empty()) {
    throw Error(errc::zero_gold_units, "sample has no gold knowledge units");
  }

  rng::SplitMix64 gen(prof.seed);
  const std::size_t n = sample.gold_units.size();

  // Fixed draw order; every unit consumes exactly two uniforms.
  const bool shortcut = gen.bernoulli(prof.shortcut_rate);
  const bool correct = gen.bernoulli(prof.correct_rate);
  std::vector<bool> covered(n), recovered(n);
  for (std::size_t i = 0; i < n; ++i) {
    covered[i] = gen.uniform() < prof.coverage_p;
    recovered[i] = gen.uniform() < prof.recover_q;
  }
  const int hits = static_cast<int>(
      std::lround(prof.fidelity_a * static_cast<double>(kPlanSteps)));

  std::vector<std::string> mk_texts;
  std::vector<std::string> found_texts;
  if (!shortcut) {
    for (std::size_t i = 0; i < n; ++i) {
      if (covered[i]) {
        const std::string& src = sample.gold_units[i].text;
        mk_texts.push_back(prof.noisy ? detail::paraphrase(src, gen)
                                      : text::collapse_ws(src));
      } else if (recovered[i]) {
        found_texts.push_back(text::collapse_ws(sample.gold_units[i].text));
      }
    }
  }

  const std::string wrong_body = detail::wrong_answer_body(sample);
  const auto markers = detail::plan_markers(
      sample.sample_id, detail::forbidden_marker_tokens(sample, wrong_body));

  std::string answer;
  if (hits > 0) {
    answer = "Applied:";
    for (int i = 0; i < hits; ++i) {
      answer += ' ';
      answer += markers[static_cast<std::size_t>(i)];
    }
    answer += '\n';
  }
  answer += correct ? text::collapse_ws(sample.ground_truth) : wrong_body;

  // Assemble the tagged text.
  std::string body;
  if (!mk_texts.empty() || !shortcut) {
    body += "MK:\n";
    for (std::size_t i = 0; i < mk_texts.size(); ++i) {
      body += "- [mk" + std::to_string(i + 1) + "] " + mk_texts[i] + '\n';
    }
  }
  body += "MR:\n";
  for (const auto& m : markers) {
    body += "- [plan] " + m + '\n';
  }
  if (!found_texts.empty()) {
    body += "LOOKBACK:\n";
    body += "- [Seeking] knowledge units missing from the initial survey\n";
    for (const auto& f : found_texts) {
      body += "- [Found] " + f + '\n';
    }
  }

  SimulatedRollout out;
  out.text = "<meta>\n" + body + "</meta>\n<answer>" + answer + "</answer>";

  // Promise exactly what the grader's matcher will see.
  rollout::Rollout mirror;
  for (std::size_t i = 0; i < mk_texts.size(); ++i) {
    mirror.mk.push_back({static_cast<int>(i + 1), mk_texts[i], {}});
  }
  for (const auto& m : markers) mirror.mr.steps.push_back(m);
  if (!found_texts.empty()) {
    rollout::LookbackEvent ev;
    ev.seeking = "knowledge units missing from the initial survey";
    for (std::size_t i = 0; i < found_texts.size(); ++i) {
      if (i) ev.found += '\n';
      ev.found += found_texts[i];
    }
    ev.ordinal = 1;
    mirror.lookbacks.push_back(std::move(ev));
  }
  mirror.answer = answer;

  grader::GraderRequest req;
  req.gold_units = sample.gold_texts();
  req.gold_count = static_cast<int>(n);
  req.ground_truth = sample.ground_truth;
  req.model_output = out.text;
  req.model_final_answer = answer;
  out.intended = grader::grade_reference(req, mirror, match);
  return out;
}

/// G rollouts with per-index derived seeds; embarrassingly parallel and
/// reproducible independent of evaluation order.
inline std::vector<SimulatedRollout> simulate_group(
    const dataset::TrainingSample& sample, const SimProfile& prof, int group,
    const grader::MatchConfig& match = {}) {
  if (group < 1) {
    throw Error(errc::invalid_argument, "group size must be >= 1");
  }
  std::vector<SimulatedRollout> out;
  out.reserve(static_cast<std::size_t>(group));
  for (int i = 0; i < group; ++i) {
    SimProfile p = prof;
    p.seed = rng::derive_seed(prof.seed, static_cast<std::uint64_t>(i));
    out.push_back(simulate_rollout(sample, p, match));
  }
  return out;
}

}  // namespace metacog::sim
