#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

/**
 * metacog/reward.hpp
 *
 * Scalar reward terms computed from a grader verdict:
 *
 *   knowledge   KMR = (k + r) / n
 *   regulation  RMR = a * (1 - lambda * s)
 *   correctness CR  = c
 *   total       R   = w_k * KMR + w_r * RMR + w_c * CR
 *
 * with k recalled units, r units recovered via LOOKBACK, n gold units,
 * a in [0,1] plan alignment, s the shortcut flag, c the correctness flag.
 * Each term lies in [0,1] under unit weights, so R is in [0,3].
 *
 * When no LOOKBACK is used, callers pass r = 0.
 */

#include <cmath>

#include "metacog/errors.hpp"

namespace metacog::reward {

/// Verdict fields as returned by a grader: counts (k, r), alignment a,
/// and binary flags (s, c).
struct GraderVerdict {
  int k = 0;
  int r = 0;
  double a = 0.0;
  int s = 0;
  int c = 0;
};

struct RewardConfig {
  double lambda = 0.3;  // shortcut penalty strength
  double delta = 1e-6;  // advantage-normalization floor (used downstream)
  double weight_kmr = 1.0;
  double weight_rmr = 1.0;
  double weight_cr = 1.0;

  void validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
      throw Error(errc::invalid_config, "lambda must be in [0, 1]");
    }
    if (!(delta >= 0.0)) {
      throw Error(errc::invalid_config, "delta must be non-negative");
    }
    if (weight_kmr < 0.0 || weight_rmr < 0.0 || weight_cr < 0.0) {
      throw Error(errc::invalid_config, "weights must be non-negative");
    }
  }
};

struct RewardBreakdown {
  double kmr = 0.0;
  double rmr = 0.0;
  double cr = 0.0;
  double total = 0.0;
};

/**
 * Knowledge term (k + r) / n.
 * Throws ZeroGoldUnits when n == 0 and InvalidCounts when the counts are
 * negative or k + r exceeds n (out-of-range counts are rejected, not
 * clamped, so a misbehaving grader is surfaced instead of silently scored).
 */
inline double compute_kmr(int k, int r, int n) {
  if (n == 0) {
    throw Error(errc::zero_gold_units, "sample has no gold knowledge units");
  }
  if (n < 0 || k < 0 || r < 0 || k > n || r > n - k) {
    throw Error(errc::invalid_counts,
                "require 0 <= k <= n and 0 <= r <= n - k (k=" +
                    std::to_string(k) + ", r=" + std::to_string(r) +
                    ", n=" + std::to_string(n) + ")");
  }
  return static_cast<double>(k + r) / static_cast<double>(n);
}

/**
 * Regulation term a * (1 - lambda * s).
 * Throws OutOfRangeAlignment when a is outside [0,1] (or non-finite) and
 * InvalidFlag when s is not 0/1.
 */
inline double compute_rmr(double a, int s, const RewardConfig& cfg = {}) {
  cfg.validate();
  if (!std::isfinite(a) || a < 0.0 || a > 1.0) {
    throw Error(errc::out_of_range_alignment, "alignment a must be in [0, 1]");
  }
  if (s != 0 && s != 1) {
    throw Error(errc::invalid_flag, "shortcut flag s must be 0 or 1");
  }
  return a * (1.0 - cfg.lambda * static_cast<double>(s));
}

/// Correctness term: the flag itself. Throws InvalidFlag unless c is 0/1.
inline double compute_cr(int c) {
  if (c != 0 && c != 1) {
    throw Error(errc::invalid_flag, "correctness flag c must be 0 or 1");
  }
  return static_cast<double>(c);
}

/**
 * Full breakdown for one verdict against a sample with n gold units.
 * Propagates the component errors unchanged.
 */
inline RewardBreakdown compute_reward(const GraderVerdict& v, int n,
                                      const RewardConfig& cfg = {}) {
  cfg.validate();
  RewardBreakdown out;
  out.kmr = compute_kmr(v.k, v.r, n);
  out.rmr = compute_rmr(v.a, v.s, cfg);
  out.cr = compute_cr(v.c);
  out.total = cfg.weight_kmr * out.kmr + cfg.weight_rmr * out.rmr +
              cfg.weight_cr * out.cr;
  return out;
}

}  // namespace metacog::reward
