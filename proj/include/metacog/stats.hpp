#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

/**
 * metacog/stats.hpp
 *
 * Rank statistics and summaries for the analysis report: Spearman rank
 * correlation with average-rank tie handling, fixed-range histograms, and
 * means. Degenerate inputs (zero rank variance) yield an empty optional
 * rather than a value, so reports can mark the pair as undefined.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "metacog/errors.hpp"

namespace metacog::stats {

/// 1-based ranks; tied values share the mean of the positions they occupy.
inline std::vector<double> average_ranks(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    // positions i..j (0-based) share rank mean((i+1) + ... + (j+1))
    double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

/**
 * Spearman rank correlation: Pearson correlation of average ranks.
 * Throws LengthMismatch when the series differ in length; returns an empty
 * optional when either series has zero rank variance (including n < 2).
 */
inline std::optional<double> spearman(const std::vector<double>& x,
                                      const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw Error(errc::length_mismatch, "series lengths differ");
  }
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;

  auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  // Rank sums are n(n+1)/2 regardless of ties, so both means equal
  // (n+1)/2; computing them keeps the code honest about intent.
  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(n);
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double a = rx[i] - mx;
    double b = ry[i] - my;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;  // counts.size() bins, [lo, hi]
};

/// Fixed-range histogram; values are clamped into the end bins and the
/// upper boundary lands in the last bin.
inline Histogram histogram(const std::vector<double>& values,
                           std::size_t bins = 10, double lo = 0.0,
                           double hi = 1.0) {
  if (bins == 0 || !(hi > lo)) {
    throw Error(errc::invalid_argument, "need bins >= 1 and hi > lo");
  }
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bins, 0);
  for (double v : values) {
    double t = (v - lo) / (hi - lo) * static_cast<double>(bins);
    auto bin = static_cast<long long>(std::floor(t));
    if (bin < 0) bin = 0;
    if (bin >= static_cast<long long>(bins)) {
      bin = static_cast<long long>(bins) - 1;
    }
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  return h;
}

inline double mean(const std::vector<double>& values) {
  if (values.empty()) {
    throw Error(errc::insufficient_data, "mean of empty series");
  }
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

}  // namespace metacog::stats
