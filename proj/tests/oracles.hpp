#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

/**
 * tests/oracles.hpp
 *
 * Independent reference implementations the suite checks the library
 * against. Everything here is written directly from the defining formulas
 * with no code shared with include/metacog, and stays deliberately naive:
 * quadratic rank counting, plain two-pass moments, unshifted softmax.
 */

#include <cctype>
#include <cmath>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "metacog/group_optim.hpp"

namespace oracles {

/// Reward components straight from the definitions:
/// kmr = (k+r)/n, rmr = a*(1-lambda*s), cr = c, total = weighted sum.
struct RewardParts {
  double kmr = 0.0;
  double rmr = 0.0;
  double cr = 0.0;
  double total = 0.0;
};

inline RewardParts reward_parts(int k, int r, double a, int s, int c, int n,
                                double lambda, double w_kmr = 1.0,
                                double w_rmr = 1.0, double w_cr = 1.0) {
  RewardParts p;
  p.kmr = (static_cast<double>(k) + static_cast<double>(r)) /
          static_cast<double>(n);
  p.rmr = a * (1.0 - lambda * static_cast<double>(s));
  p.cr = static_cast<double>(c);
  p.total = w_kmr * p.kmr + w_rmr * p.rmr + w_cr * p.cr;
  return p;
}

/// Standardized advantages with population std, two naive passes.
inline std::vector<double> advantages(const std::vector<double>& rewards,
                                      double delta) {
  double mean = 0.0;
  for (double v : rewards) mean += v;
  mean /= static_cast<double>(rewards.size());
  double var = 0.0;
  for (double v : rewards) var += (v - mean) * (v - mean);
  var /= static_cast<double>(rewards.size());
  double denom = std::sqrt(var) + delta;
  std::vector<double> out;
  out.reserve(rewards.size());
  for (double v : rewards) {
    double num = v - mean;
    out.push_back((num == 0.0 || denom == 0.0) ? 0.0 : num / denom);
  }
  return out;
}

/// Unshifted softmax, straight exp over sum.
inline std::vector<double> softmax(const std::vector<double>& logits) {
  double z = 0.0;
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i]);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

/// Average rank by counting: 1 + #(smaller) + #(equal others)/2.
inline std::vector<double> average_ranks(const std::vector<double>& xs) {
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double smaller = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (xs[j] < xs[i]) smaller += 1.0;
      if (j != i && xs[j] == xs[i]) equal += 1.0;
    }
    ranks[i] = 1.0 + smaller + equal / 2.0;
  }
  return ranks;
}

/// Spearman rho: Pearson correlation of average ranks. Returns false when
/// either rank vector has zero variance (rho undefined).
inline bool spearman(const std::vector<double>& x, const std::vector<double>& y,
                     double& rho_out) {
  auto rx = average_ranks(x);
  auto ry = average_ranks(y);
  double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (double v : rx) mx += v;
  for (double v : ry) my += v;
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return false;
  rho_out = sxy / std::sqrt(sxx * syy);
  return true;
}

/// Lowercased alphanumeric tokens, everything else a separator.
inline std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

/// Set Jaccard over the word sets of two strings.
inline double jaccard(std::string_view a, std::string_view b) {
  auto wa = words(a);
  auto wb = words(b);
  std::set<std::string> sa(wa.begin(), wa.end());
  std::set<std::string> sb(wb.begin(), wb.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& w : sa) inter += sb.count(w);
  std::size_t uni = sa.size() + sb.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Central finite difference of the toy batch objective in every logit.
inline std::vector<std::vector<double>> fd_gradient(
    const metacog::optim::ToyPolicy& policy,
    const std::vector<metacog::optim::ToyGroup>& batch,
    const metacog::optim::ClipConfig& clip, double step) {
  auto grad = policy.logits;
  for (auto& row : grad) {
    for (auto& g : row) g = 0.0;
  }
  for (std::size_t s = 0; s < policy.logits.size(); ++s) {
    for (std::size_t j = 0; j < policy.logits[s].size(); ++j) {
      auto plus = policy;
      auto minus = policy;
      plus.logits[s][j] += step;
      minus.logits[s][j] -= step;
      grad[s][j] = (metacog::optim::toy_objective(plus, batch, clip) -
                    metacog::optim::toy_objective(minus, batch, clip)) /
                   (2.0 * step);
    }
  }
  return grad;
}

/// True when any token's importance ratio sits within `tol` of a clip
/// bound while its advantage is nonzero (a kink of the min in Eq-style
/// clipping; finite differences straddle the non-smooth point there).
inline bool near_clip_kink(const metacog::optim::ToyPolicy& policy,
                           const std::vector<metacog::optim::ToyGroup>& batch,
                           const metacog::optim::ClipConfig& clip, double tol) {
  const double lo = 1.0 - clip.eps_low;
  const double hi = 1.0 + clip.eps_high;
  for (const auto& group : batch) {
    for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
      if (group.advantages[i] == 0.0) continue;
      const auto& tr = group.trajectories[i];
      for (std::size_t t = 0; t < tr.steps.size(); ++t) {
        double lp_new = metacog::optim::log_prob(policy, tr.steps[t].state,
                                                 tr.steps[t].token);
        double rho = std::exp(lp_new - group.old_logprobs[i][t]);
        if (std::abs(rho - lo) < tol || std::abs(rho - hi) < tol) return true;
      }
    }
  }
  return false;
}

}  // namespace oracles
