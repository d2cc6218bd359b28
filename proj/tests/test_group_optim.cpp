// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "metacog/group_optim.hpp"
#include "metacog/rng.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace metacog::optim;
using metacog::errc;

namespace {

ToyPolicy random_policy(metacog::rng::SplitMix64& gen, int states, int vocab,
                        double scale) {
  ToyPolicy p;
  p.vocabulary_size = vocab;
  p.logits.assign(static_cast<std::size_t>(states),
                  std::vector<double>(static_cast<std::size_t>(vocab), 0.0));
  for (auto& row : p.logits) {
    for (auto& v : row) v = scale * gen.gaussian();
  }
  return p;
}

ToyGroup random_group(metacog::rng::SplitMix64& gen, const ToyPolicy& sampler,
                      int rollouts, int max_len) {
  ToyGroup g;
  for (int i = 0; i < rollouts; ++i) {
    ToyTrajectory tr;
    int len = 1 + static_cast<int>(gen.below(static_cast<std::uint64_t>(max_len)));
    for (int t = 0; t < len; ++t) {
      int s = static_cast<int>(gen.below(static_cast<std::uint64_t>(sampler.num_states())));
      int tok = static_cast<int>(gen.below(static_cast<std::uint64_t>(sampler.vocabulary_size)));
      tr.steps.push_back({s, tok});
    }
    g.old_logprobs.push_back(policy_logprobs(sampler, tr));
    g.trajectories.push_back(std::move(tr));
    g.advantages.push_back(gen.gaussian());
  }
  return g;
}

}  // namespace

TEST_CASE("advantages match the naive oracle on random groups") {
  metacog::rng::SplitMix64 gen(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> rewards(8);
    for (auto& r : rewards) r = 3.0 * gen.uniform();
    double delta = (trial % 2 == 0) ? 1e-6 : 0.0;
    auto got = group_advantages(rewards, delta);
    auto want = oracles::advantages(rewards, delta);
    for (std::size_t i = 0; i < rewards.size(); ++i) {
      REQUIRE(got[i] == Catch::Approx(want[i]).margin(1e-12));
    }
  }
}

TEST_CASE("advantage shift invariance is exact") {
  // Dyadic values and a power-of-two group size keep every intermediate
  // exact, so the invariance holds bitwise rather than approximately.
  std::vector<double> rewards{0.5, 1.25, 2.0, 0.75};
  auto base = group_advantages(rewards);
  std::vector<double> shifted;
  for (double r : rewards) shifted.push_back(r + 7.0);
  auto moved = group_advantages(shifted);
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    REQUIRE(moved[i] == base[i]);
  }
}

TEST_CASE("advantage scale invariance is exact when delta is zero") {
  std::vector<double> rewards{0.5, 1.25, 2.0, 0.75};
  auto base = group_advantages(rewards, 0.0);
  std::vector<double> scaled;
  for (double r : rewards) scaled.push_back(4.0 * r);
  auto stretched = group_advantages(scaled, 0.0);
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    REQUIRE(stretched[i] == base[i]);
  }
}

TEST_CASE("zero-variance groups get all-zero advantages") {
  std::vector<double> rewards(8, 3.0);
  for (double a : group_advantages(rewards)) REQUIRE(a == 0.0);
  for (double a : group_advantages(rewards, 0.0)) REQUIRE(a == 0.0);
}

TEST_CASE("advantage input validation") {
  support::require_error([] { group_advantages({1.0}); },
                         errc::group_too_small);
  support::require_error([] { group_advantages({1.0, 2.0}, -1e-9); },
                         errc::invalid_argument);
}

TEST_CASE("importance ratio") {
  REQUIRE(importance_ratio(-1.0, -1.0) == 1.0);
  REQUIRE(importance_ratio(-0.5, -1.0) == Catch::Approx(std::exp(0.5)));
  support::require_error(
      [] {
        importance_ratio(std::numeric_limits<double>::quiet_NaN(), -1.0);
      },
      errc::non_finite_ratio);
  support::require_error([] { importance_ratio(800.0, -800.0); },
                         errc::non_finite_ratio);
}

TEST_CASE("clip bounds bind asymmetrically") {
  // Single token, ratio 2 with positive advantage: the upper clip holds the
  // term at 1 + eps_high. Ratio 0.5 with negative advantage: the lower clip
  // holds it at -(1 - eps_low).
  auto one_token_group = [](double lp_new, double lp_old, double adv) {
    RolloutGroup g;
    RolloutRecord rec;
    rec.token_logprob_new = {lp_new};
    rec.token_logprob_old = {lp_old};
    rec.length = 1;
    g.records.push_back(rec);
    g.advantages = {adv};
    return g;
  };

  double up = dapo_objective(
      {one_token_group(std::log(0.8), std::log(0.4), 1.0)});
  REQUIRE(up == 1.28);

  double down = dapo_objective(
      {one_token_group(std::log(0.4), std::log(0.8), -1.0)});
  REQUIRE(down == -0.8);

  // Inside the trust region the ratio arm is active on both sides.
  double mid = dapo_objective({one_token_group(-1.0, -1.0, 0.5)});
  REQUIRE(mid == 0.5);
}

TEST_CASE("objective averages groups unweighted and normalizes tokens") {
  // Group A: two records, three tokens total, all ratios 1, advantage 1
  // per record: sum = 3, token-normalized = 1.
  RolloutGroup a;
  for (int i = 0; i < 2; ++i) {
    RolloutRecord rec;
    rec.token_logprob_new.assign(i == 0 ? 2 : 1, -0.7);
    rec.token_logprob_old = rec.token_logprob_new;
    rec.length = rec.token_logprob_new.size();
    a.records.push_back(rec);
  }
  a.advantages = {1.0, 1.0};

  // Group B: one record, one token, ratio 1, advantage -2 => -2.
  RolloutGroup b;
  RolloutRecord rec;
  rec.token_logprob_new = {-0.2};
  rec.token_logprob_old = {-0.2};
  rec.length = 1;
  b.records.push_back(rec);
  b.advantages = {-2.0};

  REQUIRE(dapo_objective({a, b}) == Catch::Approx((1.0 - 2.0) / 2.0));
}

TEST_CASE("objective validates its batch") {
  support::require_error([] { dapo_objective({}); }, errc::invalid_argument);

  RolloutGroup g;
  RolloutRecord rec;
  rec.token_logprob_new = {-0.5};
  rec.token_logprob_old = {-0.5, -0.6};
  rec.length = 1;
  g.records.push_back(rec);
  g.advantages = {1.0};
  support::require_error([&] { dapo_objective({g}); }, errc::length_mismatch);

  g.records[0].token_logprob_old = {-0.5};
  g.advantages.clear();
  support::require_error([&] { dapo_objective({g}); },
                         errc::advantages_missing);

  g.advantages = {1.0};
  g.records[0].token_logprob_new = {0.5};  // a log-probability above 0
  support::require_error([&] { dapo_objective({g}); }, errc::invalid_argument);
}

TEST_CASE("softmax and log-prob agree with the naive oracle") {
  metacog::rng::SplitMix64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_policy(gen, 3, 4, 2.0);
    for (int s = 0; s < 3; ++s) {
      auto probs = softmax_row(p, s);
      auto want = oracles::softmax(p.logits[static_cast<std::size_t>(s)]);
      double sum = 0.0;
      for (int j = 0; j < 4; ++j) {
        REQUIRE(probs[static_cast<std::size_t>(j)] ==
                Catch::Approx(want[static_cast<std::size_t>(j)]).margin(1e-12));
        REQUIRE(std::exp(log_prob(p, s, j)) ==
                Catch::Approx(probs[static_cast<std::size_t>(j)]).margin(1e-12));
        sum += probs[static_cast<std::size_t>(j)];
      }
      REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
    }
  }
  support::require_error([&] { log_prob(random_policy(gen, 2, 3, 1.0), 2, 0); },
                         errc::index_out_of_range);
}

TEST_CASE("analytic gradient matches central finite differences") {
  metacog::rng::SplitMix64 gen(2024);
  ClipConfig clip;
  int accepted = 0;
  int attempts = 0;
  while (accepted < 25 && attempts < 400) {
    ++attempts;
    auto policy = random_policy(gen, 3, 4, 1.0);
    auto sampler = random_policy(gen, 3, 4, 1.0);
    std::vector<ToyGroup> batch{random_group(gen, sampler, 4, 5)};
    // The objective is non-differentiable where a ratio meets a clip bound;
    // skip those draws.
    if (oracles::near_clip_kink(policy, batch, clip, 1e-3)) continue;
    ++accepted;

    auto analytic = objective_gradient(policy, batch, clip);
    auto numeric = oracles::fd_gradient(policy, batch, clip, 1e-5);
    for (std::size_t s = 0; s < analytic.size(); ++s) {
      for (std::size_t j = 0; j < analytic[s].size(); ++j) {
        double denom = std::max(1.0, std::abs(numeric[s][j]));
        REQUIRE(std::abs(analytic[s][j] - numeric[s][j]) / denom < 1e-4);
      }
    }
  }
  REQUIRE(accepted == 25);
}

TEST_CASE("clipped tokens contribute zero gradient") {
  // One token far above the upper bound with positive advantage: objective
  // is flat in the logits there.
  ToyPolicy p;
  p.vocabulary_size = 2;
  p.logits = {{2.0, -2.0}};
  ToyGroup g;
  g.trajectories.push_back({{{0, 0}}});
  g.old_logprobs.push_back({std::log(0.01)});  // ratio far above 1.28
  g.advantages = {1.0};
  auto grad = objective_gradient(p, {g});
  REQUIRE(grad[0][0] == 0.0);
  REQUIRE(grad[0][1] == 0.0);
}

TEST_CASE("zero advantage contributes zero gradient") {
  ToyPolicy p;
  p.vocabulary_size = 2;
  p.logits = {{0.3, -0.3}};
  ToyGroup g;
  g.trajectories.push_back({{{0, 1}}});
  g.old_logprobs.push_back({-0.5});
  g.advantages = {0.0};
  auto grad = objective_gradient(p, {g});
  REQUIRE(grad[0][0] == 0.0);
  REQUIRE(grad[0][1] == 0.0);
}
