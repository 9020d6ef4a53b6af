// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The SNS-RSMA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "sns/baselines.hpp"
#include "sns/capacity.hpp"
#include "test_util.hpp"

namespace sns {
namespace {

// Closed-form water-filling: try every active-set size, keep the valid one.
double closed_form_wf(std::vector<double> g, double budget) {
  std::sort(g.begin(), g.end(), std::greater<double>());
  for (size_t a = g.size(); a >= 1; --a) {
    double inv = 0.0;
    for (size_t i = 0; i < a; ++i) inv += 1.0 / g[i];
    const double mu = (budget + inv) / static_cast<double>(a);
    if (mu - 1.0 / g[a - 1] < 0.0) continue;
    double r = 0.0;
    for (size_t i = 0; i < a; ++i) r += std::log2(g[i] * mu);
    return r;
  }
  return 0.0;
}

TEST(WaterFilling, MatchesClosedForm) {
  RVector g(4);
  g << 5.0, 0.1, 2.0, 0.01;
  for (double p : {0.01, 0.5, 3.0, 100.0}) {
    const WaterFilling wf = water_filling(g, p);
    EXPECT_NEAR(wf.rate_bits, closed_form_wf({5.0, 0.1, 2.0, 0.01}, p), 1e-12);
    EXPECT_NEAR(wf.powers.sum(), p, 1e-12);
  }
  EXPECT_EQ(water_filling(g, 0.0).rate_bits, 0.0);
  EXPECT_THROW(water_filling(g, -1.0), ValidationError);
}

TEST(BdPa, SingleUserIsWaterFilling) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const ChannelSet ch = test::random_channels({3}, 4, 0.0, s);
    const double pt = 5.0, s2 = 0.3;
    const LinearPrecoderSet set = bd_precoder(ch);
    const ModelSolution sol = baseline_pa(set, ch, Weights::equal(1), pt, s2);
    std::vector<double> g;
    for (Index i = 0; i < set.singular_values[0].size(); ++i) {
      const double sv = set.singular_values[0](i);
      g.push_back(sv * sv / (ch.users[0].path_loss * s2));
    }
    EXPECT_NEAR(sol.objective, closed_form_wf(g, pt), 1e-6);
    EXPECT_NEAR(sol.deployed.wsr, sol.objective, 1e-9);
  }
}

TEST(ZfPa, InterferenceFreeRates) {
  const ChannelSet ch = test::random_channels({1, 1, 1}, 4, 0.0, 8);
  const double pt = 10.0, s2 = 0.05;
  const LinearPrecoderSet set = rzf_directions(ch, 0.0);
  const ModelSolution sol = baseline_pa(set, ch, Weights::equal(3), pt, s2);
  double tr = 0.0;
  for (Index k = 0; k < 3; ++k) {
    const CMatrix& q = sol.transmit.q[static_cast<size_t>(k)];
    tr += q.trace().real();
    for (Index j = 0; j < 3; ++j) {
      if (j == k) continue;
      const double leak = (ch.users[j].h * q * ch.users[j].h.adjoint()).norm();
      EXPECT_LE(leak, 1e-12 * pt);
    }
    const double p = q.trace().real();
    const double g = std::norm((ch.users[k].h * set.directions[k])(0, 0));
    const double snr = p * g / (ch.users[k].path_loss * s2);
    EXPECT_NEAR(sol.deployed.private_rates[static_cast<size_t>(k)], std::log2(1.0 + snr), 1e-9);
  }
  EXPECT_LE(tr, pt * (1.0 + 1e-9));
  EXPECT_NEAR(tr, pt, 1e-6 * pt);
}

TEST(Baselines, VanishingPower) {
  const ChannelSet ch = test::random_channels({2, 1}, 4, 0.0, 9);
  const Weights w = Weights::equal(2);
  const double pt = 1e-12, s2 = 1.0;
  EXPECT_LE(baseline_pa(rzf_directions(ch, 0.0), ch, w, pt, s2).deployed.wsr, 1e-9);
  EXPECT_LE(baseline_pa(rzf_directions(ch, rzf_alpha(ch, s2, pt)), ch, w, pt, s2).deployed.wsr,
            1e-9);
  EXPECT_LE(baseline_pa(bd_precoder(ch), ch, w, pt, s2).deployed.wsr, 1e-9);
  const BdRsmaSolution r = bd_rsma_pa(bd_rsma_structure(ch), ch, w, pt, s2, CsiMode::kPerfect, 1);
  EXPECT_LE(r.feasible.deployed.wsr, 1e-9);
  EXPECT_EQ(baseline_pa(bd_precoder(ch), ch, w, 0.0, s2).deployed.wsr, 0.0);
}

TEST(RzfPa, AscentAndBudget) {
  const ChannelSet ch = test::random_channels({1, 1, 1}, 3, 0.0, 10);
  const double pt = 10.0, s2 = 0.1;
  const LinearPrecoderSet set = rzf_directions(ch, rzf_alpha(ch, s2, pt));
  const ModelSolution sol = baseline_pa(set, ch, Weights::equal(3), pt, s2);
  double prev = sol.state.initial_value;
  for (double v : sol.state.history) {
    EXPECT_GE(v, prev - 1e-7);
    prev = v;
  }
  double tr = 0.0;
  for (const auto& q : sol.transmit.q) tr += q.trace().real();
  EXPECT_LE(tr, pt * (1.0 + 1e-9));
}

TEST(BdRsma, RepairedBelowRelaxedAndRankOne) {
  const ChannelSet ch = test::random_channels({2, 2}, 4, 0.0, 11);
  const Weights w = Weights::equal(2);
  const BdRsmaSolution r =
      bd_rsma_pa(bd_rsma_structure(ch), ch, w, 10.0, 0.1, CsiMode::kPerfect, 1);
  EXPECT_LE(r.feasible.objective, r.relaxed.objective + 1e-6);
  EXPECT_LE(eigen_count_above(PsdMatrix(r.feasible.transmit.q_c), 1e-9), 1);
  // the common message never hurts relative to BD alone
  const ModelSolution bd = baseline_pa(bd_precoder(ch), ch, w, 10.0, 0.1);
  EXPECT_GE(r.relaxed.objective, bd.objective - 1e-6);
}

TEST(UpperBound, ConcavityFlag) {
  EXPECT_TRUE(upper_bound_is_concave(Weights::equal(3)));
  EXPECT_FALSE(upper_bound_is_concave(Weights::from_eta({0.7, 0.3})));
}

TEST(UpperBound, OrderingChain) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const ChannelSet ch = test::random_channels({2, 2, 2}, 6, 0.0, 20 + s);
    const Weights w = Weights::equal(3);
    const double pt = 100.0, s2 = 0.1;
    ScaOptions sca;
    sca.max_outer = 60;
    const UpperBoundSolution ub = bd_mimo_cm_upper_bound(ch, w, pt, s2, CsiMode::kPerfect, sca);
    ASSERT_TRUE(ub.concave);
    EXPECT_GE(ub.value, ub.bd.objective - 1e-3);
    const ModelSolution zf = baseline_pa(rzf_directions(ch, 0.0), ch, w, pt, s2);
    SnsOptions opt;
    opt.sca = sca;
    opt.warm_starts = {ub.solution.transmit, ub.bd.transmit, zf.transmit};
    const SnsResult r = sns_optimize(ch, {0, 1, 2}, w, pt, s2, CsiMode::kPerfect, opt);
    EXPECT_GE(r.relaxed_wsr, ub.value - 1e-3);
    EXPECT_GE(r.relaxed_wsr, zf.objective - 1e-3);
  }
}

TEST(UpperBound, UnequalWeightsFallBack) {
  const ChannelSet ch = test::random_channels({1, 1}, 3, 0.0, 30);
  const UpperBoundSolution ub =
      bd_mimo_cm_upper_bound(ch, Weights::from_eta({0.7, 0.3}), 10.0, 0.1, CsiMode::kPerfect);
  EXPECT_FALSE(ub.concave);
  EXPECT_GE(ub.value, ub.bd.objective - 1e-6);
}

TEST(Baselines, EstimatedCsiDeploysOnTrueChannel) {
  const ChannelSet ch = test::random_channels({1, 1}, 3, 0.05, 31);
  const Weights w = Weights::equal(2);
  const ModelSolution sol =
      baseline_pa(rzf_directions(ch, 0.0, true), ch, w, 10.0, 0.1, CsiMode::kEstimated);
  const RateReport direct =
      full_interference_rates(ch, sol.transmit, 0.1, w, EvalChannel::kTrue);
  EXPECT_NEAR(sol.deployed.wsr, direct.wsr, 1e-12);
  // on the estimated channel ZF is interference free, on the true one it is not
  EXPECT_GT(sol.objective, sol.deployed.wsr - 1e-12);
}

}  // namespace
}  // namespace sns
