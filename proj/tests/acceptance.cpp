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

// Acceptance suite: prints one PASS/FAIL line per criterion with the measured
// quantities, exits nonzero if any criterion fails. Tolerances are fixed here.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sns/harness.hpp"
#include "test_util.hpp"

namespace sns {
namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

// ---------------------------------------------------------------------------

Verdict null_space_correctness() {
  constexpr int kDraws = 500;
  constexpr double kOrthoTol = 1e-10, kResidualTol = 1e-9, kAngleTol = 1e-8;
  std::mt19937_64 rng(101);
  double worst_ortho = 0.0, worst_res = 0.0, worst_angle = 0.0;
  for (int d = 0; d < kDraws; ++d) {
    std::uniform_int_distribution<int> kd(1, 4);
    const Index n = std::uniform_int_distribution<int>(2, 8)(rng);
    Index k = kd(rng);
    std::vector<Index> m;
    Index left = n;
    for (Index i = 0; i < k && left > 0; ++i) {
      const Index mk = std::uniform_int_distribution<Index>(1, std::max<Index>(1, std::min<Index>(3, left)))(rng);
      m.push_back(mk);
      left -= mk;
    }
    const ChannelSet ch = test::random_channels(m, n, 0.0, rng());
    std::vector<int> order = identity_order(ch.num_users());
    std::shuffle(order.begin(), order.end(), rng);
    const SnsBasis b = build_sns_basis(ch, order, false);
    for (Index u = 0; u < ch.num_users(); ++u) {
      const CMatrix& psi = b.psi[static_cast<size_t>(u)];
      const CMatrix& f = b.f[static_cast<size_t>(u)];
      worst_ortho = std::max(worst_ortho, (psi.adjoint() * psi - identity(psi.cols())).norm());
      worst_res = std::max(worst_res, f.rows() ? (f * psi).norm() : 0.0);
      const CMatrix ref = test::svd_null_space(f);
      // sine of the largest principal angle
      const CMatrix resid = psi - ref * (ref.adjoint() * psi);
      Eigen::JacobiSVD<CMatrix> svd(resid);
      const double s = resid.size() ? svd.singularValues()(0) : 0.0;
      worst_angle = std::max(worst_angle, std::asin(std::min(1.0, s)));
    }
  }
  Verdict v;
  v.pass = worst_ortho <= kOrthoTol && worst_res <= kResidualTol && worst_angle <= kAngleTol;
  char buf[256];
  std::snprintf(buf, sizeof buf, "ortho %.2e, |F Psi| %.2e, angle %.2e rad over %d draws", worst_ortho,
                worst_res, worst_angle, kDraws);
  v.detail = buf;
  return v;
}

// ---------------------------------------------------------------------------

Verdict rate_oracle() {
  constexpr int kInstances = 200;
  constexpr double kRelTol = 1e-10;
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int t = 0; t < kInstances; ++t) {
    const Index k = std::uniform_int_distribution<int>(1, 3)(rng);
    std::vector<Index> m;
    for (Index i = 0; i < k; ++i) m.push_back(std::uniform_int_distribution<int>(1, 2)(rng));
    Index tot = 0;
    for (Index x : m) tot += x;
    const Index n = tot + std::uniform_int_distribution<int>(0, 2)(rng);
    const ChannelSet ch = test::random_channels(m, n, 0.05, rng());
    const double s2 = 0.05 + 0.5 * std::uniform_real_distribution<double>(0, 1)(rng);
    std::vector<int> order = identity_order(k);
    std::shuffle(order.begin(), order.end(), rng);
    const Weights w = Weights::equal(k);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
    for (bool est : {false, true}) {
      const SnsBasis b = build_sns_basis(ch, order, est);
      CovariancePack p;
      p.q_c = PsdMatrix(test::random_psd(n, n, 2.0, rng));
      for (Index u = 0; u < k; ++u) p.x.emplace_back(test::random_psd(b.dim(u), b.dim(u), 3.0, rng));
      std::vector<CMatrix> q;
      for (Index u = 0; u < k; ++u) {
        const CMatrix& psi = b.psi[static_cast<size_t>(u)];
        q.push_back(psi * p.x[static_cast<size_t>(u)].matrix() * psi.adjoint());
      }
      if (!est) {
        for (Index u = 0; u < k; ++u) {
          const auto& us = ch.users[static_cast<size_t>(u)];
          CMatrix before = CMatrix::Zero(n, n);
          for (Index j = 0; j < k; ++j) {
            if (b.precedes(j, u)) before += q[static_cast<size_t>(j)];
          }
          const double rp = test::naive_rate(us.h, us.path_loss, s2, q[static_cast<size_t>(u)], before);
          const double rc = test::naive_rate(us.h, us.path_loss, s2, p.q_c.matrix(),
                                             before + q[static_cast<size_t>(u)]);
          worst = std::max(worst, rel(private_rate(ch, b, p, u, s2), rp));
          worst = std::max(worst, rel(common_rate_per_user(ch, b, p, u, s2), rc));
        }
      } else {
        const RateReport r = imperfect_rates(ch, b, p, s2, w, EvalChannel::kTrue);
        CMatrix all = CMatrix::Zero(n, n);
        for (const auto& x : q) all += x;
        for (Index u = 0; u < k; ++u) {
          const auto& us = ch.users[static_cast<size_t>(u)];
          const CMatrix& qu = q[static_cast<size_t>(u)];
          worst = std::max(worst, rel(r.private_rates[static_cast<size_t>(u)],
                                      test::naive_rate(us.h, us.path_loss, s2, qu, all - qu)));
          worst = std::max(worst, rel(r.common_rates[static_cast<size_t>(u)],
                                      test::naive_rate(us.h, us.path_loss, s2, p.q_c.matrix(), all)));
        }
      }
    }
  }
  Verdict v;
  v.pass = worst <= kRelTol;
  char buf[128];
  std::snprintf(buf, sizeof buf, "max relative error %.2e over %d instances (perfect and imperfect)",
                worst, kInstances);
  v.detail = buf;
  return v;
}

// ---------------------------------------------------------------------------

Blocks random_blocks(const RateModel& m, std::mt19937_64& rng) {
  Blocks y;
  const double share = m.budget / static_cast<double>(m.vars.size());
  for (const auto& v : m.vars) y.push_back(test::random_psd(v.dim, v.dim, share, rng));
  return y;
}

Verdict surrogate_tangency() {
  constexpr int kInstances = 100;
  constexpr double kTangencyTol = 1e-9, kGradTol = 1e-4;
  std::mt19937_64 rng(303);
  double worst_tan = 0.0, worst_grad = 0.0;
  int not_converging = 0;
  for (int t = 0; t < kInstances; ++t) {
    const ChannelSet ch = test::random_channels({2, 1, 2}, 6, 0.0, 4000 + t);
    const SnsBasis b = build_sns_basis(ch, identity_order(3), false);
    const RateModel m = sns_model(ch, b, Weights::equal(3), 10.0, 0.1, CsiMode::kPerfect);
    const Blocks y0 = random_blocks(m, rng);
    const Blocks dir = random_blocks(m, rng);
    for (Index k = 0; k < 3; ++k) {
      for (const RateSpec* spec : {&m.priv[static_cast<size_t>(k)], &m.common[static_cast<size_t>(k)]}) {
        const ConcaveExpr e = detail::rate_surrogate(m, k, *spec, y0);
        const double exact = rate_nats(m, k, *spec, y0);
        worst_tan = std::max(worst_tan, std::abs(detail::eval_expr(e, y0, 1.0, nullptr) - exact));
        Blocks g = m.zeros();
        detail::eval_expr(e, y0, 1.0, &g);
        const double analytic = inner_product(g, dir);
        double prev = std::numeric_limits<double>::infinity();
        for (double h : {1e-5, 1e-6, 1e-7}) {
          const double fd = (rate_nats(m, k, *spec, detail::axpy(y0, h, dir)) - exact) / h;
          const double err = std::abs(fd - analytic) / std::max(1.0, std::abs(analytic));
          worst_grad = std::max(worst_grad, err);
          // forward differences: the error should shrink with h until rounding dominates
          if (h > 1e-7 && err > prev && err > 1e-7) ++not_converging;
          prev = err;
        }
      }
    }
  }
  Verdict v;
  v.pass = worst_tan <= kTangencyTol && worst_grad <= kGradTol && not_converging == 0;
  char buf[200];
  std::snprintf(buf, sizeof buf, "tangency %.2e, gradient rel %.2e, non-decreasing h-steps %d", worst_tan,
                worst_grad, not_converging);
  v.detail = buf;
  return v;
}

// ---------------------------------------------------------------------------

ExperimentConfig preset(const std::string& name) {
  return load_config(std::string(SNS_CONFIG_DIR) + "/" + name + ".json");
}

Verdict sca_behavior() {
  constexpr int kMaxIter = 50, kNeeded = 9;
  constexpr double kMedianLo = 10, kMedianHi = 50;
  const ExperimentResult r = run_convergence(preset("fig4_convergence"));
  const ResultTable& s = r.table("convergence_summary");
  std::vector<double> iters;
  int within = 0, monotone = 0, converged = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    const double it = cell_double(s.at(i, "iterations"));
    iters.push_back(it);
    if (it <= kMaxIter && cell_double(s.at(i, "converged")) == 1.0) ++within;
    if (cell_double(s.at(i, "monotone")) == 1.0) ++monotone;
    if (cell_double(s.at(i, "converged")) == 1.0) ++converged;
  }
  std::sort(iters.begin(), iters.end());
  const double median = 0.5 * (iters[4] + iters[5]);
  Verdict v;
  v.pass = within >= kNeeded && monotone == 10 && median >= kMedianLo && median <= kMedianHi;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%d/10 within %d iterations, median %.1f, range [%.0f, %.0f], monotone %d/10, converged %d/10",
                within, kMaxIter, median, iters.front(), iters.back(), monotone, converged);
  v.detail = buf;
  return v;
}

// ---------------------------------------------------------------------------

struct RankCase {
  SnsResult result;
  std::vector<Index> antennas;
};

std::vector<Index> antenna_counts(const ChannelSet& ch) {
  std::vector<Index> m;
  for (const auto& u : ch.users) m.push_back(u.antennas());
  return m;
}

Verdict upper_bound_ordering(std::vector<RankCase>* relaxed_runs) {
  constexpr int kDraws = 20;
  constexpr double kTol = 1e-3;
  const double pt = dbm_to_mw(20.0), s2 = dbm_to_mw(-35.0);
  const Weights w = Weights::equal(2);
  int violations = 0;
  double min_sns_ub = 1e9, min_ub_bd = 1e9, min_sns_zf = 1e9;
  for (int d = 0; d < kDraws; ++d) {
    const ChannelSet ch =
        draw_iid_gaussian({{50, 0, 2}, {50, 0, 2}}, 4, {0.0, 0.0}, trial_seed(505, static_cast<std::uint64_t>(d)));
    ScaOptions sca;
    const UpperBoundSolution ub = bd_mimo_cm_upper_bound(ch, w, pt, s2, CsiMode::kPerfect, sca);
    const ModelSolution zf = baseline_pa(rzf_directions(ch, 0.0), ch, w, pt, s2);
    SnsOptions opt;
    opt.warm_starts = {ub.solution.transmit, ub.bd.transmit, zf.transmit};
    for (const std::vector<int>& order : {std::vector<int>{0, 1}, std::vector<int>{1, 0}}) {
      SnsResult r = sns_optimize(ch, order, w, pt, s2, CsiMode::kPerfect, opt);
      min_sns_ub = std::min(min_sns_ub, r.relaxed_wsr - ub.value);
      min_sns_zf = std::min(min_sns_zf, r.relaxed_wsr - zf.objective);
      if (r.relaxed_wsr < ub.value - kTol || r.relaxed_wsr < zf.objective - kTol) ++violations;
      if (relaxed_runs) relaxed_runs->push_back({std::move(r), antenna_counts(ch)});
    }
    min_ub_bd = std::min(min_ub_bd, ub.value - ub.bd.objective);
    if (ub.value < ub.bd.objective - kTol) ++violations;
  }
  Verdict v;
  v.pass = violations == 0;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "%d violations; min margins SNS-UB %.2e, UB-BD %.2e, SNS-ZF %.2e bits (both orders)",
                violations, min_sns_ub, min_ub_bd, min_sns_zf);
  v.detail = buf;
  return v;
}

// ---------------------------------------------------------------------------

Verdict rank_repair(const std::vector<RankCase>& runs) {
  constexpr double kRankTol = 1e-9, kValueTol = 1e-6;
  int bad_rank = 0, bad_value = 0, checked = 0;
  std::vector<RankCase> cases = runs;
  // three-user instances with unequal antenna counts
  for (int d = 0; d < 6; ++d) {
    const ChannelSet ch = draw_iid_gaussian({{50, 0, 1}, {50, 0, 2}, {50, 0, 2}}, 6, {0, 0, 0},
                                            trial_seed(606, static_cast<std::uint64_t>(d)));
    cases.push_back({sns_optimize(ch, {0, 1, 2}, Weights::equal(3), dbm_to_mw(20), dbm_to_mw(-35),
                                  CsiMode::kPerfect),
                     antenna_counts(ch)});
  }
  for (const auto& c : cases) {
    ++checked;
    const CovariancePack& p = c.result.feasible.pack;
    const Index m_min = *std::min_element(c.antennas.begin(), c.antennas.end());
    // relative threshold: eigenvalues below kRankTol times the largest are zero
    auto rank = [&](const PsdMatrix& x) {
      const double top = x.matrix().norm();
      return top > 0.0 ? eigen_count_above(x, kRankTol * top) : Index{0};
    };
    if (rank(p.q_c) > m_min) ++bad_rank;
    for (size_t k = 0; k < p.x.size(); ++k) {
      if (rank(p.x[k]) > c.antennas[k]) ++bad_rank;
    }
    if (c.result.feasible.wsr > c.result.relaxed.wsr + kValueTol) ++bad_value;
  }
  Verdict v;
  v.pass = bad_rank == 0 && bad_value == 0;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d instances: rank violations %d, reduced > relaxed %d", checked,
                bad_rank, bad_value);
  v.detail = buf;
  return v;
}

// ---------------------------------------------------------------------------

Verdict sensitivity_bounds() {
  const ExperimentConfig c = preset("fig2_sensitivity");
  std::vector<SensitivityAggregate> ag;
  run_sensitivity_experiment(c, {}, &ag);
  int up_viol = 0, down_viol = 0, small = 0, excluded = 0;
  std::vector<double> mean_up2;
  for (const auto& a : ag) {
    up_viol += a.up_violations;
    down_viol += a.down_violations;
    small += a.small_c;
    excluded += a.up_mc.n - a.small_c;
    if (a.user == 1) mean_up2.push_back(a.up_mc.mean);
  }
  bool mono = true;
  for (size_t i = 1; i < mean_up2.size(); ++i) mono = mono && mean_up2[i] >= mean_up2[i - 1];
  Verdict v;
  v.pass = up_viol == 0 && down_viol == 0 && mono;
  std::ostringstream os;
  os << "up-bound violations " << up_viol << ", down-bound violations " << down_viol << " on " << small
     << " user-draws with ||C|| <= 0.5 (" << excluded << " excluded); mean |Xi_up_2|:";
  for (double x : mean_up2) {
    char b[32];
    std::snprintf(b, sizeof b, " %.3e", x);
    os << b;
  }
  v.detail = os.str();
  return v;
}

// ---------------------------------------------------------------------------

Verdict zero_error_reduction() {
  constexpr int kInstances = 50;
  constexpr double kTol = 1e-10;
  double worst_eval = 0.0, worst_pipeline = 0.0;
  std::mt19937_64 rng(808);
  for (int t = 0; t < kInstances; ++t) {
    const ChannelSet ch = test::random_channels({2, 1, 2}, 6, 0.0, 8000 + t);
    const Weights w = Weights::equal(3);
    const double pt = 10.0, s2 = 0.1;
    const SnsBasis bp = build_sns_basis(ch, {0, 1, 2}, false);
    const SnsBasis be = build_sns_basis(ch, {0, 1, 2}, true);
    CovariancePack p;
    p.q_c = PsdMatrix(test::random_psd(6, 6, 2.0, rng));
    for (Index u = 0; u < 3; ++u) p.x.emplace_back(test::random_psd(bp.dim(u), bp.dim(u), 2.0, rng));
    const double a = perfect_rates(ch, bp, p, s2, w).wsr;
    const double b = imperfect_rates(ch, be, p, s2, w, EvalChannel::kTrue).wsr;
    worst_eval = std::max(worst_eval, std::abs(a - b));
    if (t < 10) {
      const SnsResult rp = sns_optimize(ch, {0, 1, 2}, w, pt, s2, CsiMode::kPerfect);
      const SnsResult re = sns_optimize(ch, {0, 1, 2}, w, pt, s2, CsiMode::kEstimated);
      worst_pipeline = std::max(worst_pipeline, std::abs(rp.deployed.wsr - re.deployed.wsr));
    }
  }
  Verdict v;
  v.pass = worst_eval <= kTol && worst_pipeline <= kTol;
  char buf[200];
  std::snprintf(buf, sizeof buf, "rate evaluation %.2e over %d instances, optimized pipeline %.2e over 10",
                worst_eval, kInstances, worst_pipeline);
  v.detail = buf;
  return v;
}

// ---------------------------------------------------------------------------

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

Verdict baseline_sanity() {
  double zf_leak = 0.0, bd_leak = 0.0, wf_err = 0.0, rzf_gap = 0.0;
  for (int t = 0; t < 20; ++t) {
    const ChannelSet ch = test::random_channels({1, 2, 1}, 5, 0.0, 9000 + t);
    const Weights w = Weights::equal(3);
    const double pt = 50.0, s2 = 0.1;
    const ModelSolution zf = baseline_pa(rzf_directions(ch, 0.0), ch, w, pt, s2);
    for (Index k = 0; k < 3; ++k) {
      for (Index j = 0; j < 3; ++j) {
        if (j == k) continue;
        const CMatrix& h = ch.users[static_cast<size_t>(j)].h;
        zf_leak = std::max(zf_leak, (h * zf.transmit.q[static_cast<size_t>(k)] * h.adjoint()).norm() / pt);
      }
    }
    const LinearPrecoderSet bd = bd_precoder(ch);
    for (Index k = 0; k < 3; ++k) {
      for (Index j = 0; j < 3; ++j) {
        if (j == k) continue;
        const CMatrix& h = ch.users[static_cast<size_t>(j)].h;
        bd_leak = std::max(bd_leak, (h * bd.directions[static_cast<size_t>(k)]).norm() / h.norm());
      }
    }
    const LinearPrecoderSet z = rzf_directions(ch, 0.0);
    const LinearPrecoderSet r = rzf_directions(ch, 1e-10);
    for (size_t k = 0; k < 3; ++k) rzf_gap = std::max(rzf_gap, (z.directions[k] - r.directions[k]).norm());
    const ChannelSet one = test::random_channels({3}, 4, 0.0, 9100 + t);
    const LinearPrecoderSet set = bd_precoder(one);
    const ModelSolution sol = baseline_pa(set, one, Weights::equal(1), pt, s2);
    std::vector<double> g;
    for (Index i = 0; i < set.singular_values[0].size(); ++i) {
      const double sv = set.singular_values[0](i);
      g.push_back(sv * sv / (one.users[0].path_loss * s2));
    }
    wf_err = std::max(wf_err, std::abs(sol.objective - closed_form_wf(g, pt)));
  }
  Verdict v;
  v.pass = zf_leak <= 1e-12 && bd_leak <= 1e-9 && wf_err <= 1e-6 && rzf_gap <= 1e-6;
  char buf[200];
  std::snprintf(buf, sizeof buf, "ZF leak %.2e P_T, BD leak %.2e, water-filling %.2e bits, RZF->ZF %.2e",
                zf_leak, bd_leak, wf_err, rzf_gap);
  v.detail = buf;
  return v;
}

// ---------------------------------------------------------------------------

Verdict wsr_ordering() {
  ExperimentConfig c = preset("fig7_wsr");
  c.p_tx_dbm = {20};
  c.schemes = {SchemeId::kSns, SchemeId::kSnsFixedPerm, SchemeId::kZf, SchemeId::kRzf, SchemeId::kBd,
               SchemeId::kBdRsmaMimo};
  const ExperimentResult r = run_wsr_sweep(c);
  const ResultTable& s = r.table("wsr_sweep_summary");
  std::map<std::string, double> mean;
  for (size_t i = 0; i < s.size(); ++i) mean[std::get<std::string>(s.at(i, "scheme"))] = cell_double(s.at(i, "mean_wsr"));
  const double sns = mean["SNS"], fixed = mean["SNS_FIXED_PERM"];
  Verdict v;
  v.pass = sns >= mean["BD_RSMA_MIMO"] && mean["BD_RSMA_MIMO"] >= mean["BD"] && sns >= mean["ZF"] &&
           sns >= mean["RZF"] && fixed >= 0.95 * sns && r.failures == 0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "mean WSR: SNS %.3f, F-PERM %.3f, BD_RSMA_MIMO %.3f, BD %.3f, ZF %.3f, RZF %.3f; failures %d",
                sns, fixed, mean["BD_RSMA_MIMO"], mean["BD"], mean["ZF"], mean["RZF"], r.failures);
  v.detail = buf;
  return v;
}

// ---------------------------------------------------------------------------

Verdict beam_nulls() {
  ExperimentConfig c = preset("fig5_6_beampattern");
  c.trials = 3;
  const ExperimentResult r = run_beampattern(c);
  const ResultTable& s = r.table("beampattern_summary");
  double bd_worst = 0.0, sns_earlier = 0.0, sns_later = 0.0, parseval = 0.0;
  std::map<std::pair<std::int64_t, std::string>, double> total;
  for (size_t i = 0; i < s.size(); ++i) {
    const std::string sch = std::get<std::string>(s.at(i, "scheme"));
    const double rel = cell_double(s.at(i, "relative"));
    const double sp = cell_double(s.at(i, "stream_power"));
    if (sp > 0.0) parseval = std::max(parseval, std::abs(cell_double(s.at(i, "integrated_power")) - sp) / sp);
    if (sch == "BD") {
      bd_worst = std::max(bd_worst, rel);
      continue;
    }
    // victim's position in the order versus the stream's position
    const std::int64_t trial = std::get<std::int64_t>(s.at(i, "trial"));
    const std::int64_t victim = std::get<std::int64_t>(s.at(i, "victim"));
    std::int64_t victim_pos = 0;
    for (size_t j = 0; j < s.size(); ++j) {
      if (std::get<std::string>(s.at(j, "scheme")) == sch && std::get<std::int64_t>(s.at(j, "trial")) == trial &&
          std::get<std::int64_t>(s.at(j, "stream")) == victim) {
        victim_pos = std::get<std::int64_t>(s.at(j, "order_position"));
        break;
      }
    }
    if (victim_pos < std::get<std::int64_t>(s.at(i, "order_position"))) {
      sns_earlier = std::max(sns_earlier, rel);
    } else {
      sns_later = std::max(sns_later, rel);
    }
  }
  Verdict v;
  v.pass = bd_worst <= 1e-9 && sns_earlier <= 1e-9 && parseval <= 0.02 && r.failures == 0;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "BD max relative power at other users %.2e; SNS toward earlier users %.2e, toward later users %.2e (permitted); power integral error %.2e",
                bd_worst, sns_earlier, sns_later, parseval);
  v.detail = buf;
  return v;
}

// ---------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Verdict determinism() {
  ExperimentConfig c;
  c.scenario = "acceptance_determinism";
  c.num_tx = 6;
  c.antennas = {2, 2, 2};
  c.distances_m = {250, 150, 50};
  c.mu = {0.1, 0.01, 0.0};
  c.p_tx_dbm = {10, 20};
  c.trials = 4;
  c.seed = 1212;
  c.schemes = {SchemeId::kSnsFixedPerm, SchemeId::kZf, SchemeId::kBd, SchemeId::kBdRsmaMimo};
  c.permutation = PermutationStrategy::kFixed;
  const auto dir = std::filesystem::temp_directory_path() / "sns_acceptance_determinism";
  std::filesystem::remove_all(dir);
  RunOptions one, many;
  many.threads = 3;
  const ExperimentResult a = run_wsr_sweep(c, one);
  const ExperimentResult b = run_wsr_sweep(c, one);
  const ExperimentResult p = run_wsr_sweep(c, many);
  int differing_files = 0, differing_tables = 0;
  const auto fa = a.write(dir / "a", OutputFormat::kCsv);
  const auto fb = b.write(dir / "b", OutputFormat::kCsv);
  for (size_t i = 0; i + 1 < fa.size(); ++i) {  // the last file holds wall-clock times
    if (slurp(fa[i]) != slurp(fb[i])) ++differing_files;
  }
  for (size_t i = 0; i < a.tables.size(); ++i) {
    if (a.tables[i].to_csv() != p.tables[i].to_csv()) ++differing_tables;
  }
  ExperimentConfig s;
  s.scenario = "acceptance_determinism_sensitivity";
  s.num_tx = 8;
  s.antennas = {2, 2, 2, 2};
  s.mu_grid = {1e-3, 1e-1};
  s.trials = 20;
  s.seed = 1213;
  s.permutation = PermutationStrategy::kFixed;
  const ExperimentResult sa = run_sensitivity_experiment(s, one);
  const ExperimentResult sb = run_sensitivity_experiment(s, many);
  for (size_t i = 0; i < sa.tables.size(); ++i) {
    if (sa.tables[i].to_csv() != sb.tables[i].to_csv()) ++differing_tables;
  }
  std::filesystem::remove_all(dir);
  Verdict v;
  v.pass = differing_files == 0 && differing_tables == 0;
  char buf[160];
  std::snprintf(buf, sizeof buf, "repeat run: %d differing files; 1 vs 3 threads: %d differing tables",
                differing_files, differing_tables);
  v.detail = buf;
  return v;
}

}  // namespace
}  // namespace sns

int main() {
  using namespace sns;
  std::vector<RankCase> relaxed_runs;
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"1 null-space correctness", null_space_correctness},
      {"2 rate-formula oracle equivalence", rate_oracle},
      {"3 surrogate tangency and gradient", surrogate_tangency},
      {"4 SCA convergence (fig4_convergence preset)", sca_behavior},
      {"5 upper-bound ordering", [&] { return upper_bound_ordering(&relaxed_runs); }},
      {"6 rank repair", [&] { return rank_repair(relaxed_runs); }},
      {"7 sensitivity bounds", sensitivity_bounds},
      {"8 zero-error reduction", zero_error_reduction},
      {"9 baseline sanity", baseline_sanity},
      {"10 WSR ordering (fig7_wsr preset at 20 dBm)", wsr_ordering},
      {"11 beam-pattern nulls", beam_nulls},
      {"12 determinism and parallel equivalence", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  criterion %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), sec);
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
