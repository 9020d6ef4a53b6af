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

// Monte-Carlo experiments. Each trial draws its channel from
// trial_seed(seed, trial), so results do not depend on the thread count or on
// scheduling. Wall-clock times go to a separate `<experiment>_timing` table;
// every other table is a deterministic function of the configuration.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "sns/baselines.hpp"
#include "sns/complexity.hpp"
#include "sns/config.hpp"
#include "sns/output.hpp"
#include "sns/sensitivity.hpp"

namespace sns {

/// Thread count from SNS_THREADS, else 1.
inline int default_threads() {
  if (const char* s = std::getenv("SNS_THREADS")) {
    const int n = std::atoi(s);
    if (n > 0) return n;
  }
  return 1;
}

/// Runs fn(i) for i in [0, n) on `threads` workers. fn must not throw.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct SchemeOutcome {
  bool ok = false;
  std::string error;
  double wsr = 0.0;        // deployed on the true channel (bits); the bound value for the UB
  double objective = 0.0;  // optimized model objective
  std::vector<double> user_rates;
  double common_rate = 0.0;
  int iterations = 0;
  bool converged = true;
  double seconds = 0.0;
  std::vector<int> order;  // SNS user order
  TransmitCovariances transmit;
};

namespace detail {

inline void fill_rates(SchemeOutcome& o, const RateReport& r) {
  o.wsr = r.wsr;
  o.common_rate = r.common_rate;
  o.user_rates.clear();
  for (Index k = 0; k < static_cast<Index>(r.private_rates.size()); ++k) o.user_rates.push_back(r.user_rate(k));
}

inline void fill_model(SchemeOutcome& o, const ModelSolution& s) {
  fill_rates(o, s.deployed);
  o.objective = s.objective;
  o.iterations = s.state.iteration;
  o.converged = s.state.converged;
  o.transmit = s.transmit;
}

}  // namespace detail

/// One scheme on one channel realization. `extra_starts` are additional SNS
/// initializations (the previous power point's solution).
inline SchemeOutcome run_scheme(SchemeId id, const ChannelSet& ch, const Weights& w, double pt,
                                double sigma2, const ExperimentConfig& cfg,
                                const std::vector<TransmitCovariances>& extra_starts = {}) {
  SchemeOutcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const CsiMode csi = cfg.imperfect() ? CsiMode::kEstimated : CsiMode::kPerfect;
  const bool est = csi == CsiMode::kEstimated;
  const ScaOptions sca = cfg.sca();
  try {
    switch (id) {
      case SchemeId::kSns:
      case SchemeId::kSnsFixedPerm: {
        SnsOptions opt;
        opt.sca = sca;
        if (cfg.bd_warm_start) {
          const UpperBoundSolution ub = bd_mimo_cm_upper_bound(ch, w, pt, sigma2, csi, sca);
          opt.warm_starts.push_back(ub.solution.transmit);
          opt.warm_starts.push_back(ub.bd.transmit);
        }
        for (const auto& t : extra_starts) opt.warm_starts.push_back(t);
        const auto strategy =
            id == SchemeId::kSnsFixedPerm ? PermutationStrategy::kFixed : cfg.permutation;
        const PermutationResult r = permutation_search(ch, w, pt, sigma2, csi, strategy, opt);
        detail::fill_rates(o, r.best.deployed);
        o.objective = r.best.lower_bound;
        o.iterations = r.best.relaxed.state.iteration;
        o.converged = r.best.relaxed.state.converged && r.best.feasible.state.converged;
        o.order = r.best.order;
        o.transmit = to_transmit(r.best.basis, r.best.feasible.pack);
        break;
      }
      case SchemeId::kDirectSca:
        detail::fill_model(o, direct_sca(ch, w, pt, sigma2, csi, sca));
        break;
      case SchemeId::kZf:
        detail::fill_model(o, baseline_pa(rzf_directions(ch, 0.0, est), ch, w, pt, sigma2, csi, sca));
        break;
      case SchemeId::kRzf:
        detail::fill_model(o, baseline_pa(rzf_directions(ch, rzf_alpha(ch, sigma2, pt), est), ch, w,
                                          pt, sigma2, csi, sca));
        break;
      case SchemeId::kBd:
        detail::fill_model(o, baseline_pa(bd_precoder(ch, est), ch, w, pt, sigma2, csi, sca));
        break;
      case SchemeId::kBdRsmaSiso:
      case SchemeId::kBdRsmaMimo: {
        const LinearPrecoderSet set = bd_rsma_structure(ch, est);
        const Index rank = id == SchemeId::kBdRsmaSiso ? 1 : set.common_streams;
        detail::fill_model(o, bd_rsma_pa(set, ch, w, pt, sigma2, csi, rank, sca).feasible);
        break;
      }
      case SchemeId::kBdMimoCmUb: {
        const UpperBoundSolution ub = bd_mimo_cm_upper_bound(ch, w, pt, sigma2, csi, sca);
        detail::fill_model(o, ub.solution);
        o.wsr = ub.value;
        o.objective = ub.value;
        o.converged = ub.concave ? ub.inner.converged : ub.solution.state.converged;
        break;
      }
    }
    o.ok = true;
  } catch (const std::exception& e) {
    o.ok = false;
    o.error = e.what();
  }
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

struct ExperimentResult {
  std::string experiment;
  std::string config_hash;
  std::vector<ResultTable> tables;  // deterministic
  ResultTable timing;               // wall clock, excluded from comparisons
  int failures = 0;
  int attempts = 0;

  ExperimentResult(std::string exp, std::string hash)
      : experiment(exp), config_hash(hash),
        timing(exp + "_timing", hash, {"scheme", "point", "trial", "seconds"}) {}

  const ResultTable& table(const std::string& name) const {
    for (const auto& t : tables) {
      if (t.name() == name) return t;
    }
    throw ValidationError("no table " + name);
  }

  std::vector<std::filesystem::path> write(const std::filesystem::path& dir, OutputFormat f) const {
    std::vector<std::filesystem::path> out;
    for (const auto& t : tables) out.push_back(t.write(dir, f));
    out.push_back(timing.write(dir, f));
    return out;
  }
};

struct RunOptions {
  int threads = 1;
  double max_failure_fraction = 0.1;
};

namespace detail {

inline void check_failures(const ExperimentResult& r, double frac) {
  if (r.attempts > 0 && static_cast<double>(r.failures) > frac * static_cast<double>(r.attempts)) {
    throw NumericalFailure(std::to_string(r.failures) + " of " + std::to_string(r.attempts) +
                           " runs failed in " + r.experiment);
  }
}

struct Stats {
  int n = 0;
  double mean = 0.0, sd = 0.0, min = 0.0, max = 0.0;
  double ci99 = 0.0;  // half-width, normal approximation
  double stderr_ = 0.0;
};

inline Stats stats(const std::vector<double>& v) {
  Stats s;
  s.n = static_cast<int>(v.size());
  if (v.empty()) {
    s.mean = s.sd = s.min = s.max = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(s.n);
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  if (s.n > 1) {
    double acc = 0.0;
    for (double x : v) acc += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(acc / static_cast<double>(s.n - 1));
  }
  s.stderr_ = s.sd / std::sqrt(static_cast<double>(s.n));
  s.ci99 = 2.5758293035489 * s.stderr_;
  return s;
}

inline std::vector<std::string> rate_columns(Index k) {
  std::vector<std::string> c;
  for (Index i = 1; i <= k; ++i) c.push_back("rate_" + std::to_string(i));
  return c;
}

inline std::string order_string(const std::vector<int>& order) {
  std::string s;
  for (size_t i = 0; i < order.size(); ++i) s += (i ? ";" : "") + std::to_string(order[i] + 1);
  return s;
}

inline std::string status(const SchemeOutcome& o) { return o.ok ? "ok" : "failed"; }

}  // namespace detail

// ---------------------------------------------------------------------------
// WSR versus transmit power

inline ExperimentResult run_wsr_sweep(const ExperimentConfig& cfg, const RunOptions& ro = {}) {
  cfg.validate();
  const std::string hash = config_hash(cfg);
  const Weights w = cfg.weights();
  const double s2 = cfg.sigma2();
  const size_t np = cfg.p_tx_dbm.size(), ns = cfg.schemes.size();
  // outcomes[trial][p][scheme]
  std::vector<std::vector<std::vector<SchemeOutcome>>> out(static_cast<size_t>(cfg.trials));
  parallel_for(cfg.trials, ro.threads, [&](int t) {
    auto& mine = out[static_cast<size_t>(t)];
    mine.assign(np, std::vector<SchemeOutcome>(ns));
    ChannelSet ch;
    try {
      ch = cfg.draw(trial_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    } catch (const std::exception& e) {
      for (auto& row : mine) {
        for (auto& o : row) o.error = e.what();
      }
      return;
    }
    std::vector<std::optional<TransmitCovariances>> prev(ns);
    for (size_t p = 0; p < np; ++p) {
      const double pt = dbm_to_mw(cfg.p_tx_dbm[p]);
      for (size_t s = 0; s < ns; ++s) {
        const SchemeId id = cfg.schemes[s];
        std::vector<TransmitCovariances> extra;
        const bool sns = id == SchemeId::kSns || id == SchemeId::kSnsFixedPerm;
        if (sns && cfg.power_warm_start && prev[s]) {
          TransmitCovariances scaled = *prev[s];
          const double f = pt / dbm_to_mw(cfg.p_tx_dbm[p - 1]);
          scaled.q_c *= f;
          for (auto& q : scaled.q) q *= f;
          extra.push_back(std::move(scaled));
        }
        mine[p][s] = run_scheme(id, ch, w, pt, s2, cfg, extra);
        if (mine[p][s].ok) prev[s] = mine[p][s].transmit;
      }
    }
  });
  ExperimentResult res("wsr_sweep", hash);
  std::vector<std::string> cols = {"p_tx_dbm", "trial", "seed", "status", "wsr", "objective",
                                   "common_rate"};
  for (const auto& c : detail::rate_columns(cfg.num_users())) cols.push_back(c);
  for (const char* c : {"iterations", "converged", "order"}) cols.push_back(c);
  ResultTable summary("wsr_sweep_summary", hash,
                      {"scheme", "p_tx_dbm", "n_ok", "n_failed", "mean_wsr", "std_wsr",
                       "ci99_halfwidth", "min_wsr", "max_wsr", "mean_iterations"});
  for (size_t s = 0; s < ns; ++s) {
    const std::string name = to_string(cfg.schemes[s]);
    ResultTable tab("wsr_sweep_" + name, hash, cols);
    for (size_t p = 0; p < np; ++p) {
      std::vector<double> vals, its;
      int failed = 0;
      for (int t = 0; t < cfg.trials; ++t) {
        const SchemeOutcome& o = out[static_cast<size_t>(t)][p][s];
        ++res.attempts;
        std::vector<Cell> row = {cfg.p_tx_dbm[p], std::int64_t{t},
                                 std::to_string(trial_seed(cfg.seed, static_cast<std::uint64_t>(t))),
                                 detail::status(o)};
        if (o.ok) {
          vals.push_back(o.wsr);
          its.push_back(o.iterations);
          row.insert(row.end(), {o.wsr, o.objective, o.common_rate});
          for (double r : o.user_rates) row.push_back(r);
        } else {
          ++failed;
          ++res.failures;
          const double nan = std::numeric_limits<double>::quiet_NaN();
          row.insert(row.end(), {nan, nan, nan});
          for (Index k = 0; k < cfg.num_users(); ++k) row.push_back(nan);
        }
        row.push_back(std::int64_t{o.iterations});
        row.push_back(std::int64_t{o.converged ? 1 : 0});
        row.push_back(o.ok ? detail::order_string(o.order) : o.error);
        tab.add(hash, std::move(row));
        res.timing.add(hash, {name, cfg.p_tx_dbm[p], std::int64_t{t}, o.seconds});
      }
      const detail::Stats st = detail::stats(vals);
      summary.add(hash, {name, cfg.p_tx_dbm[p], std::int64_t{st.n}, std::int64_t{failed}, st.mean,
                         st.sd, st.ci99, st.min, st.max, detail::stats(its).mean});
    }
    res.tables.push_back(std::move(tab));
  }
  res.tables.push_back(std::move(summary));
  detail::check_failures(res, ro.max_failure_fraction);
  return res;
}

// ---------------------------------------------------------------------------
// Two-user rate region

inline ExperimentResult run_rate_region(const ExperimentConfig& cfg, const RunOptions& ro = {}) {
  cfg.validate();
  if (cfg.num_users() != 2) throw ValidationError("KNotTwo: rate region needs exactly two users");
  const std::string hash = config_hash(cfg);
  const double s2 = cfg.sigma2();
  const double pt = dbm_to_mw(cfg.p_tx_dbm.front());
  const size_t ne = static_cast<size_t>(cfg.eta1_points), ns = cfg.schemes.size();
  std::vector<double> grid(ne);
  for (size_t i = 0; i < ne; ++i) grid[i] = static_cast<double>(i) / static_cast<double>(ne - 1);
  std::vector<std::vector<std::vector<SchemeOutcome>>> out(static_cast<size_t>(cfg.trials));
  parallel_for(cfg.trials, ro.threads, [&](int t) {
    auto& mine = out[static_cast<size_t>(t)];
    mine.assign(ne, std::vector<SchemeOutcome>(ns));
    ChannelSet ch;
    try {
      ch = cfg.draw(trial_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    } catch (const std::exception& e) {
      for (auto& row : mine) {
        for (auto& o : row) o.error = e.what();
      }
      return;
    }
    for (size_t e = 0; e < ne; ++e) {
      const Weights w = Weights::from_eta({grid[e], 1.0 - grid[e]});
      for (size_t s = 0; s < ns; ++s) mine[e][s] = run_scheme(cfg.schemes[s], ch, w, pt, s2, cfg);
    }
  });
  ExperimentResult res("rate_region", hash);
  ResultTable summary("rate_region_summary", hash,
                      {"scheme", "eta1", "n_ok", "mean_rate_1", "mean_rate_2", "mean_wsr"});
  for (size_t s = 0; s < ns; ++s) {
    const std::string name = to_string(cfg.schemes[s]);
    ResultTable tab("rate_region_" + name, hash,
                    {"eta1", "trial", "status", "rate_1", "rate_2", "common_rate", "wsr"});
    for (size_t e = 0; e < ne; ++e) {
      std::vector<double> r1, r2, ws;
      for (int t = 0; t < cfg.trials; ++t) {
        const SchemeOutcome& o = out[static_cast<size_t>(t)][e][s];
        ++res.attempts;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        if (o.ok) {
          r1.push_back(o.user_rates[0]);
          r2.push_back(o.user_rates[1]);
          ws.push_back(o.wsr);
        } else {
          ++res.failures;
        }
        tab.add(hash, {grid[e], std::int64_t{t}, o.ok ? std::string("ok") : o.error,
                       o.ok ? o.user_rates[0] : nan, o.ok ? o.user_rates[1] : nan,
                       o.ok ? o.common_rate : nan, o.ok ? o.wsr : nan});
        res.timing.add(hash, {name, grid[e], std::int64_t{t}, o.seconds});
      }
      summary.add(hash, {name, grid[e], std::int64_t{static_cast<std::int64_t>(r1.size())},
                         detail::stats(r1).mean, detail::stats(r2).mean, detail::stats(ws).mean});
    }
    res.tables.push_back(std::move(tab));
  }
  res.tables.push_back(std::move(summary));
  detail::check_failures(res, ro.max_failure_fraction);
  return res;
}

// ---------------------------------------------------------------------------
// Interference caused by estimated null-space bases

struct SensitivityAggregate {
  double mu = 0.0;
  int user = 0;  // 0-based
  detail::Stats up_mc, down_mc, up, down;
  double mean_bound_up = 0.0;
  double mean_bound_down = 0.0;  // over draws with a valid bound
  int invalid = 0;               // draws with some preceding ||C|| >= 1
  int small_c = 0;               // draws with every preceding ||C|| <= c_limit
  int up_violations = 0;
  int down_violations = 0;       // counted on small_c draws only
};

inline ExperimentResult run_sensitivity_experiment(const ExperimentConfig& cfg,
                                                   const RunOptions& ro = {},
                                                   std::vector<SensitivityAggregate>* aggregates = nullptr) {
  cfg.validate();
  const std::string hash = config_hash(cfg);
  const Index k_users = cfg.num_users();
  const size_t nm = cfg.mu_grid.size();
  struct Draw {
    bool ok = false;
    std::string error;
    IuiSample s;
    std::vector<double> c_before;  // max ||C|| over preceding users
    double seconds = 0.0;
  };
  std::vector<std::vector<Draw>> out(static_cast<size_t>(cfg.trials), std::vector<Draw>(nm));
  parallel_for(cfg.trials, ro.threads, [&](int t) {
    const std::uint64_t seed = trial_seed(cfg.seed, static_cast<std::uint64_t>(t));
    for (size_t m = 0; m < nm; ++m) {
      Draw& d = out[static_cast<size_t>(t)][m];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        ExperimentConfig c = cfg;
        c.mu = cfg.errors();
        c.mu[static_cast<size_t>(cfg.error_user)] = cfg.mu_grid[m];
        const ChannelSet ch = c.draw(seed);
        const SnsBasis est = build_sns_basis(ch, identity_order(k_users), true);
        IuiOptions opt;
        opt.mc_draws = cfg.mc_draws;
        opt.seed = mix_seed(seed, 7);
        d.s = analyze_iui(ch, est, std::nullopt, opt);
        d.c_before.assign(static_cast<size_t>(k_users), 0.0);
        for (Index k = 0; k < k_users; ++k) {
          for (Index j = 0; j < k_users; ++j) {
            if (est.precedes(j, k)) {
              d.c_before[static_cast<size_t>(k)] =
                  std::max(d.c_before[static_cast<size_t>(k)], d.s.c_norm[static_cast<size_t>(j)]);
            }
          }
        }
        d.ok = true;
      } catch (const std::exception& e) {
        d.error = e.what();
      }
      d.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  });
  ExperimentResult res("sensitivity", hash);
  ResultTable draws("sensitivity_SNS", hash,
                    {"mu", "trial", "user", "xi_up", "xi_down", "xi_up_mc", "xi_down_mc", "bound_up",
                     "bound_down", "c_max_preceding", "bound_valid"});
  ResultTable summary("sensitivity_summary", hash,
                      {"mu", "user", "n", "mean_xi_up_mc", "min_xi_up_mc", "max_xi_up_mc",
                       "stderr_xi_up_mc", "mean_xi_down_mc", "min_xi_down_mc", "max_xi_down_mc",
                       "mean_xi_up", "mean_xi_down", "max_xi_up", "max_xi_down", "mean_bound_up",
                       "mean_bound_down", "n_invalid", "n_small_c", "up_violations",
                       "down_violations"});
  const double tol = 1e-9;
  for (size_t m = 0; m < nm; ++m) {
    for (Index k = 0; k < k_users; ++k) {
      const size_t i = static_cast<size_t>(k);
      SensitivityAggregate ag;
      ag.mu = cfg.mu_grid[m];
      ag.user = static_cast<int>(k);
      std::vector<double> um, dm, u, dn, bu, bd;
      for (int t = 0; t < cfg.trials; ++t) {
        const Draw& d = out[static_cast<size_t>(t)][m];
        if (k == 0) {
          ++res.attempts;
          if (!d.ok) ++res.failures;
          res.timing.add(hash, {std::string("SNS"), cfg.mu_grid[m], std::int64_t{t}, d.seconds});
        }
        if (!d.ok) continue;
        const IuiSample& s = d.s;
        um.push_back(s.xi_up_mc[i]);
        dm.push_back(s.xi_down_mc[i]);
        u.push_back(s.xi_up[i]);
        dn.push_back(s.xi_down[i]);
        bu.push_back(s.bound_up[i]);
        if (s.xi_up[i] > s.bound_up[i] * (1.0 + tol) + 1e-15) ++ag.up_violations;
        if (s.bound_valid[i]) {
          bd.push_back(s.bound_down[i]);
        } else {
          ++ag.invalid;
        }
        if (d.c_before[i] <= cfg.c_limit) {
          ++ag.small_c;
          if (s.xi_down[i] > s.bound_down[i] * (1.0 + tol) + 1e-15) ++ag.down_violations;
        }
        draws.add(hash, {cfg.mu_grid[m], std::int64_t{t}, std::int64_t{k + 1}, s.xi_up[i], s.xi_down[i],
                         s.xi_up_mc[i], s.xi_down_mc[i], s.bound_up[i], s.bound_down[i],
                         d.c_before[i], std::int64_t{s.bound_valid[i] ? 1 : 0}});
      }
      ag.up_mc = detail::stats(um);
      ag.down_mc = detail::stats(dm);
      ag.up = detail::stats(u);
      ag.down = detail::stats(dn);
      ag.mean_bound_up = detail::stats(bu).mean;
      ag.mean_bound_down = detail::stats(bd).mean;
      summary.add(hash, {ag.mu, std::int64_t{k + 1}, std::int64_t{ag.up_mc.n}, ag.up_mc.mean,
                         ag.up_mc.min, ag.up_mc.max, ag.up_mc.stderr_, ag.down_mc.mean, ag.down_mc.min,
                         ag.down_mc.max, ag.up.mean, ag.down.mean, ag.up.max, ag.down.max,
                         ag.mean_bound_up, ag.mean_bound_down, std::int64_t{ag.invalid},
                         std::int64_t{ag.small_c}, std::int64_t{ag.up_violations},
                         std::int64_t{ag.down_violations}});
      if (aggregates) aggregates->push_back(ag);
    }
  }
  res.tables.push_back(std::move(draws));
  res.tables.push_back(std::move(summary));
  detail::check_failures(res, ro.max_failure_fraction);
  return res;
}

// ---------------------------------------------------------------------------
// Beam patterns over a ULA

/// Dominant precoding vector sqrt(lambda_1) v_1 of a covariance.
inline CVector principal_precoder(const CMatrix& q) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(q));
  const Index n = q.rows();
  return std::sqrt(std::max(0.0, es.eigenvalues()(n - 1))) * es.eigenvectors().col(n - 1);
}

/// Radiated power |a(theta)^H p|^2 with unit-modulus steering entries (mW).
inline double radiated_power(const CVector& p, double angle_deg) {
  const Index n = p.size();
  const CVector a = std::sqrt(static_cast<double>(n)) * ula_steering(n, angle_deg);
  return std::norm(a.dot(p));
}

inline ExperimentResult run_beampattern(const ExperimentConfig& cfg, const RunOptions& ro = {}) {
  cfg.validate();
  if (cfg.model != ChannelModel::kUla) throw ModelMismatch("beam patterns need the ULA channel model");
  for (Index m : cfg.antennas) {
    if (m != 1) throw ValidationError("beam patterns need single-antenna users");
  }
  const std::string hash = config_hash(cfg);
  const Weights w = cfg.weights();
  const double s2 = cfg.sigma2();
  const double pt = dbm_to_mw(cfg.p_tx_dbm.front());
  const size_t ns = cfg.schemes.size();
  const Index k_users = cfg.num_users();
  std::vector<std::vector<SchemeOutcome>> out(static_cast<size_t>(cfg.trials),
                                              std::vector<SchemeOutcome>(ns));
  parallel_for(cfg.trials, ro.threads, [&](int t) {
    try {
      const ChannelSet ch = cfg.draw(trial_seed(cfg.seed, static_cast<std::uint64_t>(t)));
      for (size_t s = 0; s < ns; ++s) out[static_cast<size_t>(t)][s] = run_scheme(cfg.schemes[s], ch, w, pt, s2, cfg);
    } catch (const std::exception& e) {
      for (auto& o : out[static_cast<size_t>(t)]) o.error = e.what();
    }
  });
  std::vector<double> angles;
  for (double a = -90.0; a < 90.0 - 1e-9; a += cfg.angle_step_deg) angles.push_back(a);
  ExperimentResult res("beampattern", hash);
  ResultTable summary("beampattern_summary", hash,
                      {"scheme", "trial", "stream", "order_position", "victim", "victim_angle_deg",
                       "power_at_victim", "peak_power", "relative", "integrated_power",
                       "stream_power"});
  for (size_t s = 0; s < ns; ++s) {
    const std::string name = to_string(cfg.schemes[s]);
    ResultTable tab("beampattern_" + name, hash, {"trial", "stream", "angle_deg", "power_mw"});
    for (int t = 0; t < cfg.trials; ++t) {
      const SchemeOutcome& o = out[static_cast<size_t>(t)][s];
      ++res.attempts;
      res.timing.add(hash, {name, 0.0, std::int64_t{t}, o.seconds});
      if (!o.ok) {
        ++res.failures;
        continue;
      }
      std::vector<int> pos(static_cast<size_t>(k_users));
      for (Index k = 0; k < k_users; ++k) pos[static_cast<size_t>(k)] = static_cast<int>(k);
      for (size_t i = 0; i < o.order.size(); ++i) pos[static_cast<size_t>(o.order[i])] = static_cast<int>(i);
      for (Index k = 0; k < k_users; ++k) {
        const CVector p = principal_precoder(o.transmit.q[static_cast<size_t>(k)]);
        double peak = 0.0, integral = 0.0;
        for (double a : angles) {
          const double pw = radiated_power(p, a);
          peak = std::max(peak, pw);
          // (1/2) int |a^H p|^2 cos(theta) dtheta = ||p||^2
          integral += 0.5 * pw * std::cos(a * std::numbers::pi / 180.0) * cfg.angle_step_deg *
                      std::numbers::pi / 180.0;
          tab.add(hash, {std::int64_t{t}, std::int64_t{k + 1}, a, pw});
        }
        for (Index j = 0; j < k_users; ++j) {
          if (j == k) continue;
          const double va = cfg.angles_deg.empty() ? 0.0 : cfg.angles_deg[static_cast<size_t>(j)];
          const double pv = radiated_power(p, va);
          summary.add(hash, {name, std::int64_t{t}, std::int64_t{k + 1},
                             std::int64_t{pos[static_cast<size_t>(k)] + 1}, std::int64_t{j + 1}, va, pv,
                             peak, peak > 0.0 ? pv / peak : 0.0, integral, p.squaredNorm()});
        }
      }
    }
    res.tables.push_back(std::move(tab));
  }
  res.tables.push_back(std::move(summary));
  detail::check_failures(res, ro.max_failure_fraction);
  return res;
}

// ---------------------------------------------------------------------------
// SCA convergence traces (relaxed problem, identity order, algorithm start)

inline ExperimentResult run_convergence(const ExperimentConfig& cfg, const RunOptions& ro = {}) {
  cfg.validate();
  const std::string hash = config_hash(cfg);
  const Weights w = cfg.weights();
  const double s2 = cfg.sigma2();
  const double pt = dbm_to_mw(cfg.p_tx_dbm.front());
  const CsiMode csi = cfg.imperfect() ? CsiMode::kEstimated : CsiMode::kPerfect;
  struct Run {
    bool ok = false;
    std::string error;
    ScaState st;
    double seconds = 0.0;
  };
  std::vector<Run> out(static_cast<size_t>(cfg.trials));
  parallel_for(cfg.trials, ro.threads, [&](int t) {
    Run& r = out[static_cast<size_t>(t)];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const ChannelSet ch = cfg.draw(trial_seed(cfg.seed, static_cast<std::uint64_t>(t)));
      const SnsBasis b = build_sns_basis(ch, identity_order(cfg.num_users()), csi == CsiMode::kEstimated);
      r.st = sca_maximize(ch, b, w, pt, s2, csi, cfg.sca()).state;
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });
  ExperimentResult res("convergence", hash);
  ResultTable trace("convergence_SNS", hash, {"trial", "iteration", "surrogate_wsr", "true_wsr"});
  ResultTable summary("convergence_summary", hash,
                      {"trial", "status", "iterations", "converged", "monotone", "final_wsr"});
  for (int t = 0; t < cfg.trials; ++t) {
    const Run& r = out[static_cast<size_t>(t)];
    ++res.attempts;
    res.timing.add(hash, {std::string("SNS"), 0.0, std::int64_t{t}, r.seconds});
    if (!r.ok) {
      ++res.failures;
      summary.add(hash, {std::int64_t{t}, r.error, std::int64_t{0}, std::int64_t{0}, std::int64_t{0},
                         std::numeric_limits<double>::quiet_NaN()});
      continue;
    }
    trace.add(hash, {std::int64_t{t}, std::int64_t{0}, r.st.initial_value, r.st.initial_value});
    bool mono = true;
    double prev = r.st.initial_value;
    for (size_t i = 0; i < r.st.history.size(); ++i) {
      const double tv = i < r.st.true_history.size() ? r.st.true_history[i] : r.st.history[i];
      trace.add(hash, {std::int64_t{t}, static_cast<std::int64_t>(i + 1), r.st.history[i], tv});
      if (r.st.history[i] < prev - 1e-7) mono = false;
      prev = r.st.history[i];
    }
    summary.add(hash, {std::int64_t{t}, std::string("ok"), std::int64_t{r.st.iteration},
                       std::int64_t{r.st.converged ? 1 : 0}, std::int64_t{mono ? 1 : 0}, r.st.value});
  }
  res.tables.push_back(std::move(trace));
  res.tables.push_back(std::move(summary));
  detail::check_failures(res, ro.max_failure_fraction);
  return res;
}

// ---------------------------------------------------------------------------
// Analytic complexity with measured iteration counts and times

inline ExperimentResult run_complexity(const ExperimentConfig& cfg, const RunOptions& ro = {}) {
  cfg.validate();
  const std::string hash = config_hash(cfg);
  ExperimentResult res("complexity", hash);
  ResultTable analytic("complexity_analytic", hash,
                       {"K", "N", "V", "scheme", "precoder", "iterative", "pa", "total"});
  for (Index k : cfg.k_grid) {
    const std::vector<Index> m(static_cast<size_t>(k), 2);
    const Index n = 2 * k;
    for (const auto& r : complexity_report(n, m, cfg.eps, cfg.n_iter)) {
      analytic.add(hash, {std::int64_t{k}, std::int64_t{n}, sns_variable_count(n, m), r.scheme,
                          r.precoder, std::int64_t{r.iterative ? 1 : 0}, r.pa, r.total});
    }
  }
  const std::vector<SchemeId> measured = {SchemeId::kSnsFixedPerm, SchemeId::kDirectSca,
                                          SchemeId::kBdRsmaMimo, SchemeId::kRzf, SchemeId::kBd,
                                          SchemeId::kZf};
  std::vector<Index> ks;
  for (Index k : cfg.k_grid) {
    if (k <= cfg.measure_max_k) ks.push_back(k);
  }
  std::vector<std::vector<SchemeOutcome>> out(ks.size(), std::vector<SchemeOutcome>(measured.size()));
  parallel_for(static_cast<int>(ks.size()), ro.threads, [&](int i) {
    const Index k = ks[static_cast<size_t>(i)];
    ExperimentConfig c = cfg;
    c.num_tx = 2 * k;
    c.antennas.assign(static_cast<size_t>(k), 2);
    c.distances_m.clear();
    c.angles_deg.clear();
    c.eta.clear();
    c.eta_c.clear();
    c.mu.clear();
    c.model = ChannelModel::kIidGaussian;
    try {
      const ChannelSet ch = c.draw(trial_seed(cfg.seed, static_cast<std::uint64_t>(k)));
      for (size_t s = 0; s < measured.size(); ++s) {
        out[static_cast<size_t>(i)][s] =
            run_scheme(measured[s], ch, c.weights(), dbm_to_mw(cfg.p_tx_dbm.front()), c.sigma2(), c);
      }
    } catch (const std::exception& e) {
      for (auto& o : out[static_cast<size_t>(i)]) o.error = e.what();
    }
  });
  ResultTable iters("complexity_measured", hash, {"K", "N", "scheme", "status", "iterations", "wsr"});
  for (size_t i = 0; i < ks.size(); ++i) {
    for (size_t s = 0; s < measured.size(); ++s) {
      const SchemeOutcome& o = out[i][s];
      ++res.attempts;
      if (!o.ok) ++res.failures;
      iters.add(hash, {std::int64_t{ks[i]}, std::int64_t{2 * ks[i]}, to_string(measured[s]),
                       detail::status(o), std::int64_t{o.iterations},
                       o.ok ? o.wsr : std::numeric_limits<double>::quiet_NaN()});
      res.timing.add(hash, {to_string(measured[s]), static_cast<double>(ks[i]), std::int64_t{0}, o.seconds});
    }
  }
  res.tables.push_back(std::move(analytic));
  res.tables.push_back(std::move(iters));
  detail::check_failures(res, ro.max_failure_fraction);
  return res;
}

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> n = {"wsr-sweep", "rate-region", "sensitivity",
                                             "beampattern", "convergence", "complexity"};
  return n;
}

inline ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& cfg,
                                       const RunOptions& ro = {}) {
  if (name == "wsr-sweep") return run_wsr_sweep(cfg, ro);
  if (name == "rate-region") return run_rate_region(cfg, ro);
  if (name == "sensitivity") return run_sensitivity_experiment(cfg, ro);
  if (name == "beampattern") return run_beampattern(cfg, ro);
  if (name == "convergence") return run_convergence(cfg, ro);
  if (name == "complexity") return run_complexity(cfg, ro);
  throw ValidationError("unknown experiment '" + name + "'");
}

}  // namespace sns
