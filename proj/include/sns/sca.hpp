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

// Successive convex approximation of the weighted sum rate: the outer loop,
// SNS covariance models (relaxed and rank-reduced), user-order selection and
// the unstructured direct-SCA reference.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "sns/capacity.hpp"
#include "sns/inner_solver.hpp"
#include "sns/rate_model.hpp"
#include "sns/rsma.hpp"

namespace sns {

enum class CsiMode { kPerfect, kEstimated };
enum class PermutationStrategy { kExhaustive, kFixed };

inline constexpr int kMaxOuterIterations = 200;
inline constexpr Index kMaxExhaustiveUsers = 5;

struct ScaOptions {
  double eps = 1e-5;  // bits
  int max_outer = kMaxOuterIterations;
  InnerOptions inner;
};

struct ScaState {
  int iteration = 0;
  Blocks expansion;
  double value = 0.0;  // latest surrogate optimum, bits
  double eps = 0.0;
  double initial_value = 0.0;         // exact WSR at the initialization
  std::vector<double> history;        // surrogate optimum per iteration, bits
  std::vector<double> true_history;   // exact WSR at each new iterate, bits
  bool converged = false;             // false: outer cap reached
  int inner_iterations = 0;
};

/// Algorithm: expand at the current point, maximize the concave surrogate
/// starting there, move, stop when successive surrogate optima differ by < eps.
inline ScaState sca_run(const RateModel& m, const Blocks& init, const ScaOptions& opt) {
  if (!(opt.eps > 0.0)) throw ValidationError("SCA tolerance must be positive");
  ScaState st;
  st.eps = opt.eps;
  {
    ConcaveProgram dummy;
    dummy.vars = m.vars;
    st.expansion = project_feasible(dummy, init, m.budget);
  }
  st.initial_value = model_objective(m, st.expansion);
  double prev = st.initial_value;
  InnerOptions inner = opt.inner;
  for (int l = 1; l <= opt.max_outer; ++l) {
    const ConcaveProgram prog = surrogate_program(m, st.expansion);
    InnerSolution sol = solve_inner(prog, st.expansion, inner);
    inner.multipliers = sol.multipliers;
    st.inner_iterations += sol.iterations;
    st.expansion = std::move(sol.y);
    st.iteration = l;
    st.value = sol.value / kLn2;
    st.history.push_back(st.value);
    st.true_history.push_back(model_objective(m, st.expansion));
    if (std::abs(st.value - prev) < opt.eps) {
      st.converged = true;
      break;
    }
    prev = st.value;
  }
  if (st.history.empty()) st.value = st.initial_value;
  return st;
}

/// Restricts each full block j with u[j] non-empty to Y_j = U Yt U^H.
/// Returns the reduced model; `y` is mapped to Yt = U^H Y U.
inline RateModel reduce_model(const RateModel& m, const std::vector<CMatrix>& u, Blocks* y) {
  RateModel r = m;
  for (size_t j = 0; j < m.vars.size(); ++j) {
    if (u[j].rows() == 0) continue;  // keep block as is
    if (m.vars[j].diagonal) throw ValidationError("diagonal blocks cannot be rank-reduced");
    r.vars[j].dim = u[j].cols();
    r.basis[j] = m.basis[j] * u[j];
    for (auto& row : r.maps) row[j] = row[j] * u[j];
    if (y != nullptr) (*y)[j] = hermitian_part(u[j].adjoint() * (*y)[j] * u[j]);
  }
  return r;
}

// ---------------------------------------------------------------------------
// SNS models

/// Blocks: 0 = Q_c (W = I_N), 1 + k = X_k (W = Psi_k).
inline RateModel sns_model(const ChannelSet& ch, const SnsBasis& b, const Weights& w,
                           double p_total, double sigma2, CsiMode csi) {
  const Index k_users = ch.num_users();
  w.validate(k_users);
  if (b.num_users() != k_users) throw DimensionError("basis and channel user counts differ");
  const bool est = csi == CsiMode::kEstimated;
  if (est != b.estimated) throw ValidationError("basis CSI flag does not match the CSI mode");
  if (!(p_total >= 0.0)) throw ValidationError("power budget must be nonnegative");
  RateModel m;
  m.budget = p_total;
  m.vars.push_back({ch.num_tx, false});
  m.basis.push_back(identity(ch.num_tx));
  m.common_var = 0;
  for (Index k = 0; k < k_users; ++k) {
    m.vars.push_back({b.dim(k), false});
    m.basis.push_back(b.psi[static_cast<size_t>(k)]);
    m.user_var.push_back(static_cast<int>(1 + k));
  }
  for (Index k = 0; k < k_users; ++k) {
    RateSpec p{{static_cast<int>(1 + k)}, {}};
    RateSpec c{{0}, {}};
    for (Index j = 0; j < k_users; ++j) {
      const int v = static_cast<int>(1 + j);
      if (est) {
        if (j != k) p.interference.push_back(v);
        c.interference.push_back(v);
      } else {
        if (b.precedes(j, k)) p.interference.push_back(v);
        if (j == k || b.precedes(j, k)) c.interference.push_back(v);
      }
    }
    m.priv.push_back(std::move(p));
    m.common.push_back(std::move(c));
  }
  m.eta = w.eta;
  m.common_weight = w.common_coefficient();
  m.set_receivers(normalized_receivers(ch, sigma2, est));
  return m;
}

inline Blocks pack_to_blocks(const CovariancePack& p) {
  Blocks y{p.q_c.matrix()};
  for (const auto& x : p.x) y.push_back(x.matrix());
  return y;
}

inline CovariancePack blocks_to_pack(const Blocks& y) {
  CovariancePack p;
  p.q_c = PsdMatrix(y[0]);
  for (size_t j = 1; j < y.size(); ++j) p.x.emplace_back(y[j]);
  return p;
}

/// Algorithm initialization: X_k = P_T / (K N_k) I, Q_c = 0.
inline CovariancePack default_initialization(const SnsBasis& b, double p_total) {
  CovariancePack p;
  const Index k_users = b.num_users();
  p.q_c = PsdMatrix::zero(b.psi.empty() ? 0 : b.psi[0].rows());
  for (Index k = 0; k < k_users; ++k) {
    const Index nk = b.dim(k);
    p.x.push_back(PsdMatrix::scaled_identity(nk, p_total / static_cast<double>(k_users * nk)));
  }
  return p;
}

/// Maps antenna-space covariances into the SNS variables: X_k = Psi_k^H Q_k Psi_k.
inline CovariancePack pack_from_transmit(const SnsBasis& b, const TransmitCovariances& t) {
  CovariancePack p;
  p.q_c = PsdMatrix(t.q_c);
  for (Index k = 0; k < b.num_users(); ++k) {
    const CMatrix& psi = b.psi[static_cast<size_t>(k)];
    p.x.emplace_back(psi.adjoint() * t.q[static_cast<size_t>(k)] * psi);
  }
  return p;
}

struct ScaOutput {
  double wsr = 0.0;  // model objective (bits): perfect WSR, or the estimated-channel surrogate
  CovariancePack pack;
  ScaState state;
};

/// Relaxed (rank-unconstrained) SNS optimization from `init`, or from the
/// algorithm's initialization when `init` is empty.
inline ScaOutput sca_maximize(const ChannelSet& ch, const SnsBasis& b, const Weights& w,
                              double p_total, double sigma2, CsiMode csi, const ScaOptions& opt,
                              const std::optional<CovariancePack>& init = std::nullopt) {
  const RateModel m = sns_model(ch, b, w, p_total, sigma2, csi);
  const CovariancePack start = init ? *init : default_initialization(b, p_total);
  detail::check_pack(ch, b, start);
  ScaOutput out;
  out.state = sca_run(m, pack_to_blocks(start), opt);
  out.pack = blocks_to_pack(out.state.expansion);
  out.wsr = model_objective(m, out.state.expansion);
  return out;
}

/// Rank-feasible reformulation: Q_c = U_c Xt_c U_c^H with M columns and
/// X_k = U_k Xt_k U_k^H with M_k columns, U from the relaxed solution's
/// dominant eigenvectors; SCA is rerun over the reduced variables starting
/// from Xt = U^H X U.
inline ScaOutput rank_repair_and_reoptimize(const ChannelSet& ch, const SnsBasis& b,
                                            const Weights& w, double p_total, double sigma2,
                                            CsiMode csi, const ScaOutput& relaxed,
                                            const ScaOptions& opt) {
  const RateModel full = sns_model(ch, b, w, p_total, sigma2, csi);
  const auto ant = ch.antennas();
  const Index m_common = *std::min_element(ant.begin(), ant.end());
  CovariancePack::Reduced red;
  std::vector<CMatrix> u;
  red.u_c = top_eigvecs(relaxed.pack.q_c, m_common);
  u.push_back(red.u_c);
  for (Index k = 0; k < ch.num_users(); ++k) {
    const auto& xk = relaxed.pack.x[static_cast<size_t>(k)];
    const Index r = std::min(ant[static_cast<size_t>(k)], xk.dim());
    red.u.push_back(top_eigvecs(xk, r));
    u.push_back(red.u.back());
  }
  Blocks y = pack_to_blocks(relaxed.pack);
  const RateModel reduced = reduce_model(full, u, &y);
  ScaOutput out;
  out.state = sca_run(reduced, y, opt);
  red.xt_c = PsdMatrix(out.state.expansion[0]);
  for (Index k = 0; k < ch.num_users(); ++k) {
    red.xt.emplace_back(out.state.expansion[static_cast<size_t>(1 + k)]);
  }
  out.pack = CovariancePack::from_reduced(std::move(red));
  out.wsr = model_objective(reduced, out.state.expansion);
  return out;
}

struct SnsOptions {
  ScaOptions sca;
  bool default_init = true;
  /// Additional antenna-space starting points (e.g. a BD-structured solution).
  std::vector<TransmitCovariances> warm_starts;
  bool rank_repair = true;
};

struct SnsResult {
  std::vector<int> order;
  SnsBasis basis;
  ScaOutput relaxed;
  ScaOutput feasible;   // rank-repaired (or the relaxed output when repair is off)
  RateReport deployed;  // rates of the feasible solution on the true channel
  double relaxed_wsr = 0.0;
  double lower_bound = 0.0;
};

/// Full SNS pipeline for one user order: relaxed SCA from every requested
/// start (best kept), rank repair, evaluation on the true channel.
inline SnsResult sns_optimize(const ChannelSet& ch, const std::vector<int>& order,
                              const Weights& w, double p_total, double sigma2, CsiMode csi,
                              const SnsOptions& opt = {}) {
  SnsResult res;
  res.order = order;
  res.basis = build_sns_basis(ch, order, csi == CsiMode::kEstimated);
  std::vector<std::optional<CovariancePack>> starts;
  if (opt.default_init || opt.warm_starts.empty()) starts.emplace_back(std::nullopt);
  for (const auto& t : opt.warm_starts) starts.emplace_back(pack_from_transmit(res.basis, t));
  bool first = true;
  for (const auto& s : starts) {
    ScaOutput o = sca_maximize(ch, res.basis, w, p_total, sigma2, csi, opt.sca, s);
    if (first || o.wsr > res.relaxed.wsr) res.relaxed = std::move(o);
    first = false;
  }
  if (opt.rank_repair) {
    res.feasible = rank_repair_and_reoptimize(ch, res.basis, w, p_total, sigma2, csi,
                                              res.relaxed, opt.sca);
    if (res.feasible.wsr > res.relaxed.wsr) {
      // the reduced point is feasible for the relaxation: continue from it
      ScaOutput o = sca_maximize(ch, res.basis, w, p_total, sigma2, csi, opt.sca,
                                 CovariancePack{res.feasible.pack.q_c, res.feasible.pack.x, {}});
      ScaState& st = res.relaxed.state;
      const ScaState& more = o.state;
      st.history.insert(st.history.end(), more.history.begin(), more.history.end());
      st.true_history.insert(st.true_history.end(), more.true_history.begin(),
                             more.true_history.end());
      st.iteration += more.iteration;
      st.inner_iterations += more.inner_iterations;
      st.converged = more.converged;
      if (o.wsr > res.feasible.wsr) {
        st.expansion = std::move(o.state.expansion);
        st.value = more.value;
        res.relaxed.pack = std::move(o.pack);
        res.relaxed.wsr = o.wsr;
      } else {
        res.relaxed.pack = CovariancePack{res.feasible.pack.q_c, res.feasible.pack.x, {}};
        res.relaxed.wsr = res.feasible.wsr;
        st.expansion = pack_to_blocks(res.relaxed.pack);
        st.value = res.feasible.wsr;
      }
    }
  } else {
    res.feasible = res.relaxed;
  }
  res.relaxed_wsr = res.relaxed.wsr;
  res.lower_bound = res.feasible.wsr;
  res.deployed = csi == CsiMode::kEstimated
                     ? imperfect_rates(ch, res.basis, res.feasible.pack, sigma2, w, EvalChannel::kTrue)
                     : perfect_rates(ch, res.basis, res.feasible.pack, sigma2, w);
  return res;
}

/// Order by descending eta_k R_k^SU (single-user capacity under the full
/// budget, including path loss); ties by user index.
inline std::vector<int> fixed_order(const ChannelSet& ch, const Weights& w, double p_total,
                                    double sigma2, CsiMode csi) {
  const auto rx = normalized_receivers(ch, sigma2, csi == CsiMode::kEstimated);
  std::vector<double> score;
  for (size_t k = 0; k < rx.size(); ++k) score.push_back(w.eta[k] * single_user_capacity(rx[k], p_total));
  std::vector<int> order = identity_order(ch.num_users());
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return score[static_cast<size_t>(a)] > score[static_cast<size_t>(b)];
  });
  return order;
}

struct PermutationResult {
  SnsResult best;
  std::vector<std::pair<std::vector<int>, double>> evaluated;  // (order, lower bound)
};

inline PermutationResult permutation_search(const ChannelSet& ch, const Weights& w, double p_total,
                                            double sigma2, CsiMode csi,
                                            PermutationStrategy strategy,
                                            const SnsOptions& opt = {}) {
  PermutationResult out;
  if (strategy == PermutationStrategy::kFixed) {
    out.best = sns_optimize(ch, fixed_order(ch, w, p_total, sigma2, csi), w, p_total, sigma2, csi, opt);
    out.evaluated.emplace_back(out.best.order, out.best.lower_bound);
    return out;
  }
  if (ch.num_users() > kMaxExhaustiveUsers) {
    throw TooManyUsers("exhaustive permutation search allows at most 5 users");
  }
  std::vector<int> order = identity_order(ch.num_users());
  bool first = true;
  do {
    SnsResult r = sns_optimize(ch, order, w, p_total, sigma2, csi, opt);
    out.evaluated.emplace_back(order, r.lower_bound);
    if (first || r.lower_bound > out.best.lower_bound) out.best = std::move(r);
    first = false;
  } while (std::next_permutation(order.begin(), order.end()));
  return out;
}

// ---------------------------------------------------------------------------
// Direct SCA over unstructured covariances

/// Blocks: 0 = Q_c, 1 + k = Q_k, all N x N with every other private stream
/// interfering.
inline RateModel direct_model(const ChannelSet& ch, const Weights& w, double p_total,
                              double sigma2, CsiMode csi) {
  const Index k_users = ch.num_users();
  w.validate(k_users);
  RateModel m;
  m.budget = p_total;
  for (Index j = 0; j <= k_users; ++j) {
    m.vars.push_back({ch.num_tx, false});
    m.basis.push_back(identity(ch.num_tx));
  }
  m.common_var = 0;
  for (Index k = 0; k < k_users; ++k) m.user_var.push_back(static_cast<int>(1 + k));
  for (Index k = 0; k < k_users; ++k) {
    RateSpec p{{static_cast<int>(1 + k)}, {}};
    RateSpec c{{0}, {}};
    for (Index j = 0; j < k_users; ++j) {
      if (j != k) p.interference.push_back(static_cast<int>(1 + j));
      c.interference.push_back(static_cast<int>(1 + j));
    }
    m.priv.push_back(std::move(p));
    m.common.push_back(std::move(c));
  }
  m.eta = w.eta;
  m.common_weight = w.common_coefficient();
  m.set_receivers(normalized_receivers(ch, sigma2, csi == CsiMode::kEstimated));
  return m;
}

struct ModelSolution {
  RateModel model;
  ScaState state;
  double objective = 0.0;  // model objective, bits
  TransmitCovariances transmit;
  RateReport deployed;     // true channel, every other private stream interfering
};

inline ModelSolution finish_solution(const ChannelSet& ch, RateModel m, ScaState st,
                                     const Weights& w, double sigma2) {
  ModelSolution s;
  s.objective = model_objective(m, st.expansion);
  s.transmit = model_transmit(m, st.expansion, ch.num_tx);
  s.deployed = full_interference_rates(ch, s.transmit, sigma2, w, EvalChannel::kTrue);
  s.model = std::move(m);
  s.state = std::move(st);
  return s;
}

/// Starts at 1e-6 (P_T / N) I per block (a zero start makes the first
/// surrogate degenerate), then repairs ranks to M and M_k and reoptimizes.
inline ModelSolution direct_sca(const ChannelSet& ch, const Weights& w, double p_total,
                                double sigma2, CsiMode csi, const ScaOptions& opt = {}) {
  const RateModel m = direct_model(ch, w, p_total, sigma2, csi);
  Blocks init;
  for (const auto& v : m.vars) {
    init.push_back(1e-6 * p_total / static_cast<double>(ch.num_tx) * identity(v.dim));
  }
  const ScaState relaxed = sca_run(m, init, opt);
  const auto ant = ch.antennas();
  std::vector<CMatrix> u;
  u.push_back(top_eigvecs(PsdMatrix(relaxed.expansion[0]), *std::min_element(ant.begin(), ant.end())));
  for (Index k = 0; k < ch.num_users(); ++k) {
    u.push_back(top_eigvecs(PsdMatrix(relaxed.expansion[static_cast<size_t>(1 + k)]),
                            ant[static_cast<size_t>(k)]));
  }
  Blocks y = relaxed.expansion;
  RateModel reduced = reduce_model(m, u, &y);
  ScaState st = sca_run(reduced, y, opt);
  return finish_solution(ch, std::move(reduced), std::move(st), w, sigma2);
}

}  // namespace sns
