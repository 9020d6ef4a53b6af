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

// Power allocation for the baseline precoders (ZF, RZF, BD, BD with a common
// message) and the BD + MIMO common-message upper bound.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sns/precoders.hpp"
#include "sns/sca.hpp"

namespace sns {

/// Per-stream power blocks (diagonal, W = directions); optionally a full
/// N x N common covariance as block 0.
inline RateModel linear_model(const ChannelSet& ch, const LinearPrecoderSet& set,
                              const Weights& w, double p_total, double sigma2, CsiMode csi,
                              bool with_common) {
  const Index k_users = ch.num_users();
  w.validate(k_users);
  if (set.num_users() != k_users) throw DimensionError("precoder set and channel user counts differ");
  RateModel m;
  m.budget = p_total;
  int next = 0;
  if (with_common) {
    m.vars.push_back({ch.num_tx, false});
    m.basis.push_back(identity(ch.num_tx));
    m.common_var = next++;
  }
  for (Index k = 0; k < k_users; ++k) {
    const CMatrix& d = set.directions[static_cast<size_t>(k)];
    m.vars.push_back({d.cols(), true});
    m.basis.push_back(d);
    m.user_var.push_back(next++);
  }
  for (Index k = 0; k < k_users; ++k) {
    RateSpec p{{m.user_var[static_cast<size_t>(k)]}, {}};
    RateSpec c{{m.common_var}, {}};
    for (Index j = 0; j < k_users; ++j) {
      if (j != k) p.interference.push_back(m.user_var[static_cast<size_t>(j)]);
      c.interference.push_back(m.user_var[static_cast<size_t>(j)]);
    }
    m.priv.push_back(std::move(p));
    if (with_common) m.common.push_back(std::move(c));
  }
  m.eta = w.eta;
  m.common_weight = with_common ? w.common_coefficient() : 0.0;
  m.set_receivers(normalized_receivers(ch, sigma2, csi == CsiMode::kEstimated));
  return m;
}

inline Blocks equal_power_blocks(const RateModel& m, double fraction) {
  Index streams = 0;
  for (int j : m.user_var) streams += m.vars[static_cast<size_t>(j)].dim;
  Blocks y = m.zeros();
  if (streams == 0) return y;
  for (int j : m.user_var) {
    y[static_cast<size_t>(j)] =
        fraction * m.budget / static_cast<double>(streams) * identity(m.vars[static_cast<size_t>(j)].dim);
  }
  return y;
}

/// PA for private-only schemes. ZF and BD start at equal power (their PA is
/// concave, so SCA terminates after one exact solve); RZF starts near zero.
inline ModelSolution baseline_pa(const LinearPrecoderSet& set, const ChannelSet& ch,
                                 const Weights& w, double p_total, double sigma2,
                                 CsiMode csi = CsiMode::kPerfect, const ScaOptions& opt = {}) {
  if (set.scheme == Scheme::kBdRsma) throw ValidationError("use bd_rsma_pa for BD_RSMA");
  RateModel m = linear_model(ch, set, w, p_total, sigma2, csi, false);
  const double frac = set.scheme == Scheme::kRzf ? 1e-6 : 1.0;
  ScaState st = sca_run(m, equal_power_blocks(m, frac), opt);
  return finish_solution(ch, std::move(m), std::move(st), w, sigma2);
}

struct BdRsmaSolution {
  ModelSolution relaxed;   // Q_c unconstrained in rank
  ModelSolution feasible;  // Q_c restricted to `common_rank` columns
};

/// BD private precoders plus a common message. The relaxed problem starts at
/// the BD power allocation with Q_c = 0 (or at `start` when given); Q_c is then
/// restricted to its dominant `common_rank` eigenvectors (M for the MIMO
/// common message, 1 for the single-stream one) and reoptimized.
inline BdRsmaSolution bd_rsma_pa(const LinearPrecoderSet& set, const ChannelSet& ch,
                                 const Weights& w, double p_total, double sigma2, CsiMode csi,
                                 Index common_rank, const ScaOptions& opt = {},
                                 const Blocks* start = nullptr) {
  LinearPrecoderSet priv = set;
  priv.scheme = Scheme::kBd;
  const ModelSolution bd = baseline_pa(priv, ch, w, p_total, sigma2, csi, opt);
  RateModel m = linear_model(ch, set, w, p_total, sigma2, csi, true);
  Blocks init = m.zeros();
  if (start != nullptr) {
    init = *start;
  } else {
    for (size_t k = 0; k < m.user_var.size(); ++k) {
      init[static_cast<size_t>(m.user_var[k])] = bd.state.expansion[k];
    }
  }
  BdRsmaSolution out;
  ScaState st = sca_run(m, init, opt);
  std::vector<CMatrix> u(m.vars.size());
  u[static_cast<size_t>(m.common_var)] =
      top_eigvecs(PsdMatrix(st.expansion[static_cast<size_t>(m.common_var)]), common_rank);
  Blocks y = st.expansion;
  RateModel reduced = reduce_model(m, u, &y);
  out.relaxed = finish_solution(ch, std::move(m), std::move(st), w, sigma2);
  ScaState st2 = sca_run(reduced, y, opt);
  out.feasible = finish_solution(ch, std::move(reduced), std::move(st2), w, sigma2);
  return out;
}

/// True when the weights make the BD + common-message relaxation concave:
/// equal eta_k and sum_k eta_k eta_{c,k} equal to that common eta.
inline bool upper_bound_is_concave(const Weights& w) {
  const double e = w.eta.front();
  for (double x : w.eta) {
    if (std::abs(x - e) > 1e-12) return false;
  }
  return std::abs(w.common_coefficient() - e) <= 1e-12;
}

/// Concave form of the BD + MIMO common-message WSR with Q_c rank relaxed
/// (equal weights): eta * min_j [log det(I + H_j (Q_c + Q_j) H_j^H)
///                              + sum_{k != j} log det(I + H_k Q_k H_k^H)].
inline ConcaveProgram upper_bound_program(const RateModel& m) {
  ConcaveProgram p;
  p.vars = m.vars;
  p.budget = m.budget;
  p.min_weight = m.eta.front();
  const Index k_users = m.num_users();
  for (Index j = 0; j < k_users; ++j) {
    ConcaveExpr e;
    for (Index k = 0; k < k_users; ++k) {
      const int v = m.user_var[static_cast<size_t>(k)];
      LogDetTerm t;
      t.rows = m.rx_dims[static_cast<size_t>(k)];
      t.maps.emplace_back(v, m.maps[static_cast<size_t>(k)][static_cast<size_t>(v)]);
      if (k == j) {
        t.maps.emplace_back(m.common_var,
                            m.maps[static_cast<size_t>(k)][static_cast<size_t>(m.common_var)]);
      }
      e.logdets.push_back(std::move(t));
    }
    p.min_terms.push_back(std::move(e));
  }
  return p;
}

struct UpperBoundSolution {
  double value = 0.0;  // bits
  bool concave = true;  // false: weights forced the SCA fallback
  ModelSolution solution;
  ModelSolution bd;     // the BD solution the bound was started from
  InnerSolution inner;
};

/// BD + MIMO-CM upper bound. For equal weights the relaxation is concave and
/// solved directly from the BD allocation; otherwise the relaxed BD_RSMA SCA
/// value is returned with `concave = false`.
inline UpperBoundSolution bd_mimo_cm_upper_bound(const ChannelSet& ch, const Weights& w,
                                                 double p_total, double sigma2, CsiMode csi,
                                                 const ScaOptions& opt = {}) {
  const bool est = csi == CsiMode::kEstimated;
  const LinearPrecoderSet set = bd_rsma_structure(ch, est);
  LinearPrecoderSet priv = set;
  priv.scheme = Scheme::kBd;
  UpperBoundSolution out;
  out.bd = baseline_pa(priv, ch, w, p_total, sigma2, csi, opt);
  RateModel m = linear_model(ch, set, w, p_total, sigma2, csi, true);
  if (!upper_bound_is_concave(w)) {
    out.concave = false;
    BdRsmaSolution r = bd_rsma_pa(set, ch, w, p_total, sigma2, csi, set.common_streams, opt);
    out.value = r.relaxed.objective;
    out.solution = std::move(r.relaxed);
    return out;
  }
  Blocks init = m.zeros();
  for (size_t k = 0; k < m.user_var.size(); ++k) {
    init[static_cast<size_t>(m.user_var[k])] = out.bd.state.expansion[k];
  }
  InnerOptions inner = opt.inner;
  inner.max_iterations = std::max(inner.max_iterations, 20000);
  inner.round_iterations = std::max(inner.round_iterations, 4000);
  out.inner = solve_inner(upper_bound_program(m), init, inner);
  out.value = out.inner.value / kLn2;
  ScaState st;
  st.expansion = out.inner.y;
  st.value = out.value;
  st.converged = out.inner.converged;
  out.solution = finish_solution(ch, std::move(m), std::move(st), w, sigma2);
  return out;
}

}  // namespace sns
