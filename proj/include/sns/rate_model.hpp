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

// Weighted-sum-rate model shared by every precoding scheme.
//
// Each optimization block Y_j maps to the transmit covariance W_j Y_j W_j^H.
// A rate of user k is
//   log det(I + sum_{j in S u I} B_kj Y_j B_kj^H) - log det(I + sum_{j in I} B_kj Y_j B_kj^H)
// with B_kj = H_k W_j / sqrt(L_k sigma2), S the signal blocks and I the
// interfering blocks. The surrogate keeps the first term and linearizes the
// second at the expansion point.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sns/channel.hpp"
#include "sns/program.hpp"
#include "sns/rsma.hpp"

namespace sns {

struct RateSpec {
  std::vector<int> signal;
  std::vector<int> interference;
};

struct RateModel {
  std::vector<VarSpec> vars;
  std::vector<CMatrix> basis;              // W_j, N x dim_j
  std::vector<std::vector<CMatrix>> maps;  // maps[k][j] = rx_k W_j
  std::vector<Index> rx_dims;
  std::vector<RateSpec> priv;
  std::vector<RateSpec> common;  // empty without a common message
  std::vector<double> eta;
  double common_weight = 0.0;
  double budget = 0.0;
  int common_var = -1;
  std::vector<int> user_var;

  Index num_users() const { return static_cast<Index>(priv.size()); }
  bool has_common() const { return !common.empty(); }

  /// rx[k] = H_k / sqrt(L_k sigma2) on the channel the optimizer sees.
  void set_receivers(const std::vector<CMatrix>& rx) {
    maps.assign(rx.size(), {});
    rx_dims.clear();
    for (size_t k = 0; k < rx.size(); ++k) {
      rx_dims.push_back(rx[k].rows());
      for (const auto& w : basis) maps[k].push_back(rx[k] * w);
    }
  }

  Blocks zeros() const {
    Blocks z;
    for (const auto& v : vars) z.push_back(CMatrix::Zero(v.dim, v.dim));
    return z;
  }
};

/// Normalized receive matrices H_k / sqrt(L_k sigma2).
inline std::vector<CMatrix> normalized_receivers(const ChannelSet& ch, double sigma2,
                                                 bool estimated) {
  std::vector<CMatrix> rx;
  for (Index k = 0; k < ch.num_users(); ++k) {
    const auto& u = ch.users[static_cast<size_t>(k)];
    rx.push_back(ch.fading(k, estimated) / std::sqrt(u.path_loss * sigma2));
  }
  return rx;
}

namespace detail {

inline CMatrix rx_covariance(const RateModel& m, Index k, const std::vector<int>& vars,
                             const Blocks& y) {
  CMatrix c = identity(m.rx_dims[static_cast<size_t>(k)]);
  for (int j : vars) {
    const CMatrix& b = m.maps[static_cast<size_t>(k)][static_cast<size_t>(j)];
    c.noalias() += b * y[static_cast<size_t>(j)] * b.adjoint();
  }
  return c;
}

inline std::vector<int> merged(const RateSpec& s) {
  std::vector<int> v = s.signal;
  v.insert(v.end(), s.interference.begin(), s.interference.end());
  return v;
}

}  // namespace detail

/// Exact rate in nats.
inline double rate_nats(const RateModel& m, Index k, const RateSpec& s, const Blocks& y) {
  const double joint = log_det_hpd(detail::rx_covariance(m, k, detail::merged(s), y));
  if (s.interference.empty()) return joint;
  return joint - log_det_hpd(detail::rx_covariance(m, k, s.interference, y));
}

struct ModelRates {
  std::vector<double> private_rates;  // bits
  std::vector<double> common_rates;   // bits
  double common_rate = 0.0;
  double wsr = 0.0;
};

inline ModelRates model_rates(const RateModel& m, const Blocks& y) {
  ModelRates r;
  for (Index k = 0; k < m.num_users(); ++k) {
    r.private_rates.push_back(rate_nats(m, k, m.priv[static_cast<size_t>(k)], y) / kLn2);
    r.wsr += m.eta[static_cast<size_t>(k)] * r.private_rates.back();
  }
  if (m.has_common()) {
    for (Index k = 0; k < m.num_users(); ++k) {
      r.common_rates.push_back(rate_nats(m, k, m.common[static_cast<size_t>(k)], y) / kLn2);
    }
    r.common_rate = *std::min_element(r.common_rates.begin(), r.common_rates.end());
    r.wsr += m.common_weight * r.common_rate;
  } else {
    r.common_rates.assign(static_cast<size_t>(m.num_users()), 0.0);
  }
  return r;
}

/// WSR of the model in bits.
inline double model_objective(const RateModel& m, const Blocks& y) { return model_rates(m, y).wsr; }

namespace detail {

inline ConcaveExpr rate_surrogate(const RateModel& m, Index k, const RateSpec& s, const Blocks& y0) {
  ConcaveExpr e;
  LogDetTerm joint;
  joint.rows = m.rx_dims[static_cast<size_t>(k)];
  for (int j : merged(s)) {
    joint.maps.emplace_back(j, m.maps[static_cast<size_t>(k)][static_cast<size_t>(j)]);
  }
  e.logdets.push_back(std::move(joint));
  if (s.interference.empty()) return e;
  const CMatrix c = rx_covariance(m, k, s.interference, y0);
  Eigen::LLT<CMatrix> llt(hermitian_part(c));
  if (llt.info() != Eigen::Success) throw NumericalFailure("interference covariance not positive definite");
  e.constant -= log_det_hpd(c);
  for (int j : s.interference) {
    const CMatrix& b = m.maps[static_cast<size_t>(k)][static_cast<size_t>(j)];
    CMatrix g = hermitian_part(b.adjoint() * llt.solve(b));
    if (m.vars[static_cast<size_t>(j)].diagonal) {
      g = CMatrix(g.diagonal().real().cast<Complex>().asDiagonal());
    }
    e.constant += (g.adjoint() * y0[static_cast<size_t>(j)]).trace().real();
    e.linear.emplace_back(j, -g);
  }
  return e;
}

}  // namespace detail

/// Concave minorant of the WSR (nats) that is tight at `y0`.
inline ConcaveProgram surrogate_program(const RateModel& m, const Blocks& y0) {
  if (y0.size() != m.vars.size()) throw DimensionError("expansion point has wrong block count");
  ConcaveProgram p;
  p.vars = m.vars;
  p.budget = m.budget;
  for (Index k = 0; k < m.num_users(); ++k) {
    p.sum_terms.emplace_back(m.eta[static_cast<size_t>(k)],
                             detail::rate_surrogate(m, k, m.priv[static_cast<size_t>(k)], y0));
  }
  if (m.has_common()) {
    p.min_weight = m.common_weight;
    for (Index k = 0; k < m.num_users(); ++k) {
      p.min_terms.push_back(detail::rate_surrogate(m, k, m.common[static_cast<size_t>(k)], y0));
    }
  }
  return p;
}

/// Transmit covariances W_j Y_j W_j^H of a model solution.
inline TransmitCovariances model_transmit(const RateModel& m, const Blocks& y, Index n) {
  TransmitCovariances t;
  auto cov = [&](int j) -> CMatrix {
    if (j < 0) return CMatrix::Zero(n, n);
    const CMatrix& w = m.basis[static_cast<size_t>(j)];
    return hermitian_part(w * y[static_cast<size_t>(j)] * w.adjoint());
  };
  t.q_c = cov(m.common_var);
  for (int j : m.user_var) t.q.push_back(cov(j));
  return t;
}

}  // namespace sns
