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

// Closed-form baseline precoding directions: (regularized) zero forcing, block
// diagonalization and the block-diagonalization structure used with a common
// message. Power allocation is left to the optimizer.

#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "sns/channel.hpp"
#include "sns/numerics.hpp"

namespace sns {

enum class Scheme { kZf, kRzf, kBd, kBdRsma };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::kZf: return "ZF";
    case Scheme::kRzf: return "RZF";
    case Scheme::kBd: return "BD";
    case Scheme::kBdRsma: return "BD_RSMA";
  }
  return "?";
}

/// Per-user precoding directions (N x M_k). For ZF/RZF the columns have unit
/// norm; for BD they are orthonormal (Psi_k^BD V_k^BD). The per-stream powers
/// are applied on top: P_k = directions_k * D_k^{1/2}.
struct LinearPrecoderSet {
  Scheme scheme = Scheme::kZf;
  std::vector<CMatrix> directions;
  std::vector<CMatrix> detectors;      // BD: (U_k^BD)^H
  std::vector<RVector> singular_values;  // BD: diag of Sigma_k^BD, descending
  std::vector<CMatrix> bd_null_basis;    // BD: Psi_k^BD
  Index common_streams = 0;              // M = min_k M_k when a common slot exists
  double alpha = 0.0;

  Index num_users() const { return static_cast<Index>(directions.size()); }

  /// P_k for diagonal powers `powers[k]` (length M_k each).
  std::vector<CMatrix> apply_powers(const std::vector<RVector>& powers) const {
    std::vector<CMatrix> p;
    for (size_t k = 0; k < directions.size(); ++k) {
      p.push_back(directions[k] * powers[k].cwiseMax(0.0).cwiseSqrt().asDiagonal());
    }
    return p;
  }

  static double total_power(const std::vector<CMatrix>& p, const std::optional<CMatrix>& pc) {
    double t = pc ? pc->squaredNorm() : 0.0;
    for (const auto& pk : p) t += pk.squaredNorm();
    return t;
  }
};

inline CMatrix stacked_channel(const ChannelSet& ch, bool estimated) {
  std::vector<CMatrix> blocks;
  for (Index k = 0; k < ch.num_users(); ++k) blocks.push_back(ch.fading(k, estimated));
  return vstack(blocks, ch.num_tx);
}

/// RZF directions H^H (H H^H + alpha I)^{-1}, columns normalized to unit norm.
/// alpha = 0 is ZF.
inline LinearPrecoderSet rzf_directions(const ChannelSet& ch, double alpha, bool estimated = false) {
  if (!(alpha >= 0.0)) throw ValidationError("RZF regularization must be nonnegative");
  const CMatrix h = stacked_channel(ch, estimated);
  const Index rows = h.rows();
  const CMatrix gram = h * h.adjoint() + alpha * identity(rows);
  if (alpha == 0.0 && !has_full_row_rank(h)) {
    throw Singular("H H^H is singular; zero forcing undefined");
  }
  Eigen::LLT<CMatrix> llt(hermitian_part(gram));
  if (llt.info() != Eigen::Success) throw Singular("H H^H + alpha I not invertible");
  const CMatrix dirs = h.adjoint() * llt.solve(identity(rows));
  LinearPrecoderSet set;
  set.scheme = alpha == 0.0 ? Scheme::kZf : Scheme::kRzf;
  set.alpha = alpha;
  Index col = 0;
  for (Index k = 0; k < ch.num_users(); ++k) {
    const Index m = ch.users[static_cast<size_t>(k)].antennas();
    CMatrix d = dirs.middleCols(col, m);
    for (Index j = 0; j < m; ++j) {
      const double nrm = d.col(j).norm();
      if (!(nrm > 0.0)) throw Singular("zero-norm precoding direction");
      d.col(j) /= nrm;
    }
    set.directions.push_back(d);
    col += m;
  }
  return set;
}

/// RZF regularization maximizing the received SNR: sum_k M_k sigma2 / P_T.
inline double rzf_alpha(const ChannelSet& ch, double sigma2, double p_total) {
  return static_cast<double>(ch.total_rx()) * sigma2 / p_total;
}

/// Block diagonalization: Psi_k^BD spans the null space of all other users'
/// channels; H_k Psi_k^BD = U Sigma V^H gives directions Psi_k^BD V.
inline LinearPrecoderSet bd_precoder(const ChannelSet& ch, bool estimated = false) {
  const Index k_users = ch.num_users();
  if (ch.total_rx() > ch.num_tx) throw Overloaded("BD needs N >= sum M_k");
  LinearPrecoderSet set;
  set.scheme = Scheme::kBd;
  for (Index k = 0; k < k_users; ++k) {
    std::vector<CMatrix> others;
    for (Index j = 0; j < k_users; ++j) {
      if (j != k) others.push_back(ch.fading(j, estimated));
    }
    const CMatrix f = vstack(others, ch.num_tx);
    const CMatrix psi = null_space_basis(f);
    const CMatrix eff = ch.fading(k, estimated) * psi;
    Eigen::JacobiSVD<CMatrix> svd(eff, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Index m = eff.rows();
    set.bd_null_basis.push_back(psi);
    set.directions.push_back(psi * svd.matrixV().leftCols(m));
    set.detectors.push_back(svd.matrixU().adjoint());
    set.singular_values.push_back(svd.singularValues().head(m));
  }
  return set;
}

/// BD private precoders plus a free common-precoder slot with M = min_k M_k streams.
inline LinearPrecoderSet bd_rsma_structure(const ChannelSet& ch, bool estimated = false) {
  LinearPrecoderSet set = bd_precoder(ch, estimated);
  set.scheme = Scheme::kBdRsma;
  const auto m = ch.antennas();
  set.common_streams = *std::min_element(m.begin(), m.end());
  return set;
}

}  // namespace sns
