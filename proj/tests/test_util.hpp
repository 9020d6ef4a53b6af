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

// Random test fixtures and independent oracles.

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sns/channel.hpp"
#include "sns/numerics.hpp"
#include "sns/rsma.hpp"

namespace sns::test {

inline CMatrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  CMatrix a(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) a(i, j) = Complex(nd(rng), nd(rng)) / std::sqrt(2.0);
  }
  return a;
}

inline CMatrix random_unitary(Index n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<CMatrix> qr(random_matrix(n, n, rng));
  return qr.householderQ() * CMatrix::Identity(n, n);
}

/// Random PSD matrix G G^H with G n x r, scaled to trace `tr`.
inline CMatrix random_psd(Index n, Index r, double tr, std::mt19937_64& rng) {
  if (n == 0) return CMatrix::Zero(0, 0);
  const CMatrix g = random_matrix(n, r, rng);
  CMatrix x = g * g.adjoint();
  return x * (tr / x.trace().real());
}

/// SVD-based null space: right singular vectors of the zero singular values.
inline CMatrix svd_null_space(const CMatrix& a) {
  const Index n = a.cols();
  if (a.rows() == 0) return CMatrix::Identity(n, n);
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(n - a.rows());
}

/// log2 det(I + S Omega^{-1}) by explicit inverse and LU determinant.
inline double naive_rate(const CMatrix& h, double l, double sigma2, const CMatrix& q_sig,
                         const CMatrix& q_int) {
  const Index m = h.rows();
  const CMatrix omega = sigma2 * CMatrix::Identity(m, m) + h * q_int * h.adjoint() / l;
  const CMatrix s = h * q_sig * h.adjoint() / l;
  const CMatrix t = CMatrix::Identity(m, m) + s * omega.inverse();
  return std::log2(std::abs(t.determinant()));
}

/// Random channel set with random path losses in [1, 4] and estimates.
inline ChannelSet random_channels(const std::vector<Index>& m, Index n, double mu,
                                  std::uint64_t seed) {
  std::vector<UserGeometry> g;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(1.0, 2.0);
  for (Index mk : m) g.push_back({d(rng), 0.0, mk});
  return draw_iid_gaussian(g, n, std::vector<double>(m.size(), mu), seed);
}

}  // namespace sns::test
