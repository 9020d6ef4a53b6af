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

// Dense complex linear-algebra primitives shared by every other module:
// null spaces, PSD factors, spectral quantities and log-determinants.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "sns/errors.hpp"

namespace sns {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative threshold for numerical rank decisions.
inline constexpr double kRankTol = 1e-10;
/// Eigenvalues below -kPsdTol * lambda_max are treated as genuine indefiniteness.
inline constexpr double kPsdTol = 1e-9;

inline bool all_finite(const CMatrix& a) {
  return a.size() == 0 || a.allFinite();
}

inline CMatrix hermitian_part(const CMatrix& a) {
  return 0.5 * (a + a.adjoint());
}

inline CMatrix identity(Index n) { return CMatrix::Identity(n, n); }

/// Makes the first component of `v` with magnitude above `tol` real-positive.
inline void normalize_phase(Eigen::Ref<CVector> v, double tol = 1e-10) {
  for (Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > tol) {
      v *= std::conj(v(i)) / mag;
      return;
    }
  }
}

/// Hermitian positive semi-definite matrix. Construction symmetrizes the input
/// and clamps eigenvalues that fall below -kPsdTol * lambda_max to zero.
class PsdMatrix {
 public:
  PsdMatrix() = default;

  explicit PsdMatrix(const CMatrix& m) {
    if (m.rows() != m.cols()) {
      throw DimensionError("PSD matrix must be square");
    }
    if (!all_finite(m)) {
      throw NumericalFailure("PSD matrix has non-finite entries");
    }
    mat_ = hermitian_part(m);
    if (mat_.rows() == 0) return;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(mat_);
    const RVector& ev = es.eigenvalues();
    const double lmax = std::max(ev.maxCoeff(), 0.0);
    if (ev.minCoeff() < -kPsdTol * lmax || (lmax == 0.0 && ev.minCoeff() < 0.0)) {
      RVector clamped = ev.cwiseMax(0.0);
      mat_ = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().adjoint();
      mat_ = hermitian_part(mat_);
    }
  }

  static PsdMatrix zero(Index n) { return PsdMatrix(CMatrix::Zero(n, n)); }
  static PsdMatrix scaled_identity(Index n, double s) {
    return PsdMatrix(CMatrix(s * identity(n)));
  }

  Index dim() const { return mat_.rows(); }
  const CMatrix& matrix() const { return mat_; }
  double trace() const { return mat_.trace().real(); }

 private:
  CMatrix mat_;
};

inline RVector singular_values(const CMatrix& a) {
  if (a.size() == 0) return RVector();
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues();
}

/// Largest singular value; 0 for an empty matrix.
inline double spectral_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return singular_values(a)(0);
}

inline bool has_full_row_rank(const CMatrix& a, double tol = kRankTol) {
  if (a.rows() == 0) return true;
  if (a.rows() > a.cols()) return false;
  const RVector s = singular_values(a);
  return s(s.size() - 1) > tol * s(0);
}

namespace detail {

// Classical Gram-Schmidt with one reorthogonalization pass against `basis`.
inline double orthogonalize(Eigen::Ref<CVector> v, const std::vector<CVector>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const CVector& q : basis) v -= q * q.dot(v);
  }
  return v.norm();
}

}  // namespace detail

/// Orthonormal basis of the null space of `a` (m x n, m <= n, full row rank).
///
/// The rows of `a` are orthonormalized first; the complement is then built by
/// Gram-Schmidt over the canonical vectors e_1..e_n, greedily taking the vector
/// with the largest residual at each step. Each column is phase-normalized so
/// its first nonzero component is real-positive. m = 0 yields I_n.
inline CMatrix null_space_basis(const CMatrix& a) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (m > n) {
    throw DimensionError("null_space_basis needs rows <= cols, got " + std::to_string(m) + "x" +
                         std::to_string(n));
  }
  if (m == 0) return identity(n);
  if (!has_full_row_rank(a)) {
    throw RankDeficient("matrix is not of full row rank");
  }

  std::vector<CVector> range;
  range.reserve(static_cast<size_t>(n));
  const CMatrix ah = a.adjoint();
  for (Index j = 0; j < m; ++j) {
    CVector v = ah.col(j);
    const double nv = detail::orthogonalize(v, range);
    range.push_back(v / nv);
  }

  std::vector<CVector> complement;
  std::vector<bool> used(static_cast<size_t>(n), false);
  CMatrix psi(n, n - m);
  for (Index c = 0; c < n - m; ++c) {
    Index best = -1;
    double best_norm = -1.0;
    CVector best_vec;
    for (Index i = 0; i < n; ++i) {
      if (used[static_cast<size_t>(i)]) continue;
      CVector v = CVector::Unit(n, i);
      detail::orthogonalize(v, range);
      const double nv = detail::orthogonalize(v, complement);
      if (nv > best_norm) {
        best_norm = nv;
        best = i;
        best_vec = v;
      }
    }
    used[static_cast<size_t>(best)] = true;
    best_vec /= best_norm;
    complement.push_back(best_vec);
  }
  for (Index c = 0; c < n - m; ++c) {
    CVector col = complement[static_cast<size_t>(c)];
    normalize_phase(col);
    psi.col(c) = col;
  }
  return psi;
}

/// Moore-Penrose pseudo-inverse of a full-row-rank matrix, a^H (a a^H)^{-1}.
inline CMatrix pseudo_inverse(const CMatrix& a) {
  if (!has_full_row_rank(a)) {
    throw RankDeficient("pseudo_inverse requires full row rank");
  }
  if (a.rows() == 0) return CMatrix::Zero(a.cols(), 0);
  const CMatrix gram = a * a.adjoint();
  Eigen::LLT<CMatrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw RankDeficient("Gram matrix not positive definite");
  }
  return a.adjoint() * llt.solve(identity(a.rows()));
}

/// Null-space basis of `a` aligned with `reference` so that reference^H * result
/// is Hermitian positive definite (minimal rotation between the two subspaces).
/// `reference` must be an orthonormal basis of a subspace of the same dimension.
inline CMatrix aligned_null_space_basis(const CMatrix& a, const CMatrix& reference) {
  const Index n = a.cols();
  if (reference.rows() != n || reference.cols() != n - a.rows()) {
    throw DimensionError("reference basis has wrong shape for aligned null space");
  }
  if (a.rows() == 0) return reference;
  const CMatrix projector = identity(n) - pseudo_inverse(a) * a;
  const CMatrix y = projector * reference;
  const CMatrix w = hermitian_part(y.adjoint() * y);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(w);
  const RVector& ev = es.eigenvalues();
  if (ev.size() > 0 && ev(0) <= 1e-12 * std::max(1.0, ev(ev.size() - 1))) {
    throw NumericalFailure("subspaces are (near) orthogonal; alignment undefined");
  }
  const CMatrix inv_sqrt =
      es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
  return y * inv_sqrt;
}

/// Best rank-r factor F (n x r) with F F^H approximating X: truncated
/// eigendecomposition with descending eigenvalues, negatives clamped to zero.
inline CMatrix psd_sqrt_factor(const PsdMatrix& x, Index r) {
  const Index n = x.dim();
  if (r > n || r < 0) throw DimensionError("psd_sqrt_factor target rank exceeds dimension");
  if (n == 0) return CMatrix::Zero(0, r);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(x.matrix());
  CMatrix f(n, r);
  for (Index j = 0; j < r; ++j) {
    const Index src = n - 1 - j;
    const double lambda = std::max(es.eigenvalues()(src), 0.0);
    CVector v = es.eigenvectors().col(src);
    normalize_phase(v);
    f.col(j) = std::sqrt(lambda) * v;
  }
  return f;
}

/// Eigenvectors for the r largest eigenvalues, descending. Each column's first
/// nonzero component is made real-positive. The eigenvectors of a zero matrix
/// are zero vectors.
inline CMatrix top_eigvecs(const PsdMatrix& x, Index r) {
  const Index n = x.dim();
  if (r > n || r < 0) throw DimensionError("top_eigvecs count exceeds dimension");
  CMatrix u = CMatrix::Zero(n, r);
  if (n == 0 || r == 0) return u;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(x.matrix());
  if (es.eigenvalues()(n - 1) <= std::numeric_limits<double>::min()) return u;
  for (Index j = 0; j < r; ++j) {
    CVector v = es.eigenvectors().col(n - 1 - j);
    normalize_phase(v);
    u.col(j) = v;
  }
  return u;
}

/// Number of eigenvalues strictly greater than `threshold`.
inline Index eigen_count_above(const PsdMatrix& x, double threshold) {
  if (x.dim() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(x.matrix(), Eigen::EigenvaluesOnly);
  return (es.eigenvalues().array() > threshold).count();
}

/// log det of a Hermitian positive-definite matrix via Cholesky (natural log).
inline double log_det_hpd(const CMatrix& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::LLT<CMatrix> llt(hermitian_part(a));
  if (llt.info() != Eigen::Success) {
    throw NumericalFailure("matrix is not positive definite");
  }
  const CMatrix& l = llt.matrixLLT();
  double acc = 0.0;
  for (Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i).real());
  return 2.0 * acc;
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
inline CMatrix inverse_hpd(const CMatrix& a) {
  Eigen::LLT<CMatrix> llt(hermitian_part(a));
  if (llt.info() != Eigen::Success) {
    throw NumericalFailure("matrix is not positive definite");
  }
  return hermitian_part(llt.solve(identity(a.rows())));
}

/// Largest principal angle (radians) between the column spans of two matrices
/// with orthonormal columns.
inline double subspace_angle(const CMatrix& a, const CMatrix& b) {
  if (a.cols() == 0 && b.cols() == 0) return 0.0;
  // sin of the largest angle = || (I - A A^H) B ||
  const CMatrix resid = b - a * (a.adjoint() * b);
  const double s = std::min(1.0, spectral_norm(resid));
  return std::asin(s);
}

/// Vertically stacks the given blocks (all with the same number of columns).
inline CMatrix vstack(const std::vector<CMatrix>& blocks, Index cols) {
  Index rows = 0;
  for (const auto& b : blocks) rows += b.rows();
  CMatrix out(rows, cols);
  Index r = 0;
  for (const auto& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

}  // namespace sns
