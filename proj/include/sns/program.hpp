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

// Concave log-det programs over PSD blocks with a shared trace budget, and
// the first-order expansion of log det(I + A X A^H).
//
// A program maximizes
//   sum_i w_i e_i(Y) + c * min_k g_k(Y),  c >= 0
// where each expression is a constant plus log-det terms
// log det(I + sum_j B_j Y_j B_j^H) plus linear terms Re tr(G_j Y_j).
// All values are in nats.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "sns/errors.hpp"
#include "sns/numerics.hpp"

namespace sns {

/// First-order expansion f~(Y) = value + Re tr(gradient (Y - x0)) of
/// f(Y) = log det(I + A Y A^H) at x0. Natural log.
struct FirstOrder {
  double value = 0.0;
  CMatrix gradient;  // A^H (I + A x0 A^H)^{-1} A
  CMatrix x0;

  double evaluate(const CMatrix& y) const {
    return value + (gradient.adjoint() * (y - x0)).trace().real();
  }
};

inline FirstOrder fo_logdet(const CMatrix& a, const PsdMatrix& x0) {
  if (a.cols() != x0.dim()) throw DimensionError("fo_logdet: A columns != X0 dimension");
  const Index m = a.rows();
  const CMatrix inner = identity(m) + a * x0.matrix() * a.adjoint();
  FirstOrder fo;
  fo.value = log_det_hpd(inner);
  fo.gradient = hermitian_part(a.adjoint() * inverse_hpd(inner) * a);
  fo.x0 = x0.matrix();
  return fo;
}

/// One optimization block: a PSD matrix, or a nonnegative diagonal matrix.
struct VarSpec {
  Index dim = 0;
  bool diagonal = false;
};

using Blocks = std::vector<CMatrix>;

/// log det(I + sum_j B_j Y_j B_j^H).
struct LogDetTerm {
  Index rows = 0;
  std::vector<std::pair<int, CMatrix>> maps;
};

struct ConcaveExpr {
  double constant = 0.0;
  std::vector<LogDetTerm> logdets;
  std::vector<std::pair<int, CMatrix>> linear;  // Re tr(G_j Y_j), G_j Hermitian
};

struct ConcaveProgram {
  std::vector<VarSpec> vars;
  double budget = 0.0;
  std::vector<std::pair<double, ConcaveExpr>> sum_terms;
  double min_weight = 0.0;
  std::vector<ConcaveExpr> min_terms;

  Blocks zeros() const {
    Blocks z;
    for (const auto& v : vars) z.push_back(CMatrix::Zero(v.dim, v.dim));
    return z;
  }
};

inline double total_trace(const Blocks& y) {
  double t = 0.0;
  for (const auto& b : y) t += b.trace().real();
  return t;
}

inline double inner_product(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (size_t j = 0; j < a.size(); ++j) {
    s += (a[j].array().conjugate() * b[j].array()).sum().real();
  }
  return s;
}

inline double squared_norm(const Blocks& a) {
  double s = 0.0;
  for (const auto& b : a) s += b.squaredNorm();
  return s;
}

namespace detail {

// Value of an expression and, optionally, accumulation of coef * gradient.
inline double eval_expr(const ConcaveExpr& e, const Blocks& y, double coef, Blocks* grad) {
  double v = e.constant;
  for (const auto& term : e.logdets) {
    CMatrix m = identity(term.rows);
    for (const auto& [j, b] : term.maps) m.noalias() += b * y[static_cast<size_t>(j)] * b.adjoint();
    Eigen::LLT<CMatrix> llt(hermitian_part(m));
    if (llt.info() != Eigen::Success) throw NumericalFailure("log-det argument not positive definite");
    const CMatrix& l = llt.matrixLLT();
    double acc = 0.0;
    for (Index i = 0; i < term.rows; ++i) acc += std::log(l(i, i).real());
    v += 2.0 * acc;
    if (grad != nullptr) {
      for (const auto& [j, b] : term.maps) {
        const CMatrix s = llt.solve(b);
        (*grad)[static_cast<size_t>(j)].noalias() += coef * (b.adjoint() * s);
      }
    }
  }
  for (const auto& [j, g] : e.linear) {
    v += (g.adjoint() * y[static_cast<size_t>(j)]).trace().real();
    if (grad != nullptr) (*grad)[static_cast<size_t>(j)] += coef * g;
  }
  return v;
}

}  // namespace detail

/// Augmented-Lagrangian treatment of the epigraph form of the min term:
/// maximize c t subject to t <= g_k, with multipliers lambda_k (summing to c)
/// and penalty rho > 0. For fixed Y the optimal t is found in closed form.
struct MinPenalty {
  std::vector<double> lambda;
  double rho = 1.0;
};

struct ProgramValue {
  double exact = 0.0;   // with the true min
  double smooth = 0.0;  // augmented Lagrangian with t eliminated
  double min_value = 0.0;
  std::vector<double> min_terms;
  std::vector<double> multipliers;  // first-order multiplier update
  double t = 0.0;
};

namespace detail {

// Solves sum_k max(0, a_k + rho t) = c for t (c > 0, rho > 0).
inline double epigraph_level(const std::vector<double>& a, double rho, double c) {
  std::vector<double> s = a;
  std::sort(s.begin(), s.end(), std::greater<double>());
  double cum = 0.0;
  for (size_t j = 0; j < s.size(); ++j) {
    cum += s[j];
    const double t = (c - cum) / (rho * static_cast<double>(j + 1));
    if (j + 1 == s.size() || s[j + 1] + rho * t <= 0.0) return t;
  }
  return 0.0;
}

}  // namespace detail

/// Evaluates the program at `y`. The smooth value replaces c * min_k g_k by
/// max_t [c t - (1 / 2 rho) sum_k (max(0, lambda_k - rho (g_k - t))^2 - lambda_k^2)];
/// `grad` receives its gradient.
inline ProgramValue evaluate_program(const ConcaveProgram& p, const Blocks& y,
                                     const MinPenalty& pen, Blocks* grad) {
  if (grad != nullptr) *grad = p.zeros();
  ProgramValue out;
  double sum = 0.0;
  for (const auto& [w, e] : p.sum_terms) sum += w * detail::eval_expr(e, y, w, grad);
  out.exact = sum;
  out.smooth = sum;
  if (!p.min_terms.empty() && p.min_weight > 0.0) {
    const size_t k = p.min_terms.size();
    const double c = p.min_weight;
    std::vector<Blocks> gg(k);
    out.min_terms.resize(k);
    for (size_t i = 0; i < k; ++i) {
      if (grad != nullptr) gg[i] = p.zeros();
      out.min_terms[i] =
          detail::eval_expr(p.min_terms[i], y, 1.0, grad != nullptr ? &gg[i] : nullptr);
    }
    const auto& g = out.min_terms;
    out.min_value = *std::min_element(g.begin(), g.end());
    out.exact += c * out.min_value;
    std::vector<double> lam = pen.lambda;
    if (lam.size() != k) lam.assign(k, c / static_cast<double>(k));
    const double rho = pen.rho;
    std::vector<double> a(k);
    for (size_t i = 0; i < k; ++i) a[i] = lam[i] - rho * g[i];
    const double t = detail::epigraph_level(a, rho, c);
    out.t = t;
    out.multipliers.resize(k);
    double pen_sum = 0.0;
    for (size_t i = 0; i < k; ++i) {
      const double mu = std::max(0.0, a[i] + rho * t);
      out.multipliers[i] = mu;
      pen_sum += mu * mu - lam[i] * lam[i];
    }
    out.smooth += c * t - pen_sum / (2.0 * rho);
    if (grad != nullptr) {
      for (size_t i = 0; i < k; ++i) {
        const double mu = out.multipliers[i];
        if (mu == 0.0) continue;
        for (size_t j = 0; j < grad->size(); ++j) (*grad)[j] += mu * gg[i][j];
      }
    }
  }
  if (grad != nullptr) {
    for (size_t j = 0; j < grad->size(); ++j) {
      CMatrix& gj = (*grad)[j];
      gj = hermitian_part(gj);
      if (p.vars[j].diagonal) gj = CMatrix(gj.diagonal().real().cast<Complex>().asDiagonal());
    }
  }
  return out;
}

/// Euclidean projection of v onto {x >= 0, sum x <= budget}.
inline RVector project_capped_simplex(const RVector& v, double budget) {
  RVector x = v.cwiseMax(0.0);
  if (x.sum() <= budget) return x;
  RVector s = v;
  std::sort(s.data(), s.data() + s.size(), std::greater<double>());
  double cum = 0.0;
  double theta = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    cum += s(i);
    const double t = (cum - budget) / static_cast<double>(i + 1);
    if (i + 1 == s.size() || s(i + 1) <= t) {
      theta = t;
      break;
    }
  }
  return (v.array() - theta).cwiseMax(0.0);
}

/// Projection of Hermitian blocks onto {Y_j PSD (or nonnegative diagonal),
/// sum_j tr(Y_j) <= budget}.
inline Blocks project_feasible(const ConcaveProgram& p, const Blocks& y, double budget) {
  const size_t nb = y.size();
  std::vector<CMatrix> vecs(nb);
  Index total = 0;
  for (const auto& v : p.vars) total += v.dim;
  RVector lambda(total);
  Index off = 0;
  for (size_t j = 0; j < nb; ++j) {
    const Index d = p.vars[j].dim;
    if (d == 0) continue;
    if (p.vars[j].diagonal) {
      lambda.segment(off, d) = y[j].diagonal().real();
    } else {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(y[j]));
      lambda.segment(off, d) = es.eigenvalues();
      vecs[j] = es.eigenvectors();
    }
    off += d;
  }
  const RVector proj = project_capped_simplex(lambda, budget);
  Blocks out(nb);
  off = 0;
  for (size_t j = 0; j < nb; ++j) {
    const Index d = p.vars[j].dim;
    if (d == 0) {
      out[j] = CMatrix::Zero(0, 0);
      continue;
    }
    const RVector seg = proj.segment(off, d);
    if (p.vars[j].diagonal) {
      out[j] = CMatrix(seg.cast<Complex>().asDiagonal());
    } else {
      out[j] = hermitian_part(vecs[j] * seg.cast<Complex>().asDiagonal() * vecs[j].adjoint());
    }
    off += d;
  }
  return out;
}

}  // namespace sns
