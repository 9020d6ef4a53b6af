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

// Accelerated projected-gradient ascent for ConcaveProgram.
//
// Variables are scaled by the budget so the feasible set is
// {PSD blocks, total trace <= 1}. The min over users is written in epigraph
// form (t <= g_k) and handled by an augmented Lagrangian; the epigraph level
// t is eliminated in closed form. The iterate with the best exact objective
// is returned, so the result is never worse than the starting point.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sns/program.hpp"

namespace sns {

struct InnerOptions {
  int max_iterations = 8000;
  int round_iterations = 1000;  // projected-gradient iterations per multiplier update
  int max_rounds = 40;
  double tolerance = 1e-6;  // gradient-mapping norm relative to 1 + |objective|
  double rho = 1.0;         // initial penalty, 1/nats
  std::vector<double> multipliers;  // warm start for the epigraph multipliers
};

struct InnerSolution {
  Blocks y;
  double value = 0.0;        // exact objective, nats
  double start_value = 0.0;  // exact objective at the (projected) warm start
  int iterations = 0;
  int rounds = 0;
  bool converged = false;
  std::vector<double> multipliers;
  // KKT diagnostics, scaled units
  double stationarity = 0.0;      // gradient-mapping norm of the Lagrangian
  double feasibility = 0.0;       // trace excess over the budget, relative
  double complementarity = 0.0;   // nu * budget slack, relative
  double epigraph_gap = 0.0;      // sum_k lambda_k (g_k - min g), nats
};

namespace detail {

struct Scaled {
  const ConcaveProgram& p;
  double budget;

  Blocks to_actual(const Blocks& x) const {
    Blocks y = x;
    for (auto& b : y) b *= budget;
    return y;
  }
  ProgramValue eval(const Blocks& x, const MinPenalty& pen, Blocks* grad) const {
    const ProgramValue v = evaluate_program(p, to_actual(x), pen, grad);
    if (grad != nullptr) {
      for (auto& g : *grad) g *= budget;
    }
    return v;
  }
};

inline Blocks axpy(const Blocks& x, double a, const Blocks& d) {
  Blocks out = x;
  for (size_t j = 0; j < out.size(); ++j) out[j] += a * d[j];
  return out;
}

inline Blocks diff(const Blocks& a, const Blocks& b) { return axpy(a, -1.0, b); }

}  // namespace detail

/// Maximizes `p` starting from `start` (actual units; projected if infeasible).
inline InnerSolution solve_inner(const ConcaveProgram& p, const Blocks& start,
                                 const InnerOptions& opt = {}) {
  if (start.size() != p.vars.size()) throw DimensionError("warm start has wrong block count");
  for (size_t j = 0; j < start.size(); ++j) {
    if (start[j].rows() != p.vars[j].dim || start[j].cols() != p.vars[j].dim) {
      throw DimensionError("warm start block has wrong size");
    }
  }
  const bool has_min = !p.min_terms.empty() && p.min_weight > 0.0;
  MinPenalty pen;
  pen.rho = opt.rho;
  if (has_min) {
    const size_t k = p.min_terms.size();
    pen.lambda = opt.multipliers;
    double s = 0.0;
    for (double l : pen.lambda) s += l;
    if (pen.lambda.size() != k || !(s > 0.0)) {
      pen.lambda.assign(k, p.min_weight / static_cast<double>(k));
    } else {
      for (double& l : pen.lambda) l *= p.min_weight / s;
    }
  }

  InnerSolution sol;
  if (!(p.budget > 0.0)) {
    sol.y = p.zeros();
    sol.value = evaluate_program(p, sol.y, pen, nullptr).exact;
    sol.start_value = sol.value;
    sol.multipliers = pen.lambda;
    sol.converged = true;
    return sol;
  }
  const detail::Scaled f{p, p.budget};
  Blocks x0 = start;
  for (auto& b : x0) b /= p.budget;
  Blocks x = project_feasible(p, x0, 1.0);

  Blocks best = x;
  double best_val = f.eval(x, pen, nullptr).exact;
  sol.start_value = best_val;
  double step = 1.0;
  int iters = 0;
  bool converged = false;
  double prev_viol = std::numeric_limits<double>::infinity();

  for (int round = 0; round < opt.max_rounds && iters < opt.max_iterations; ++round) {
    ++sol.rounds;
    double fx = f.eval(x, pen, nullptr).smooth;
    Blocks y = x;
    double t = 1.0;
    bool inner_done = false;
    for (int k = 0; k < opt.round_iterations && iters < opt.max_iterations; ++k, ++iters) {
      Blocks gy;
      const double fy = f.eval(y, pen, &gy).smooth;
      step *= 1.25;
      Blocks xn;
      ProgramValue vn;
      Blocks d;
      for (int bt = 0; bt < 60; ++bt) {
        xn = project_feasible(p, detail::axpy(y, step, gy), 1.0);
        d = detail::diff(xn, y);
        vn = f.eval(xn, pen, nullptr);
        const double model = fy + inner_product(gy, d) - squared_norm(d) / (2.0 * step);
        if (vn.smooth >= model - 1e-14 * (1.0 + std::abs(fy))) break;
        step *= 0.5;
      }
      if (vn.exact > best_val) {
        best_val = vn.exact;
        best = xn;
      }
      const double gm = std::sqrt(squared_norm(d)) / step;
      if (vn.smooth < fx) {
        // function-value restart: discard momentum and step from x
        t = 1.0;
        y = x;
        continue;
      }
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      const Blocks dx = detail::diff(xn, x);
      y = detail::axpy(xn, (t - 1.0) / tn, dx);
      x = std::move(xn);
      fx = vn.smooth;
      t = tn;
      if (gm <= opt.tolerance * (1.0 + std::abs(fx))) {
        inner_done = true;
        break;
      }
    }
    if (!has_min) {
      converged = inner_done;
      break;
    }
    const ProgramValue v = f.eval(x, pen, nullptr);
    const double viol = std::max(0.0, v.t - v.min_value);
    double dual = 0.0;
    for (size_t i = 0; i < v.multipliers.size(); ++i) {
      dual = std::max(dual, std::abs(v.multipliers[i] - pen.lambda[i]));
    }
    pen.lambda = v.multipliers;
    const double scale = opt.tolerance * (1.0 + std::abs(v.exact));
    if (inner_done && viol <= scale && dual <= scale * (1.0 + pen.rho)) {
      converged = true;
      break;
    }
    if (viol > 0.25 * prev_viol) pen.rho = std::min(pen.rho * 4.0, 1e8);
    prev_viol = viol;
  }

  // diagnostics at the returned point, on the Lagrangian with the final multipliers
  Blocks g;
  const ProgramValue vb = f.eval(best, pen, &g);
  if (has_min) {
    // gradient of sum_i w_i e_i + sum_k lambda_k g_k
    evaluate_program(ConcaveProgram{p.vars, p.budget, p.sum_terms, 0.0, {}}, f.to_actual(best),
                     pen, &g);
    for (size_t i = 0; i < p.min_terms.size(); ++i) {
      Blocks gi = p.zeros();
      detail::eval_expr(p.min_terms[i], f.to_actual(best), pen.lambda[i], &gi);
      for (size_t j = 0; j < g.size(); ++j) g[j] += hermitian_part(gi[j]);
    }
    for (size_t j = 0; j < g.size(); ++j) {
      if (p.vars[j].diagonal) g[j] = CMatrix(g[j].diagonal().real().cast<Complex>().asDiagonal());
      g[j] *= p.budget;
    }
    double gap = 0.0;
    for (size_t i = 0; i < vb.min_terms.size(); ++i) {
      gap += pen.lambda[i] * (vb.min_terms[i] - vb.min_value);
    }
    sol.epigraph_gap = gap;
  }
  const Blocks xp = project_feasible(p, detail::axpy(best, step, g), 1.0);
  sol.stationarity = std::sqrt(squared_norm(detail::diff(xp, best))) / step;
  double nu = 0.0;
  for (size_t j = 0; j < g.size(); ++j) {
    if (p.vars[j].dim == 0) continue;
    if (p.vars[j].diagonal) {
      nu = std::max(nu, g[j].diagonal().real().maxCoeff());
    } else {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(g[j], Eigen::EigenvaluesOnly);
      nu = std::max(nu, es.eigenvalues().maxCoeff());
    }
  }
  const double tr = total_trace(best);
  sol.feasibility = std::max(0.0, tr - 1.0);
  sol.complementarity = nu * std::max(0.0, 1.0 - tr);
  sol.y = f.to_actual(best);
  sol.value = best_val;
  sol.iterations = iters;
  sol.multipliers = pen.lambda;
  sol.converged = converged;
  return sol;
}

}  // namespace sns
