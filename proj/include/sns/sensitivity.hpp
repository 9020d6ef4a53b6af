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

// Additional inter-user interference caused by null-space bases built from
// estimated channels, and its analytical bounds.
//
// For user k (positions taken from the user order):
//   up_k   = H_k sum_{k' after k}  PsiBar_k' u_k' / sqrt(L_k)
//   down_k = H_k sum_{k' before k} (PsiBar_k' - Psi_k') u_k' / sqrt(L_k)
// with u_k' = X_k'^{1/2} s_k' of norm nu_k'. PsiBar is the deployed basis
// (Gram-Schmidt of the estimated stack); Psi is the null basis of the true
// stack aligned to it, so that Psi^H PsiBar is Hermitian positive definite.

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "sns/channel.hpp"
#include "sns/numerics.hpp"
#include "sns/rsma.hpp"

namespace sns {

struct IuiOptions {
  std::vector<double> symbol_norms;  // nu_k per user; empty means 1
  int mc_draws = 64;
  std::uint64_t seed = 1;
};

struct IuiSample {
  // indexed by user
  std::vector<double> xi_up;       // worst case over symbols with ||u_k'|| = nu_k'
  std::vector<double> xi_down;
  std::vector<double> xi_up_mc;    // mean over random symbol directions
  std::vector<double> xi_down_mc;
  std::vector<double> bound_up;
  std::vector<double> bound_down;  // natural log inside
  std::vector<double> c_norm;      // ||C_k|| of the user's own stack
  std::vector<double> delta_psi;   // ||PsiBar_k - Psi_k||
  std::vector<bool> bound_valid;   // every preceding ||C_k'|| < 1
};

/// Null bases of the true stacks, aligned to the deployed (estimated) bases.
inline SnsBasis reference_basis(const ChannelSet& ch, const SnsBasis& est) {
  if (!est.estimated) throw ValidationError("reference_basis expects an estimated-channel basis");
  if (est.num_users() != ch.num_users()) throw OrderMismatch("basis and channels differ in users");
  SnsBasis ref = build_sns_basis(ch, est.order, false);
  for (Index k = 0; k < ch.num_users(); ++k) {
    const size_t i = static_cast<size_t>(k);
    ref.psi[i] = aligned_null_space_basis(ref.f[i], est.psi[i]);
  }
  return ref;
}

namespace detail {

// max ||sum_j a_j u_j|| over ||u_j|| = nu_j: alternating ascent started from
// the dominant right singular vector of the stacked map.
inline double blockwise_worst_case(const std::vector<CMatrix>& a, const std::vector<double>& nu) {
  if (a.empty()) return 0.0;
  const Index rows = a.front().rows();
  Index cols = 0;
  for (const auto& x : a) cols += x.cols();
  if (rows == 0 || cols == 0) return 0.0;
  CMatrix stacked(rows, cols);
  Index off = 0;
  for (size_t j = 0; j < a.size(); ++j) {
    stacked.middleCols(off, a[j].cols()) = nu[j] * a[j];
    off += a[j].cols();
  }
  Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeThinV);
  const CVector v0 = svd.matrixV().col(0);
  std::vector<CVector> u(a.size());
  off = 0;
  for (size_t j = 0; j < a.size(); ++j) {
    const Index c = a[j].cols();
    CVector seg = v0.segment(off, c);
    if (seg.norm() < 1e-300) seg = CVector::Unit(c, 0);
    u[j] = c == 0 ? CVector(0) : CVector(nu[j] * seg / seg.norm());
    off += c;
  }
  auto residual = [&]() {
    CVector r = CVector::Zero(rows);
    for (size_t j = 0; j < a.size(); ++j) {
      if (a[j].cols() > 0) r += a[j] * u[j];
    }
    return r;
  };
  CVector r = residual();
  double val = r.norm();
  for (int it = 0; it < 500; ++it) {
    for (size_t j = 0; j < a.size(); ++j) {
      if (a[j].cols() == 0) continue;
      const CVector g = a[j].adjoint() * r;
      if (g.norm() > 0.0) {
        r -= a[j] * u[j];
        u[j] = nu[j] * g / g.norm();
        r += a[j] * u[j];
      }
    }
    const double nv = r.norm();
    if (nv <= val * (1.0 + 1e-14)) {
      val = std::max(val, nv);
      break;
    }
    val = nv;
  }
  return val;
}

inline CVector random_unit(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  CVector s(n);
  for (Index i = 0; i < n; ++i) s(i) = Complex(nd(rng), nd(rng));
  return s / s.norm();
}

}  // namespace detail

/// Empirical up/down interference norms. Without a pack the symbols u_k'
/// range over the whole N_k' space; with a pack they lie in range(X_k').
inline IuiSample empirical_iui(const ChannelSet& ch, const SnsBasis& ref, const SnsBasis& est,
                               const std::optional<CovariancePack>& pack = std::nullopt,
                               const IuiOptions& opt = {}) {
  const Index kn = ch.num_users();
  if (ref.order != est.order) throw OrderMismatch("bases use different user orders");
  if (ref.num_users() != kn || est.num_users() != kn) throw OrderMismatch("basis size mismatch");
  std::vector<double> nu = opt.symbol_norms;
  if (nu.empty()) nu.assign(static_cast<size_t>(kn), 1.0);
  if (static_cast<Index>(nu.size()) != kn) throw DimensionError("symbol_norms length");
  for (double x : nu) {
    if (!(x >= 0.0)) throw ValidationError("symbol norms must be nonnegative");
  }
  // range(X_k') and X_k'^{1/2}
  std::vector<CMatrix> range(static_cast<size_t>(kn)), root(static_cast<size_t>(kn));
  for (Index k = 0; k < kn; ++k) {
    const size_t i = static_cast<size_t>(k);
    const Index d = est.dim(k);
    if (pack) {
      const PsdMatrix& x = pack->x[i];
      if (x.dim() != d) throw DimensionError("pack does not match the basis");
      Eigen::SelfAdjointEigenSolver<CMatrix> es(x.matrix());
      const RVector ev = es.eigenvalues().cwiseMax(0.0);
      const double tol = kPsdTol * std::max(1.0, ev.maxCoeff());
      std::vector<Index> keep;
      for (Index c = 0; c < d; ++c) {
        if (ev(c) > tol) keep.push_back(c);
      }
      range[i] = CMatrix(d, static_cast<Index>(keep.size()));
      for (size_t c = 0; c < keep.size(); ++c) range[i].col(static_cast<Index>(c)) = es.eigenvectors().col(keep[c]);
      root[i] = es.eigenvectors() * ev.cwiseSqrt().cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    } else {
      range[i] = identity(d);
      root[i] = identity(d);
    }
  }
  IuiSample s;
  s.xi_up.assign(static_cast<size_t>(kn), 0.0);
  s.xi_down = s.xi_up_mc = s.xi_down_mc = s.delta_psi = s.xi_up;
  std::vector<CMatrix> dpsi(static_cast<size_t>(kn));
  for (Index k = 0; k < kn; ++k) {
    const size_t i = static_cast<size_t>(k);
    dpsi[i] = est.psi[i] - ref.psi[i];
    s.delta_psi[i] = spectral_norm(dpsi[i]);
  }
  std::mt19937_64 rng(opt.seed);
  for (Index k = 0; k < kn; ++k) {
    const size_t i = static_cast<size_t>(k);
    const CMatrix hk = ch.users[i].h / std::sqrt(ch.users[i].path_loss);
    std::vector<CMatrix> up_maps, down_maps;
    std::vector<double> up_nu, down_nu;
    std::vector<int> up_users, down_users;
    for (Index j = 0; j < kn; ++j) {
      const size_t jj = static_cast<size_t>(j);
      if (est.precedes(k, j)) {
        up_maps.push_back(hk * est.psi[jj] * range[jj]);
        up_nu.push_back(nu[jj]);
        up_users.push_back(static_cast<int>(j));
      } else if (est.precedes(j, k)) {
        down_maps.push_back(hk * dpsi[jj] * range[jj]);
        down_nu.push_back(nu[jj]);
        down_users.push_back(static_cast<int>(j));
      }
    }
    s.xi_up[i] = detail::blockwise_worst_case(up_maps, up_nu);
    s.xi_down[i] = detail::blockwise_worst_case(down_maps, down_nu);
    auto mc = [&](const std::vector<int>& users, bool up) {
      if (users.empty() || opt.mc_draws <= 0) return 0.0;
      double acc = 0.0;
      for (int t = 0; t < opt.mc_draws; ++t) {
        CVector r = CVector::Zero(hk.rows());
        for (int j : users) {
          const size_t jj = static_cast<size_t>(j);
          const CVector xs = root[jj] * detail::random_unit(est.dim(j), rng);
          if (xs.norm() == 0.0) continue;
          const CVector u = nu[jj] * xs / xs.norm();
          r += hk * ((up ? est.psi[jj] : dpsi[jj]) * u);
        }
        acc += r.norm();
      }
      return acc / static_cast<double>(opt.mc_draws);
    };
    s.xi_up_mc[i] = mc(up_users, true);
    s.xi_down_mc[i] = mc(down_users, false);
  }
  return s;
}

/// Fills the analytical bound fields of `s`.
inline void iui_bounds(const ChannelSet& ch, const SnsBasis& ref, const SnsBasis& est,
                       const IuiOptions& opt, IuiSample& s) {
  const Index kn = ch.num_users();
  std::vector<double> nu = opt.symbol_norms;
  if (nu.empty()) nu.assign(static_cast<size_t>(kn), 1.0);
  s.bound_up.assign(static_cast<size_t>(kn), 0.0);
  s.bound_down = s.c_norm = s.bound_up;
  s.bound_valid.assign(static_cast<size_t>(kn), true);
  std::vector<double> dpsi_bound(static_cast<size_t>(kn), 0.0);
  for (Index k = 0; k < kn; ++k) {
    const size_t i = static_cast<size_t>(k);
    const CMatrix& fb = est.f[i];
    if (fb.rows() == 0) continue;
    const CMatrix df = fb - ref.f[i];
    const CMatrix& psi = ref.psi[i];
    const CMatrix gram = fb * fb.adjoint();
    const CMatrix c = psi.adjoint() * df.adjoint() * gram.llt().solve(df * psi);
    s.c_norm[i] = spectral_norm(hermitian_part(c));
    dpsi_bound[i] = s.c_norm[i] < 1.0
                        ? spectral_norm(pseudo_inverse(fb)) * spectral_norm(df) -
                              std::log(1.0 - s.c_norm[i])
                        : std::numeric_limits<double>::infinity();
  }
  for (Index k = 0; k < kn; ++k) {
    const size_t i = static_cast<size_t>(k);
    const double sl = 1.0 / std::sqrt(ch.users[i].path_loss);
    const double dh = spectral_norm(ch.users[i].h_est - ch.users[i].h);
    const double hn = spectral_norm(ch.users[i].h);
    double up = 0.0, down = 0.0;
    for (Index j = 0; j < kn; ++j) {
      const size_t jj = static_cast<size_t>(j);
      if (est.precedes(k, j)) up += nu[jj];
      if (est.precedes(j, k)) {
        if (s.c_norm[jj] >= 1.0) s.bound_valid[i] = false;
        down += dpsi_bound[jj] * nu[jj];
      }
    }
    s.bound_up[i] = sl * dh * up;
    s.bound_down[i] = s.bound_valid[i] ? sl * hn * down : std::numeric_limits<double>::infinity();
  }
}

inline IuiSample analyze_iui(const ChannelSet& ch, const SnsBasis& est,
                             const std::optional<CovariancePack>& pack = std::nullopt,
                             const IuiOptions& opt = {}) {
  const SnsBasis ref = reference_basis(ch, est);
  IuiSample s = empirical_iui(ch, ref, est, pack, opt);
  iui_bounds(ch, ref, est, opt, s);
  return s;
}

/// Single-matrix check of the null-space perturbation bounds.
struct PerturbationReport {
  double a_psibar = 0.0;     // ||A PsiBar||
  double bound_an = 0.0;     // ||dA||
  double min_delta_psi = 0.0;  // min ||PsiBar - Psi|| over the sampled bases
  double aligned_delta_psi = 0.0;  // the Z = -I choice
  double bound_nn = 0.0;
  double c_norm = 0.0;
  bool valid = true;          // ||C|| < 1
  bool an_holds = true;
  bool nn_holds = true;       // min over the sample respects the bound (when valid)
};

inline PerturbationReport null_space_perturbation_check(const CMatrix& a, const CMatrix& da, int samples = 32,
                                 std::uint64_t seed = 2026) {
  if (a.rows() != da.rows() || a.cols() != da.cols()) throw DimensionError("A and dA differ in shape");
  const CMatrix abar = a + da;
  const CMatrix psibar = null_space_basis(abar);
  const CMatrix psi = aligned_null_space_basis(a, psibar);
  PerturbationReport r;
  r.a_psibar = spectral_norm(a * psibar);
  r.bound_an = spectral_norm(da);
  r.an_holds = r.a_psibar <= r.bound_an * (1.0 + 1e-12) + 1e-14;
  const CMatrix c = psi.adjoint() * da.adjoint() * (abar * abar.adjoint()).llt().solve(da * psi);
  r.c_norm = spectral_norm(hermitian_part(c));
  r.valid = r.c_norm < 1.0;
  r.aligned_delta_psi = spectral_norm(psibar - psi);
  r.min_delta_psi = r.aligned_delta_psi;
  std::mt19937_64 rng(seed);
  const Index d = psi.cols();
  for (int t = 0; t < samples && d > 0; ++t) {
    std::normal_distribution<double> nd(0.0, 1.0);
    CMatrix g(d, d);
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) g(i, j) = Complex(nd(rng), nd(rng));
    }
    Eigen::HouseholderQR<CMatrix> qr(g);
    const CMatrix w = qr.householderQ() * CMatrix::Identity(d, d);
    r.min_delta_psi = std::min(r.min_delta_psi, spectral_norm(psibar - psi * w));
  }
  if (r.valid) {
    r.bound_nn = spectral_norm(pseudo_inverse(abar)) * r.bound_an - std::log(1.0 - r.c_norm);
    r.nn_holds = r.min_delta_psi <= r.bound_nn * (1.0 + 1e-12) + 1e-14;
  } else {
    r.bound_nn = std::numeric_limits<double>::infinity();
  }
  return r;
}

}  // namespace sns
