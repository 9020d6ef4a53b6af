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

// Channel realizations: i.i.d. Rayleigh and a parametric uniform linear array
// model, with path loss and additive CSI estimation error.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "sns/numerics.hpp"

namespace sns {

struct UserGeometry {
  double distance_m = 50.0;
  double angle_deg = 0.0;  // ULA model only
  Index num_antennas = 1;

  double path_loss() const { return distance_m * distance_m; }
};

struct UserChannel {
  CMatrix h;        // small-scale fading, M_k x N
  CMatrix delta_h;  // CSI error
  CMatrix h_est;    // h + delta_h, what the base station sees
  double path_loss = 1.0;
  double error_variance = 0.0;

  Index antennas() const { return h.rows(); }
};

/// One channel realization for all users.
struct ChannelSet {
  Index num_tx = 0;
  std::vector<UserChannel> users;
  /// Users for which ||delta_h|| >= ||h_est|| (small-error assumption broken).
  std::vector<int> large_error_users;

  Index num_users() const { return static_cast<Index>(users.size()); }
  Index total_rx() const {
    Index s = 0;
    for (const auto& u : users) s += u.antennas();
    return s;
  }
  std::vector<Index> antennas() const {
    std::vector<Index> m;
    for (const auto& u : users) m.push_back(u.antennas());
    return m;
  }
  /// Fading matrix of user k; estimated if `estimated`.
  const CMatrix& fading(Index k, bool estimated) const {
    const auto& u = users[static_cast<size_t>(k)];
    return estimated ? u.h_est : u.h;
  }
  bool perfect_csi() const {
    for (const auto& u : users) {
      if (u.error_variance != 0.0) return false;
    }
    return true;
  }
};

struct NoiseModel {
  double sigma2 = 1.0;  // linear mW per receive antenna

  explicit NoiseModel(double s2) : sigma2(s2) {
    if (!(s2 > 0.0)) throw ValidationError("noise power must be positive");
  }
};

inline double dbm_to_mw(double p_dbm) { return std::pow(10.0, p_dbm / 10.0); }
inline double mw_to_dbm(double p_mw) { return 10.0 * std::log10(p_mw); }

/// SplitMix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of trial `trial` under `master`; independent of scheduling order.
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  return mix_seed(master, trial);
}

namespace detail {

inline CMatrix complex_gaussian(Index rows, Index cols, double variance, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  const double s = std::sqrt(variance / 2.0);
  CMatrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const double re = nd(rng);
      const double im = nd(rng);
      out(i, j) = Complex(s * re, s * im);
    }
  }
  return out;
}

inline void check_load(const std::vector<UserGeometry>& geoms, Index n) {
  if (geoms.empty()) throw ValidationError("at least one user required");
  Index total = 0;
  for (const auto& g : geoms) {
    if (g.num_antennas < 1) throw ValidationError("each user needs at least one antenna");
    if (!(g.distance_m > 0.0)) throw ValidationError("distance must be positive");
    total += g.num_antennas;
  }
  if (n < total) {
    throw Overloaded("N = " + std::to_string(n) + " < sum M_k = " + std::to_string(total));
  }
}

inline bool stack_full_rank(const std::vector<UserChannel>& users, Index n, bool estimated) {
  std::vector<CMatrix> blocks;
  for (const auto& u : users) blocks.push_back(estimated ? u.h_est : u.h);
  return has_full_row_rank(vstack(blocks, n));
}

inline void finish(ChannelSet& set, std::mt19937_64& err_rng) {
  set.large_error_users.clear();
  for (size_t k = 0; k < set.users.size(); ++k) {
    auto& u = set.users[k];
    if (u.error_variance > 0.0) {
      u.delta_h = complex_gaussian(u.h.rows(), u.h.cols(), u.error_variance, err_rng);
      u.h_est = u.h + u.delta_h;
    } else {
      u.delta_h = CMatrix::Zero(u.h.rows(), u.h.cols());
      u.h_est = u.h;
    }
    if (u.error_variance > 0.0 && spectral_norm(u.delta_h) >= spectral_norm(u.h_est)) {
      set.large_error_users.push_back(static_cast<int>(k));
    }
  }
}

inline constexpr int kMaxRedraws = 64;

}  // namespace detail

/// I.i.d. Rayleigh fading: [H_k]_ij ~ CN(0,1), [dH_k]_ij ~ CN(0, mu_k), all
/// independent. The fading and the error use separate streams derived from
/// `seed`, so H_k does not depend on the error variances.
inline ChannelSet draw_iid_gaussian(const std::vector<UserGeometry>& geoms, Index n,
                                    const std::vector<double>& mu, std::uint64_t seed) {
  detail::check_load(geoms, n);
  if (mu.size() != geoms.size()) throw ValidationError("one error variance per user required");
  for (double m : mu) {
    if (!(m >= 0.0)) throw ValidationError("error variance must be nonnegative");
  }
  std::mt19937_64 fading_rng(mix_seed(seed, 0));
  std::mt19937_64 err_rng(mix_seed(seed, 1));
  ChannelSet set;
  set.num_tx = n;
  for (int attempt = 0; attempt < detail::kMaxRedraws; ++attempt) {
    set.users.clear();
    for (size_t k = 0; k < geoms.size(); ++k) {
      UserChannel u;
      u.h = detail::complex_gaussian(geoms[k].num_antennas, n, 1.0, fading_rng);
      u.path_loss = geoms[k].path_loss();
      u.error_variance = mu[k];
      set.users.push_back(std::move(u));
    }
    detail::finish(set, err_rng);
    if (detail::stack_full_rank(set.users, n, false) && detail::stack_full_rank(set.users, n, true)) {
      return set;
    }
  }
  throw RankDeficient("could not draw a full-row-rank channel");
}

/// Transmit steering vector of a half-wavelength ULA, unit norm.
inline CVector ula_steering(Index n, double angle_deg) {
  const double s = std::sin(angle_deg * std::numbers::pi / 180.0);
  CVector a(n);
  for (Index i = 0; i < n; ++i) {
    a(i) = std::polar(1.0 / std::sqrt(static_cast<double>(n)), std::numbers::pi * i * s);
  }
  return a;
}

/// Parametric ULA model: H_k = sqrt(N M_k) * sum_p alpha_p a_r(theta_p) a_t(phi_p)^H
/// with one unit-gain path at the user's angle plus (paths - 1) scatter paths
/// with CN(0, 0.1) gains at uniformly random angles.
inline ChannelSet draw_ula(const std::vector<UserGeometry>& geoms, Index n, int paths,
                           std::uint64_t seed, const std::vector<double>& mu = {}) {
  detail::check_load(geoms, n);
  if (paths < 1) throw ValidationError("ULA model needs at least one path");
  std::vector<double> err = mu.empty() ? std::vector<double>(geoms.size(), 0.0) : mu;
  if (err.size() != geoms.size()) throw ValidationError("one error variance per user required");
  std::mt19937_64 rng(mix_seed(seed, 0));
  std::mt19937_64 err_rng(mix_seed(seed, 1));
  std::uniform_real_distribution<double> angle(-90.0, 90.0);
  ChannelSet set;
  set.num_tx = n;
  for (int attempt = 0; attempt < detail::kMaxRedraws; ++attempt) {
    set.users.clear();
    for (size_t k = 0; k < geoms.size(); ++k) {
      const Index m = geoms[k].num_antennas;
      const double scale = std::sqrt(static_cast<double>(n * m));
      CMatrix h = scale * ula_steering(m, angle(rng)) * ula_steering(n, geoms[k].angle_deg).adjoint();
      for (int p = 1; p < paths; ++p) {
        const Complex alpha = detail::complex_gaussian(1, 1, 0.1, rng)(0, 0);
        h += scale * alpha * ula_steering(m, angle(rng)) * ula_steering(n, angle(rng)).adjoint();
      }
      UserChannel u;
      u.h = h;
      u.path_loss = geoms[k].path_loss();
      u.error_variance = err[k];
      set.users.push_back(std::move(u));
    }
    detail::finish(set, err_rng);
    if (detail::stack_full_rank(set.users, n, false) && detail::stack_full_rank(set.users, n, true)) {
      return set;
    }
  }
  throw RankDeficient("ULA geometry yields a rank-deficient channel");
}

/// Copy of `set` with users reordered: result user i is input user order[i].
inline ChannelSet permute_users(const ChannelSet& set, const std::vector<int>& order) {
  if (order.size() != set.users.size()) throw OrderMismatch("order length != number of users");
  ChannelSet out;
  out.num_tx = set.num_tx;
  std::vector<bool> seen(order.size(), false);
  for (int idx : order) {
    if (idx < 0 || static_cast<size_t>(idx) >= order.size() || seen[static_cast<size_t>(idx)]) {
      throw OrderMismatch("order is not a permutation");
    }
    seen[static_cast<size_t>(idx)] = true;
    out.users.push_back(set.users[static_cast<size_t>(idx)]);
  }
  for (int k : set.large_error_users) {
    for (size_t i = 0; i < order.size(); ++i) {
      if (order[i] == k) out.large_error_users.push_back(static_cast<int>(i));
    }
  }
  return out;
}

}  // namespace sns
