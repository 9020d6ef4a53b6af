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

// Successive null-space (SNS) precoding for rate-splitting downlink MU-MIMO:
// basis construction and exact rate / weighted-sum-rate evaluation.
//
// Rates are in bits per channel use. User k's private stream lives in the
// null space of the stacked channels of the users preceding it in the
// decoding order, so it causes no interference to those users.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <vector>

#include "sns/channel.hpp"
#include "sns/numerics.hpp"

namespace sns {

inline constexpr double kLn2 = std::numbers::ln2;

/// User weights eta_k and common-message shares eta_{c,k}.
struct Weights {
  std::vector<double> eta;
  std::vector<double> eta_c;

  static Weights equal(Index k) {
    Weights w;
    w.eta.assign(static_cast<size_t>(k), 1.0 / static_cast<double>(k));
    w.eta_c = w.eta;
    return w;
  }
  /// eta_{c,k} defaults to eta_k.
  static Weights from_eta(std::vector<double> eta) {
    Weights w;
    w.eta = std::move(eta);
    w.eta_c = w.eta;
    return w;
  }

  Index size() const { return static_cast<Index>(eta.size()); }
  /// Coefficient of the common rate in the WSR: sum_k eta_k eta_{c,k}.
  double common_coefficient() const {
    double c = 0.0;
    for (size_t k = 0; k < eta.size(); ++k) c += eta[k] * eta_c[k];
    return c;
  }

  void validate(Index users, double tol = 1e-12) const {
    auto check = [&](const std::vector<double>& v, const char* name) {
      if (static_cast<Index>(v.size()) != users) {
        throw WeightError(std::string(name) + " has wrong length");
      }
      double s = 0.0;
      for (double x : v) {
        if (!(x >= -tol && x <= 1.0 + tol)) throw WeightError(std::string(name) + " outside [0,1]");
        s += x;
      }
      if (std::abs(s - 1.0) > tol) throw WeightError(std::string(name) + " does not sum to 1");
    };
    check(eta, "eta");
    check(eta_c, "eta_c");
  }
};

/// Successive null-space bases for one user order.
struct SnsBasis {
  std::vector<int> order;     // order[pos] = user index
  std::vector<int> position;  // position[user] = pos
  std::vector<CMatrix> f;     // per user: stacked channels of the preceding users
  std::vector<CMatrix> psi;   // per user: N x N_k orthonormal null-space basis
  bool estimated = false;

  Index num_users() const { return static_cast<Index>(psi.size()); }
  Index dim(Index k) const { return psi[static_cast<size_t>(k)].cols(); }
  bool precedes(Index a, Index b) const {
    return position[static_cast<size_t>(a)] < position[static_cast<size_t>(b)];
  }
};

inline std::vector<int> identity_order(Index k) {
  std::vector<int> o(static_cast<size_t>(k));
  std::iota(o.begin(), o.end(), 0);
  return o;
}

inline std::vector<int> validated_position(const std::vector<int>& order, Index users) {
  if (static_cast<Index>(order.size()) != users) throw OrderMismatch("order length != users");
  std::vector<int> pos(order.size(), -1);
  for (size_t i = 0; i < order.size(); ++i) {
    const int u = order[i];
    if (u < 0 || u >= users || pos[static_cast<size_t>(u)] != -1) {
      throw OrderMismatch("order is not a permutation");
    }
    pos[static_cast<size_t>(u)] = static_cast<int>(i);
  }
  return pos;
}

/// Builds F_k and Psi_k for every user from the true (or estimated) channels.
inline SnsBasis build_sns_basis(const ChannelSet& ch, const std::vector<int>& order,
                                bool use_estimates) {
  const Index k_users = ch.num_users();
  SnsBasis b;
  b.order = order;
  b.position = validated_position(order, k_users);
  b.estimated = use_estimates;
  b.f.resize(static_cast<size_t>(k_users));
  b.psi.resize(static_cast<size_t>(k_users));
  std::vector<CMatrix> prefix;
  for (int u : order) {
    CMatrix f = vstack(prefix, ch.num_tx);
    b.psi[static_cast<size_t>(u)] = null_space_basis(f);
    b.f[static_cast<size_t>(u)] = std::move(f);
    prefix.push_back(ch.fading(u, use_estimates));
  }
  return b;
}

/// Optimization variables: common covariance Q_c (N x N) and per-user X_k
/// (N_k x N_k). The reduced form keeps Q_c = U_c Xt_c U_c^H, X_k = U_k Xt_k U_k^H.
struct CovariancePack {
  PsdMatrix q_c;
  std::vector<PsdMatrix> x;

  struct Reduced {
    CMatrix u_c;
    PsdMatrix xt_c;
    std::vector<CMatrix> u;
    std::vector<PsdMatrix> xt;
  };
  std::optional<Reduced> reduced;

  double total_power() const {
    double p = q_c.trace();
    for (const auto& xk : x) p += xk.trace();
    return p;
  }

  static CovariancePack from_reduced(Reduced r) {
    CovariancePack p;
    p.q_c = PsdMatrix(r.u_c * r.xt_c.matrix() * r.u_c.adjoint());
    for (size_t k = 0; k < r.u.size(); ++k) {
      p.x.emplace_back(r.u[k] * r.xt[k].matrix() * r.u[k].adjoint());
    }
    p.reduced = std::move(r);
    return p;
  }
};

/// Transmit-side covariance of user k's private stream, Psi_k X_k Psi_k^H.
inline CMatrix private_covariance(const SnsBasis& b, const CovariancePack& p, Index k) {
  const auto& psi = b.psi[static_cast<size_t>(k)];
  return psi * p.x[static_cast<size_t>(k)].matrix() * psi.adjoint();
}

struct RateReport {
  std::vector<double> private_rates;
  std::vector<double> common_rates;  // R_{k,c}
  double common_rate = 0.0;          // min_k R_{k,c}
  double wsr = 0.0;
  Weights weights;

  /// Private rate plus the user's share of the common message.
  double user_rate(Index k) const {
    return private_rates[static_cast<size_t>(k)] +
           weights.eta_c[static_cast<size_t>(k)] * common_rate;
  }
};

namespace detail {

// log2 det(I + S Omega^{-1}) with Omega = sigma2 I + H Q_int H^H / L and S = H Q_sig H^H / L.
// Omega is Cholesky-factored, S is whitened, and the log-det of I + whitened S
// is taken by a second Cholesky. A jitter of 1e-12 * trace is added once if a
// factorization fails.
inline double log2det_whitened(const CMatrix& h, double path_loss, double sigma2,
                               const CMatrix& q_signal, const CMatrix& q_interf) {
  const Index m = h.rows();
  CMatrix omega = sigma2 * identity(m) + h * q_interf * h.adjoint() / path_loss;
  omega = hermitian_part(omega);
  Eigen::LLT<CMatrix> llt(omega);
  if (llt.info() != Eigen::Success) {
    omega += 1e-12 * omega.trace().real() * identity(m);
    llt.compute(omega);
    if (llt.info() != Eigen::Success) {
      throw NumericalFailure("interference-plus-noise covariance not positive definite");
    }
  }
  const CMatrix s = h * q_signal * h.adjoint() / path_loss;
  const auto l = llt.matrixL();
  CMatrix tmp = l.solve(s);
  CMatrix whitened = l.solve(tmp.adjoint()).adjoint();
  whitened = hermitian_part(whitened) + identity(m);
  Eigen::LLT<CMatrix> llt2(whitened);
  if (llt2.info() != Eigen::Success) {
    whitened += 1e-12 * whitened.trace().real() * identity(m);
    llt2.compute(whitened);
    if (llt2.info() != Eigen::Success) {
      throw NumericalFailure("whitened signal matrix not positive definite");
    }
  }
  const CMatrix& lf = llt2.matrixLLT();
  double acc = 0.0;
  for (Index i = 0; i < m; ++i) acc += std::log(lf(i, i).real());
  return 2.0 * acc / kLn2;
}

inline void check_pack(const ChannelSet& ch, const SnsBasis& b, const CovariancePack& p) {
  if (b.num_users() != ch.num_users() || static_cast<Index>(p.x.size()) != ch.num_users()) {
    throw DimensionError("basis / pack / channel user counts differ");
  }
  for (Index k = 0; k < ch.num_users(); ++k) {
    if (p.x[static_cast<size_t>(k)].dim() != b.dim(k)) throw DimensionError("X_k has wrong size");
  }
  if (p.q_c.dim() != ch.num_tx) throw DimensionError("Q_c has wrong size");
}

}  // namespace detail

/// Private rate of user k with perfect CSI: interference from users that
/// precede k in the basis order.
inline double private_rate(const ChannelSet& ch, const SnsBasis& b, const CovariancePack& p,
                           Index k, double sigma2) {
  detail::check_pack(ch, b, p);
  const Index n = ch.num_tx;
  CMatrix interf = CMatrix::Zero(n, n);
  for (Index j = 0; j < ch.num_users(); ++j) {
    if (b.precedes(j, k)) interf += private_covariance(b, p, j);
  }
  const auto& u = ch.users[static_cast<size_t>(k)];
  return detail::log2det_whitened(u.h, u.path_loss, sigma2, private_covariance(b, p, k), interf);
}

/// Rate at which user k can decode the common message: all private streams of
/// users up to and including k (in order) are treated as noise.
inline double common_rate_per_user(const ChannelSet& ch, const SnsBasis& b,
                                   const CovariancePack& p, Index k, double sigma2) {
  detail::check_pack(ch, b, p);
  const Index n = ch.num_tx;
  CMatrix interf = CMatrix::Zero(n, n);
  for (Index j = 0; j < ch.num_users(); ++j) {
    if (j == k || b.precedes(j, k)) interf += private_covariance(b, p, j);
  }
  const auto& u = ch.users[static_cast<size_t>(k)];
  return detail::log2det_whitened(u.h, u.path_loss, sigma2, p.q_c.matrix(), interf);
}

/// Assembles R_c = min_k R_{k,c} and the weighted sum rate.
inline RateReport wsr(std::vector<double> private_rates, std::vector<double> common_rates,
                      const Weights& w) {
  const Index k_users = static_cast<Index>(private_rates.size());
  w.validate(k_users);
  if (static_cast<Index>(common_rates.size()) != k_users) {
    throw DimensionError("common rate count differs from private rate count");
  }
  RateReport r;
  r.private_rates = std::move(private_rates);
  r.common_rates = std::move(common_rates);
  r.weights = w;
  r.common_rate = k_users == 0 ? 0.0
                               : *std::min_element(r.common_rates.begin(), r.common_rates.end());
  double total = w.common_coefficient() * r.common_rate;
  for (Index k = 0; k < k_users; ++k) {
    total += w.eta[static_cast<size_t>(k)] * r.private_rates[static_cast<size_t>(k)];
  }
  r.wsr = total;
  return r;
}

/// Perfect-CSI rate report of an SNS configuration.
inline RateReport perfect_rates(const ChannelSet& ch, const SnsBasis& b, const CovariancePack& p,
                                double sigma2, const Weights& w) {
  std::vector<double> rp, rc;
  for (Index k = 0; k < ch.num_users(); ++k) {
    rp.push_back(private_rate(ch, b, p, k, sigma2));
    rc.push_back(common_rate_per_user(ch, b, p, k, sigma2));
  }
  return wsr(std::move(rp), std::move(rc), w);
}

enum class EvalChannel { kTrue, kEstimated };

/// Transmit covariances in antenna space: common Q_c and per-user private Q_k.
struct TransmitCovariances {
  CMatrix q_c;
  std::vector<CMatrix> q;

  double total_power() const {
    double p = q_c.trace().real();
    for (const auto& qk : q) p += qk.trace().real();
    return p;
  }
};

inline TransmitCovariances to_transmit(const SnsBasis& b, const CovariancePack& p) {
  TransmitCovariances t;
  t.q_c = p.q_c.matrix();
  for (Index k = 0; k < b.num_users(); ++k) t.q.push_back(private_covariance(b, p, k));
  return t;
}

/// Rates when every other private stream interferes: private interference from
/// all k' != k, common-message interference from all private streams. Used for
/// imperfect CSI, where the null-space structure no longer holds on the true
/// channel, and for deployed evaluation of any precoding scheme.
inline RateReport full_interference_rates(const ChannelSet& ch, const TransmitCovariances& t,
                                          double sigma2, const Weights& w, EvalChannel eval) {
  const Index n = ch.num_tx;
  const Index k_users = ch.num_users();
  CMatrix all = CMatrix::Zero(n, n);
  for (const auto& qk : t.q) all += qk;
  std::vector<double> rp, rc;
  for (Index k = 0; k < k_users; ++k) {
    const auto& u = ch.users[static_cast<size_t>(k)];
    const CMatrix& h = eval == EvalChannel::kTrue ? u.h : u.h_est;
    const CMatrix& qk = t.q[static_cast<size_t>(k)];
    rp.push_back(detail::log2det_whitened(h, u.path_loss, sigma2, qk, all - qk));
    rc.push_back(detail::log2det_whitened(h, u.path_loss, sigma2, t.q_c, all));
  }
  return wsr(std::move(rp), std::move(rc), w);
}

/// Rates of an SNS configuration whose basis was built from the estimated
/// channels. kTrue gives the rates achieved on the actual channels; kEstimated
/// gives the surrogate the base station can evaluate.
inline RateReport imperfect_rates(const ChannelSet& ch, const SnsBasis& basis_est,
                                  const CovariancePack& p, double sigma2, const Weights& w,
                                  EvalChannel eval) {
  detail::check_pack(ch, basis_est, p);
  if (!basis_est.estimated) throw ValidationError("imperfect_rates needs a basis built from estimates");
  return full_interference_rates(ch, to_transmit(basis_est, p), sigma2, w, eval);
}

}  // namespace sns
