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

// Big-O arguments for precoder computation and power allocation. Values are
// the expressions inside O(.) evaluated for a configuration, not flop counts.

#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sns/errors.hpp"
#include "sns/numerics.hpp"

namespace sns {

struct ComplexityRow {
  std::string scheme;
  double precoder = 0.0;    // precoder computation
  bool iterative = false;   // PA repeated N_iter times
  double pa = 0.0;          // per-solve PA argument
  double total = 0.0;       // precoder + N_iter^[iterative] * pa
  double measured_seconds = std::numeric_limits<double>::quiet_NaN();
};

/// Null-space dimensions N_k = N - sum_{k' < k} M_k' for the identity order.
inline std::vector<Index> sns_dims(Index n, const std::vector<Index>& m) {
  std::vector<Index> d;
  Index used = 0;
  for (Index mk : m) {
    d.push_back(n - used);
    used += mk;
  }
  return d;
}

/// Real variable count N^2 + sum_k N_k^2 of the SNS problem.
inline double sns_variable_count(Index n, const std::vector<Index>& m) {
  double v = static_cast<double>(n * n);
  for (Index d : sns_dims(n, m)) v += static_cast<double>(d * d);
  return v;
}

inline std::vector<ComplexityRow> complexity_report(Index n, const std::vector<Index>& m,
                                                    double eps, int n_iter) {
  if (n <= 0 || m.empty()) throw ValidationError("complexity_report needs N > 0 and K > 0");
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("eps must lie in (0, 1)");
  if (n_iter < 1) throw ValidationError("n_iter must be positive");
  Index sum_m = 0;
  double sum_m3 = 0.0;
  for (Index mk : m) {
    if (mk <= 0) throw ValidationError("antenna counts must be positive");
    sum_m += mk;
    sum_m3 += std::pow(static_cast<double>(mk), 3);
  }
  if (sum_m > n) throw ValidationError("more receive than transmit antennas");
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(m.size());
  const double lg = std::log(1.0 / eps);
  const double v = sns_variable_count(n, m);
  const double it = static_cast<double>(n_iter);
  const double n3 = nn * nn * nn;
  const double nsqn = nn * std::sqrt(nn) * lg;
  std::vector<ComplexityRow> rows = {
      {"SNS", 2.0 * n3 + kk * nsqn, true, v * std::sqrt(v) * lg, 0.0},
      {"DIRECT_SCA", 0.0, true, n3 * kk * std::sqrt(kk) * lg, 0.0},
      {"BD_RSMA", 2.0 * n3 + sum_m3, true, n3 * lg, 0.0},
      {"RZF", 1.5 * n3, true, nsqn, 0.0},
      {"BD", 2.0 * n3 + sum_m3, false, nsqn, 0.0},
      {"ZF", 1.5 * n3, false, nsqn, 0.0},
  };
  for (auto& r : rows) r.total = r.precoder + (r.iterative ? it : 1.0) * r.pa;
  return rows;
}

}  // namespace sns
