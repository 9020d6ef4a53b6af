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

// Water-filling and single-user MIMO capacity.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sns/numerics.hpp"

namespace sns {

struct WaterFilling {
  RVector powers;
  double level = 0.0;
  double rate_bits = 0.0;
};

/// Maximizes sum log2(1 + g_i p_i) subject to p >= 0, sum p <= budget.
inline WaterFilling water_filling(const RVector& gains, double budget) {
  if (!(budget >= 0.0)) throw ValidationError("water-filling budget must be nonnegative");
  WaterFilling wf;
  const Index n = gains.size();
  wf.powers = RVector::Zero(n);
  std::vector<double> g;
  for (Index i = 0; i < n; ++i) {
    if (gains(i) > 0.0) g.push_back(gains(i));
  }
  if (g.empty() || budget == 0.0) return wf;
  std::sort(g.begin(), g.end(), std::greater<double>());
  // active set is a prefix of the sorted gains
  double level = 0.0;
  double inv_sum = 0.0;
  for (size_t a = 1; a <= g.size(); ++a) {
    inv_sum += 1.0 / g[a - 1];
    const double mu = (budget + inv_sum) / static_cast<double>(a);
    if (a == g.size() || mu <= 1.0 / g[a]) {
      level = mu;
      break;
    }
  }
  wf.level = level;
  for (Index i = 0; i < n; ++i) {
    if (gains(i) > 0.0) {
      wf.powers(i) = std::max(0.0, level - 1.0 / gains(i));
      wf.rate_bits += std::log2(1.0 + gains(i) * wf.powers(i));
    }
  }
  return wf;
}

/// Capacity (bits) of y = rx x + n with unit noise under tr(Q) <= budget.
inline double single_user_capacity(const CMatrix& rx, double budget) {
  const RVector s = singular_values(rx);
  return water_filling(s.cwiseAbs2(), budget).rate_bits;
}

}  // namespace sns
