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

// Experiment configuration: JSON file <-> ExperimentConfig. Field names are
// listed in README.md; unknown keys are rejected so typos do not silently
// fall back to defaults.

#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sns/channel.hpp"
#include "sns/rsma.hpp"
#include "sns/sca.hpp"

namespace sns {

enum class SchemeId {
  kSns,
  kSnsFixedPerm,
  kDirectSca,
  kZf,
  kRzf,
  kBd,
  kBdRsmaSiso,
  kBdRsmaMimo,
  kBdMimoCmUb,
};

inline const std::vector<std::pair<SchemeId, std::string>>& scheme_names() {
  static const std::vector<std::pair<SchemeId, std::string>> names = {
      {SchemeId::kSns, "SNS"},
      {SchemeId::kSnsFixedPerm, "SNS_FIXED_PERM"},
      {SchemeId::kDirectSca, "DIRECT_SCA"},
      {SchemeId::kZf, "ZF"},
      {SchemeId::kRzf, "RZF"},
      {SchemeId::kBd, "BD"},
      {SchemeId::kBdRsmaSiso, "BD_RSMA_SISO"},
      {SchemeId::kBdRsmaMimo, "BD_RSMA_MIMO"},
      {SchemeId::kBdMimoCmUb, "BD_MIMO_CM_UB"},
  };
  return names;
}

inline std::string to_string(SchemeId s) {
  for (const auto& [id, name] : scheme_names()) {
    if (id == s) return name;
  }
  return "?";
}

inline SchemeId parse_scheme(const std::string& s) {
  for (const auto& [id, name] : scheme_names()) {
    if (name == s) return id;
  }
  throw ValidationError("unknown scheme '" + s + "'");
}

enum class ChannelModel { kIidGaussian, kUla };

struct ExperimentConfig {
  std::string scenario = "custom";
  Index num_tx = 4;
  std::vector<Index> antennas = {2, 2};
  std::vector<double> distances_m;  // default 50 m each
  std::vector<double> angles_deg;   // ULA only
  std::vector<double> eta;          // default equal
  std::vector<double> eta_c;        // default eta
  std::vector<double> mu;           // default 0
  ChannelModel model = ChannelModel::kIidGaussian;
  int ula_paths = 1;
  std::vector<double> p_tx_dbm = {20.0};
  double noise_dbm = -35.0;
  double eps = 1e-5;
  int max_outer = kMaxOuterIterations;
  int trials = 10;
  std::uint64_t seed = 1;
  std::vector<SchemeId> schemes = {SchemeId::kSns};
  PermutationStrategy permutation = PermutationStrategy::kExhaustive;
  bool bd_warm_start = false;     // BD -> upper bound -> SNS initialization chain
  bool power_warm_start = true;   // previous grid point's SNS solution, rescaled
  // rate region
  int eta1_points = 21;
  // sensitivity
  std::vector<double> mu_grid = {1e-4, 1e-3, 1e-2, 1e-1};
  int error_user = 1;  // 0-based
  int mc_draws = 16;
  double c_limit = 0.5;
  // beam pattern
  double angle_step_deg = 0.5;
  // complexity
  std::vector<Index> k_grid = {2, 3, 4, 5, 6, 7, 8};
  int n_iter = 20;
  Index measure_max_k = 3;

  Index num_users() const { return static_cast<Index>(antennas.size()); }

  Weights weights() const {
    Weights w = eta.empty() ? Weights::equal(num_users()) : Weights::from_eta(eta);
    if (!eta_c.empty()) w.eta_c = eta_c;
    return w;
  }
  std::vector<double> errors() const {
    return mu.empty() ? std::vector<double>(antennas.size(), 0.0) : mu;
  }
  std::vector<UserGeometry> geometry() const {
    std::vector<UserGeometry> g;
    for (size_t k = 0; k < antennas.size(); ++k) {
      g.push_back({distances_m.empty() ? 50.0 : distances_m[k],
                   angles_deg.empty() ? 0.0 : angles_deg[k], antennas[k]});
    }
    return g;
  }
  double sigma2() const { return dbm_to_mw(noise_dbm); }
  bool imperfect() const {
    for (double m : errors()) {
      if (m != 0.0) return true;
    }
    return false;
  }
  ScaOptions sca() const {
    ScaOptions o;
    o.eps = eps;
    o.max_outer = max_outer;
    return o;
  }

  /// Draws the channel of one trial.
  ChannelSet draw(std::uint64_t trial_seed_value) const {
    if (model == ChannelModel::kUla) {
      return draw_ula(geometry(), num_tx, ula_paths, trial_seed_value, errors());
    }
    return draw_iid_gaussian(geometry(), num_tx, errors(), trial_seed_value);
  }

  void validate() const {
    const Index k = num_users();
    if (k < 1) throw ValidationError("at least one user required");
    if (num_tx < 1) throw ValidationError("num_tx must be positive");
    Index sum = 0;
    for (Index m : antennas) {
      if (m < 1) throw ValidationError("antenna counts must be positive");
      sum += m;
    }
    if (sum > num_tx) throw ValidationError("sum of receive antennas exceeds num_tx");
    auto sized = [&](const auto& v, const char* name) {
      if (!v.empty() && static_cast<Index>(v.size()) != k) {
        throw ValidationError(std::string(name) + " needs one entry per user");
      }
    };
    sized(distances_m, "distances_m");
    sized(angles_deg, "angles_deg");
    sized(eta, "eta");
    sized(eta_c, "eta_c");
    sized(mu, "mu");
    for (double d : distances_m) {
      if (!(d > 0.0)) throw ValidationError("distances must be positive");
    }
    for (double m : mu) {
      if (!(m >= 0.0)) throw ValidationError("error variances must be nonnegative");
    }
    weights().validate(k, 1e-9);
    if (p_tx_dbm.empty()) throw ValidationError("p_tx_dbm grid is empty");
    if (!(eps > 0.0)) throw ValidationError("eps must be positive");
    if (max_outer < 1) throw ValidationError("max_outer must be positive");
    if (trials < 1) throw ValidationError("trials must be at least 1");
    if (schemes.empty()) throw ValidationError("scheme list is empty");
    if (model == ChannelModel::kUla && ula_paths < 1) throw ValidationError("ula_paths must be positive");
    if (eta1_points < 2) throw ValidationError("eta1_points must be at least 2");
    if (mu_grid.empty()) throw ValidationError("mu_grid is empty");
    for (double m : mu_grid) {
      if (!(m >= 0.0)) throw ValidationError("mu_grid entries must be nonnegative");
    }
    if (error_user < 0 || error_user >= k) throw ValidationError("error_user out of range");
    if (mc_draws < 0) throw ValidationError("mc_draws must be nonnegative");
    if (!(angle_step_deg > 0.0)) throw ValidationError("angle_step_deg must be positive");
    if (k_grid.empty()) throw ValidationError("k_grid is empty");
    for (Index kk : k_grid) {
      if (kk < 1) throw ValidationError("k_grid entries must be positive");
    }
    if (n_iter < 1) throw ValidationError("n_iter must be positive");
    if (permutation == PermutationStrategy::kExhaustive && k > kMaxExhaustiveUsers) {
      for (SchemeId s : schemes) {
        if (s == SchemeId::kSns) throw TooManyUsers("exhaustive search allows at most 5 users");
      }
    }
  }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["scenario"] = c.scenario;
  j["num_tx"] = c.num_tx;
  j["antennas"] = c.antennas;
  j["distances_m"] = c.distances_m;
  j["angles_deg"] = c.angles_deg;
  j["eta"] = c.eta;
  j["eta_c"] = c.eta_c;
  j["mu"] = c.mu;
  j["channel_model"] = c.model == ChannelModel::kUla ? "ula" : "iid_gaussian";
  j["ula_paths"] = c.ula_paths;
  j["p_tx_dbm"] = c.p_tx_dbm;
  j["noise_dbm"] = c.noise_dbm;
  j["eps"] = c.eps;
  j["max_outer"] = c.max_outer;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  std::vector<std::string> s;
  for (SchemeId id : c.schemes) s.push_back(to_string(id));
  j["schemes"] = s;
  j["permutation"] = c.permutation == PermutationStrategy::kFixed ? "fixed" : "exhaustive";
  j["bd_warm_start"] = c.bd_warm_start;
  j["power_warm_start"] = c.power_warm_start;
  j["eta1_points"] = c.eta1_points;
  j["mu_grid"] = c.mu_grid;
  j["error_user"] = c.error_user;
  j["mc_draws"] = c.mc_draws;
  j["c_limit"] = c.c_limit;
  j["angle_step_deg"] = c.angle_step_deg;
  j["k_grid"] = c.k_grid;
  j["n_iter"] = c.n_iter;
  j["measure_max_k"] = c.measure_max_k;
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config root must be an object");
  ExperimentConfig c;
  const nlohmann::json defaults = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) throw ValidationError("unknown config key '" + key + "'");
    (void)value;
  }
  try {
    auto get = [&](const char* key, auto& out) {
      if (j.contains(key)) j.at(key).get_to(out);
    };
    get("scenario", c.scenario);
    get("num_tx", c.num_tx);
    get("antennas", c.antennas);
    get("distances_m", c.distances_m);
    get("angles_deg", c.angles_deg);
    get("eta", c.eta);
    get("eta_c", c.eta_c);
    get("mu", c.mu);
    if (j.contains("channel_model")) {
      const std::string m = j.at("channel_model").get<std::string>();
      if (m == "ula") {
        c.model = ChannelModel::kUla;
      } else if (m == "iid_gaussian") {
        c.model = ChannelModel::kIidGaussian;
      } else {
        throw ValidationError("channel_model must be iid_gaussian or ula");
      }
    }
    get("ula_paths", c.ula_paths);
    get("p_tx_dbm", c.p_tx_dbm);
    get("noise_dbm", c.noise_dbm);
    get("eps", c.eps);
    get("max_outer", c.max_outer);
    get("trials", c.trials);
    get("seed", c.seed);
    if (j.contains("schemes")) {
      c.schemes.clear();
      for (const auto& s : j.at("schemes")) c.schemes.push_back(parse_scheme(s.get<std::string>()));
    }
    if (j.contains("permutation")) {
      const std::string p = j.at("permutation").get<std::string>();
      if (p == "fixed") {
        c.permutation = PermutationStrategy::kFixed;
      } else if (p == "exhaustive") {
        c.permutation = PermutationStrategy::kExhaustive;
      } else {
        throw ValidationError("permutation must be exhaustive or fixed");
      }
    }
    get("bd_warm_start", c.bd_warm_start);
    get("power_warm_start", c.power_warm_start);
    get("eta1_points", c.eta1_points);
    get("mu_grid", c.mu_grid);
    get("error_user", c.error_user);
    get("mc_draws", c.mc_draws);
    get("c_limit", c.c_limit);
    get("angle_step_deg", c.angle_step_deg);
    get("k_grid", c.k_grid);
    get("n_iter", c.n_iter);
    get("measure_max_k", c.measure_max_k);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("cannot parse '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

/// FNV-1a of the canonical (sorted-key) JSON form, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  const std::string s = to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sns
