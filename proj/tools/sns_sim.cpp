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

// sns_sim <experiment> --config FILE [--out DIR] [--seed S] [--trials T]
//         [--threads N] [--format csv|json]
//
// Exit status: 0 success, 1 invalid input, 2 runtime failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sns/harness.hpp"

namespace {

struct Args {
  std::string config;
  std::string out = "results";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  int threads = sns::default_threads();
  std::string format = "csv";
};

int run(const std::string& experiment, const Args& a) {
  sns::ExperimentConfig cfg;
  sns::OutputFormat fmt;
  try {
    cfg = sns::load_config(a.config);
    if (a.seed) cfg.seed = *a.seed;
    if (a.trials) cfg.trials = *a.trials;
    fmt = sns::parse_format(a.format);
    if (a.threads < 1) throw sns::ValidationError("--threads must be positive");
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "sns_sim: " << e.what() << "\n";
    return 1;
  }
  try {
    sns::RunOptions ro;
    ro.threads = a.threads;
    const sns::ExperimentResult r = sns::run_experiment(experiment, cfg, ro);
    for (const auto& p : r.write(a.out, fmt)) std::cout << p.string() << "\n";
    if (r.failures > 0) {
      std::cerr << "sns_sim: " << r.failures << " of " << r.attempts << " runs failed\n";
    }
  } catch (const sns::ValidationError& e) {
    std::cerr << "sns_sim: " << e.what() << "\n";
    return 1;
  } catch (const sns::ModelMismatch& e) {
    std::cerr << "sns_sim: " << e.what() << "\n";
    return 1;
  } catch (const sns::TooManyUsers& e) {
    std::cerr << "sns_sim: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "sns_sim: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SNS-based MIMO-RSMA simulation harness"};
  app.require_subcommand(1);
  Args args;
  std::string chosen;
  for (const auto& name : sns::experiment_names()) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", args.config, "experiment configuration (JSON)")->required();
    sub->add_option("--out", args.out, "output directory")->capture_default_str();
    sub->add_option("--seed", args.seed, "master seed (overrides the config)");
    sub->add_option("--trials", args.trials, "trial count (overrides the config)");
    sub->add_option("--threads", args.threads, "worker threads (default: SNS_THREADS or 1)");
    sub->add_option("--format", args.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sub->callback([&chosen, name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  return run(chosen, args);
}
