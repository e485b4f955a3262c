// Copyright 2026 The Fedtrigger Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line front end: run one experiment, sweep a parameter, or run the
// replay ablation.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedtrigger/config.h"
#include "fedtrigger/errors.h"
#include "fedtrigger/experiment.h"

namespace {

using fedtrigger::ExperimentConfig;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> defense;
  std::optional<int> threads;
  std::string out = "out";
  bool quiet = false;
  std::string param;
  std::string values;
};

ExperimentConfig Load(const Options& opt) {
  ExperimentConfig cfg = fedtrigger::ParseConfig([&] {
    std::ifstream in(opt.config, std::ios::binary);
    if (!in) throw fedtrigger::FormatError("cannot open config " + opt.config);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }());
  if (opt.seed) cfg.fed.seed = *opt.seed;
  if (opt.defense) cfg.defense.kind = fedtrigger::ParseDefense(*opt.defense);
  if (opt.threads) cfg.fed.threads = *opt.threads;
  cfg.Validate();
  return cfg;
}

fedtrigger::ProgressFn Progress(const Options& opt) {
  if (opt.quiet) return {};
  return [](const fedtrigger::RoundRecord& r) {
    std::fprintf(stderr, "round %3d  acc %.4f", r.round, r.acc);
    for (std::size_t i = 0; i < r.asr.size(); ++i) {
      std::fprintf(stderr, "  asr_%zu %.4f", i + 1, r.asr[i]);
    }
    std::fprintf(stderr, "\n");
  };
}

std::vector<std::string> SplitCsv(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated multi-target backdoor simulator"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* cmd) {
    cmd->add_option("config", opt.config, "Experiment config file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", opt.seed, "Override the config seed");
    cmd->add_option("--out", opt.out, "Output directory")
        ->capture_default_str();
    cmd->add_option("--defense", opt.defense, "Aggregation defense")
        ->check(CLI::IsMember({"none", "clipcluster", "dpfedavg"}));
    cmd->add_option("--threads", opt.threads, "Client training threads")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("-q,--quiet", opt.quiet, "No per-round progress on stderr");
  };

  CLI::App* run = app.add_subcommand("run", "Run one experiment");
  add_common(run);
  CLI::App* sweep = app.add_subcommand("sweep", "Sweep one parameter");
  add_common(sweep);
  std::string param_help = "One of:";
  for (const auto& p : fedtrigger::SweepParameters()) param_help += " " + p;
  sweep->add_option("--param", opt.param, param_help)
      ->required()
      ->check(CLI::IsMember(fedtrigger::SweepParameters()));
  sweep->add_option("--values", opt.values, "Comma-separated values")
      ->required();
  CLI::App* ablate = app.add_subcommand(
      "ablate-replay", "Benign baseline plus the attack with replay on and off");
  add_common(ablate);

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = Load(opt);
    const std::filesystem::path out(opt.out);
    if (*run) {
      const auto r = fedtrigger::RunExperiment(cfg, out, Progress(opt));
      std::cout << fedtrigger::SummaryText(cfg, r);
    } else if (*sweep) {
      const auto values = SplitCsv(opt.values);
      if (values.empty()) throw fedtrigger::FormatError("--values is empty");
      fedtrigger::RunSweep(cfg, opt.param, values, out, Progress(opt));
      std::cout << "wrote " << (out / "sweep.csv").string() << '\n';
    } else {
      fedtrigger::RunReplayAblation(cfg, out, Progress(opt));
      std::cout << "wrote " << (out / "ablation.csv").string() << '\n';
    }
  } catch (const fedtrigger::ConfigError& e) {
    std::cerr << "fedtrigger: invalid configuration:\n";
    for (const auto& v : e.violations()) std::cerr << "  - " << v << '\n';
    return 2;
  } catch (const fedtrigger::FormatError& e) {
    std::cerr << "fedtrigger: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fedtrigger: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
