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


#ifndef FEDTRIGGER_CONFIG_H_
#define FEDTRIGGER_CONFIG_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedtrigger/aggregation.h"
#include "fedtrigger/attack.h"
#include "fedtrigger/federation.h"
#include "fedtrigger/trigger.h"

namespace fedtrigger {

enum class TriggerKind { kFrequency, kPatch };

// One `[attacker]` section. Unset optional fields take experiment-level
// defaults when resolved.
struct AttackerConfig {
  TriggerKind trigger = TriggerKind::kFrequency;
  Channel channel = Channel::kRed;
  int block_u = 15;
  int block_v = 15;
  int block_size = 3;
  double magnitude = 100.0;
  int target = 0;
  int patch_size = 5;
  double transparency = 0.8;
  double r_b = 8.0 / 64.0;
  double r_br = 3.0 / 64.0;
  std::optional<double> gamma;  // default: clients_per_round
  int inject_start = 42;
  int inject_len = 3;
  std::optional<int> client;  // default: attacker index

  AnyTrigger Trigger(int height, int width) const;
};

enum class DatasetSource { kSynth, kRaw };

struct ExperimentConfig {
  FedConfig fed;
  DefenseConfig defense;

  DatasetSource dataset = DatasetSource::kSynth;
  int num_classes = 10;
  int synth_train_per_class = 600;
  int synth_test_per_class = 50;
  std::filesystem::path raw_train;
  std::filesystem::path raw_test;

  bool replay = true;
  ReplayMode replay_mode = ReplayMode::kDirect;
  int attacker_epochs = 40;
  double attacker_lr = 0.01;
  double attacker_lr_decay = 0.1;

  int eval_every_warmup = 5;
  int stealth_images = 100;
  int persistence_window = 30;

  std::vector<AttackerConfig> attackers;

  // Every violated invariant, one message each. Empty when valid.
  std::vector<std::string> Violations() const;
  // Throws ConfigError carrying Violations() when non-empty.
  void Validate() const;
};

// Parses the flat `key = value` format. `#` starts a comment, `[attacker]`
// opens a new attacker section. Throws FormatError naming the line on
// syntax errors, unknown keys and malformed values. Does not validate.
ExperimentConfig ParseConfig(std::string_view text);

// Reads and parses `path`, then validates.
ExperimentConfig LoadConfig(const std::filesystem::path& path);

// Text that ParseConfig maps back to an equal configuration.
std::string SerializeConfig(const ExperimentConfig& cfg);

// Concrete attacker specs. With replay off, each attacker's replay budget
// moves into its own poison ratio: r_b + (n - 1) * r_br, r_br = 0.
std::vector<AttackerSpec> ResolveAttackers(const ExperimentConfig& cfg,
                                           int height = 32, int width = 32);

// Sets one config key as ParseConfig would. `section` < 0 addresses the
// global keys, otherwise the attacker with that index. Throws FormatError.
void SetConfigValue(ExperimentConfig& cfg, int section, std::string_view key,
                    std::string_view value);

}  // namespace fedtrigger

#endif  // FEDTRIGGER_CONFIG_H_
