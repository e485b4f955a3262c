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

#ifndef FEDTRIGGER_ATTACK_H_
#define FEDTRIGGER_ATTACK_H_

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fedtrigger/dataset.h"
#include "fedtrigger/local_train.h"
#include "fedtrigger/model.h"
#include "fedtrigger/param_vector.h"
#include "fedtrigger/rng.h"
#include "fedtrigger/sgd.h"
#include "fedtrigger/trigger.h"

namespace fedtrigger {

// Per-batch sample counts of a poisoning attacker.
struct BatchComposition {
  int own = 0;               // samples carrying the attacker's own trigger
  int per_other_replay = 0;  // replayed samples per other attacker
  int clean = 0;

  friend bool operator==(const BatchComposition&,
                         const BatchComposition&) = default;
};

// own = round(r_b * bs), per_other = round(r_br * bs) (round half up),
// clean = bs - own - n_others * per_other. Throws ConfigError when the clean
// count would be negative.
BatchComposition ComposeCounts(int batch_size, double r_b, double r_br,
                               int n_others);

enum class ReplayMode { kDirect, kPool };

std::string ReplayModeName(ReplayMode mode);

struct AttackerSpec {
  int id = 1;         // 1-based attacker number, used in reports
  int client_id = 0;  // federation client the attacker controls
  AnyTrigger trigger = TriggerSpec{};
  double r_b = 8.0 / 64.0;
  double r_br = 3.0 / 64.0;
  std::set<int> injection_rounds;
  int local_epochs = 6;
  SgdConfig sgd{0.05, 0.9, 0.0005, 0.1};
  double gamma = 10.0;
  ReplayMode replay_mode = ReplayMode::kDirect;

  bool InjectsAt(int round) const { return injection_rounds.contains(round); }
};

// Injection rounds {first + k : 0 <= k < duration}.
std::set<int> InjectionWindow(int first, int duration);

// Poisoned copies of samples per attacker, shared by all attackers. Partition
// i holds samples carrying attacker i's trigger and target label.
struct ReplayPool {
  std::vector<std::vector<PoisonedSample>> partitions;
};

// Every attacker contributes up to `per_attacker` samples drawn from its own
// local data (excluding its target class), triggered with clipping.
ReplayPool BuildReplayPool(
    std::span<const AttackerSpec> attackers,
    std::span<const std::vector<LabeledExample>> attacker_data,
    int per_attacker, std::uint64_t seed);

// Where each sample of a poisoned batch came from.
inline constexpr int kCleanSample = -1;
inline constexpr int kOwnSample = 0;  // others are numbered 1..n_others

struct PoisonedBatch {
  std::vector<ImageTensor> images;
  std::vector<int> labels;
  std::vector<int> origin;
  BatchComposition counts;
};

// Direct replay: a random selection (without replacement) of batch positions
// receives the attacker's own trigger; for every other trigger a further
// disjoint random selection is converted into that trigger's samples.
PoisonedBatch PoisonBatchDirect(std::span<const ImageTensor> images,
                                std::span<const int> labels,
                                const AttackerSpec& self,
                                std::span<const AnyTrigger> others, Rng& rng);

// Pool replay: same composition, but replayed samples are drawn from the pool
// partitions of the other attackers. The attacker's own partition
// (`self_index`) is never sampled. Throws ConfigError on pool underflow.
PoisonedBatch PoisonBatchPooled(std::span<const ImageTensor> images,
                                std::span<const int> labels,
                                const AttackerSpec& self, int self_index,
                                const ReplayPool& pool, Rng& rng);

struct AttackContext {
  int self_index = 0;               // position among the experiment's attackers
  std::vector<AnyTrigger> others;   // the other attackers' triggers, in order
  const ReplayPool* pool = nullptr; // required for ReplayMode::kPool
};

// Local training of a malicious client. In an injection round every minibatch
// is poisoned and the attacker's own epochs/SGD settings apply; otherwise the
// client trains exactly like a benign one with `benign`.
LocalTrainResult AttackerLocalTrain(const ModelArch& arch,
                                    const ParamVector& global,
                                    const AttackerSpec& spec,
                                    const AttackContext& ctx,
                                    std::span<const LabeledExample> data,
                                    int round, const LocalTrainConfig& benign,
                                    Rng& rng);

// Model-replacement scaling: global + gamma * (local - global).
ParamVector Amplify(const ParamVector& global, const ParamVector& local,
                    double gamma);

}  // namespace fedtrigger

#endif  // FEDTRIGGER_ATTACK_H_
