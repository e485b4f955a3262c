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

#ifndef FEDTRIGGER_FEDERATION_H_
#define FEDTRIGGER_FEDERATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedtrigger/aggregation.h"
#include "fedtrigger/attack.h"
#include "fedtrigger/dataset.h"
#include "fedtrigger/local_train.h"
#include "fedtrigger/model.h"
#include "fedtrigger/param_vector.h"
#include "fedtrigger/sgd.h"
#include "fedtrigger/trigger.h"

namespace fedtrigger {

struct FedConfig {
  int n_clients = 20;
  int clients_per_round = 10;
  int total_rounds = 80;
  int warmup_rounds = 40;
  double server_lr = 1.0;
  int local_epochs = 2;
  int batch_size = 64;
  SgdConfig sgd{0.01, 0.9, 0.0005, 0.0};
  double dirichlet_alpha = 0.8;
  std::uint64_t seed = 1;
  int replay_pool_per_attacker = 64;
  // Attackers injecting in the same round split gamma evenly, so their
  // combined scaled updates amount to one model replacement.
  bool share_gamma = true;
  int threads = 1;  // client training workers; results do not depend on it

  std::vector<std::string> Violations() const;
  LocalTrainConfig BenignTraining() const {
    return {local_epochs, batch_size, sgd};
  }
};

// Scale used by one of `injecting` attackers in the same round. With sharing
// on, the attackers divide gamma so their combined update is one replacement;
// the result never drops below 1.
double SharedGamma(double gamma, int injecting, bool share);

// Global-model metrics after one round.
struct RoundRecord {
  int round = 0;
  double acc = 0.0;
  std::vector<double> asr;  // one per attacker, experiment order
  double delta_norm = 0.0;  // ||global_after - global_before||
  std::string aggregation;
};

// Clean test images plus, per trigger, the triggered (clipped) copies of the
// test images whose true label differs from the trigger's target.
struct EvaluationSet {
  std::vector<ImageTensor> clean_images;
  std::vector<int> clean_labels;
  std::vector<std::vector<ImageTensor>> triggered;
  std::vector<int> targets;
};

EvaluationSet BuildEvaluationSet(const Dataset& test,
                                 std::span<const AnyTrigger> triggers);

// ACC on clean images and ASR per trigger. `round`, `delta_norm` and
// `aggregation` are left for the caller.
RoundRecord Evaluate(const ModelArch& arch, const ParamVector& params,
                     const EvaluationSet& eval);

// Rounds in which attacker i (0-based) injects when n attackers start at
// `first`, `interval` rounds apart, each for `duration` rounds.
std::set<int> SequentialInjection(int first, int interval, int duration, int i);

struct RoundOutcome {
  int round = 0;
  std::vector<int> selected;           // ascending client ids
  std::vector<int> malicious_clients;  // clients that trained with poisoning
  AggregationResult aggregation;       // per-update norms in `selected` order
  double delta_norm = 0.0;
};

// The server plus its clients. The round loop is sequential; clients within a
// round train on independent generators derived from (seed, client, round).
class Federation {
 public:
  Federation(ModelArch arch, FedConfig cfg, DefenseConfig defense,
             std::vector<AttackerSpec> attackers,
             std::vector<std::vector<LabeledExample>> client_data,
             ParamVector initial);

  // Uniform sample without replacement of clients_per_round clients, with
  // every attacker injecting at `round` force-included.
  std::vector<int> SelectClients(int round) const;

  RoundOutcome RunRound(int round);

  const ParamVector& global() const { return global_; }
  const ModelArch& arch() const { return arch_; }
  const FedConfig& config() const { return cfg_; }
  const std::vector<AttackerSpec>& attackers() const { return attackers_; }
  std::size_t client_size(int client) const {
    return client_data_.at(client).size();
  }

 private:
  LocalTrainResult TrainClient(int client, int round) const;
  std::optional<int> AttackerOfClient(int client) const;

  ModelArch arch_;
  FedConfig cfg_;
  DefenseConfig defense_;
  std::vector<AttackerSpec> attackers_;
  std::vector<std::vector<LabeledExample>> client_data_;
  std::vector<AttackContext> contexts_;
  std::optional<ReplayPool> pool_;
  ParamVector global_;
};

}  // namespace fedtrigger

#endif  // FEDTRIGGER_FEDERATION_H_
