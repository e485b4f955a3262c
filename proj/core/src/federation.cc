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

#include "fedtrigger/federation.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <numeric>
#include <thread>

#include "fedtrigger/errors.h"
#include "fedtrigger/rng.h"

namespace fedtrigger {
namespace {

constexpr int kEvalChunk = 128;

double FractionCorrect(const ModelArch& arch, const ParamVector& params,
                       const std::vector<ImageTensor>& images,
                       std::span<const int> expected, int constant_expected) {
  if (images.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t begin = 0; begin < images.size(); begin += kEvalChunk) {
    const std::size_t end = std::min(images.size(), begin + kEvalChunk);
    const std::vector<int> pred = Predict(
        arch, params,
        std::span<const ImageTensor>(images.data() + begin, end - begin));
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const int want = expected.empty() ? constant_expected : expected[begin + i];
      if (pred[i] == want) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(images.size());
}

}  // namespace

std::vector<std::string> FedConfig::Violations() const {
  std::vector<std::string> out;
  if (n_clients < 1) out.push_back("n_clients must be >= 1");
  if (clients_per_round < 1 || clients_per_round > n_clients) {
    out.push_back("clients_per_round must be in [1, n_clients]");
  }
  if (total_rounds < 1) out.push_back("total_rounds must be >= 1");
  if (warmup_rounds < 0 || warmup_rounds >= total_rounds) {
    out.push_back("warmup_rounds must be in [0, total_rounds)");
  }
  if (!(server_lr > 0.0) || !std::isfinite(server_lr)) {
    out.push_back("server_lr must be finite and > 0");
  }
  if (local_epochs < 1) out.push_back("local_epochs must be >= 1");
  if (batch_size < 1) out.push_back("batch_size must be >= 1");
  if (!(dirichlet_alpha > 0.0) || !std::isfinite(dirichlet_alpha)) {
    out.push_back("dirichlet_alpha must be finite and > 0");
  }
  if (replay_pool_per_attacker < 0) {
    out.push_back("replay_pool must be >= 0");
  }
  if (threads < 1) out.push_back("threads must be >= 1");
  try {
    sgd.Validate();
  } catch (const ConfigError& e) {
    for (const auto& v : e.violations()) out.push_back("benign sgd: " + v);
  }
  return out;
}

EvaluationSet BuildEvaluationSet(const Dataset& test,
                                 std::span<const AnyTrigger> triggers) {
  if (test.examples.empty()) throw ConfigError("empty test set");
  EvaluationSet eval;
  for (const auto& ex : test.examples) {
    eval.clean_images.push_back(ex.image);
    eval.clean_labels.push_back(ex.label);
  }
  for (const auto& trigger : triggers) {
    const int target = TargetLabel(trigger);
    std::vector<ImageTensor> imgs;
    for (const auto& ex : test.examples) {
      if (ex.label == target) continue;
      imgs.push_back(ApplyTrigger(ex.image, trigger, true).image);
    }
    eval.triggered.push_back(std::move(imgs));
    eval.targets.push_back(target);
  }
  return eval;
}

RoundRecord Evaluate(const ModelArch& arch, const ParamVector& params,
                     const EvaluationSet& eval) {
  RoundRecord rec;
  rec.acc = FractionCorrect(arch, params, eval.clean_images, eval.clean_labels, 0);
  for (std::size_t a = 0; a < eval.triggered.size(); ++a) {
    rec.asr.push_back(
        FractionCorrect(arch, params, eval.triggered[a], {}, eval.targets[a]));
  }
  return rec;
}

double SharedGamma(double gamma, int injecting, bool share) {
  if (!share || injecting <= 1) return gamma;
  return std::max(1.0, gamma / injecting);
}

std::set<int> SequentialInjection(int first, int interval, int duration, int i) {
  return InjectionWindow(first + i * interval, duration);
}

Federation::Federation(ModelArch arch, FedConfig cfg, DefenseConfig defense,
                       std::vector<AttackerSpec> attackers,
                       std::vector<std::vector<LabeledExample>> client_data,
                       ParamVector initial)
    : arch_(std::move(arch)),
      cfg_(cfg),
      defense_(defense),
      attackers_(std::move(attackers)),
      client_data_(std::move(client_data)),
      global_(std::move(initial)) {
  std::vector<std::string> problems = cfg_.Violations();
  if (static_cast<int>(client_data_.size()) != cfg_.n_clients) {
    problems.push_back("expected data for " + std::to_string(cfg_.n_clients) +
                       " clients, got " + std::to_string(client_data_.size()));
  }
  if (global_.size() != arch_.param_count()) {
    problems.push_back("initial parameters do not match the architecture");
  }
  std::vector<int> seen;
  for (const auto& a : attackers_) {
    if (a.client_id < 0 || a.client_id >= cfg_.n_clients) {
      problems.push_back("attacker " + std::to_string(a.id) +
                         " controls a nonexistent client");
    } else if (std::find(seen.begin(), seen.end(), a.client_id) != seen.end()) {
      problems.push_back("attacker " + std::to_string(a.id) +
                         " shares client " + std::to_string(a.client_id));
    }
    seen.push_back(a.client_id);
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));

  bool needs_pool = false;
  for (std::size_t i = 0; i < attackers_.size(); ++i) {
    AttackContext ctx;
    ctx.self_index = static_cast<int>(i);
    for (std::size_t j = 0; j < attackers_.size(); ++j) {
      if (j != i) ctx.others.push_back(attackers_[j].trigger);
    }
    contexts_.push_back(std::move(ctx));
    needs_pool |= attackers_[i].replay_mode == ReplayMode::kPool;
  }
  if (needs_pool) {
    std::vector<std::vector<LabeledExample>> data;
    for (const auto& a : attackers_) data.push_back(client_data_[a.client_id]);
    pool_ = BuildReplayPool(attackers_, data, cfg_.replay_pool_per_attacker,
                            cfg_.seed);
  }
}

std::optional<int> Federation::AttackerOfClient(int client) const {
  for (std::size_t i = 0; i < attackers_.size(); ++i) {
    if (attackers_[i].client_id == client) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::vector<int> Federation::SelectClients(int round) const {
  std::vector<int> selected;
  std::vector<int> rest;
  for (int c = 0; c < cfg_.n_clients; ++c) {
    const auto a = AttackerOfClient(c);
    if (a && attackers_[*a].InjectsAt(round)) {
      selected.push_back(c);
    } else {
      rest.push_back(c);
    }
  }
  Rng rng = DeriveRng(cfg_.seed, Stream::kSelection,
                      {static_cast<std::uint64_t>(round)});
  std::shuffle(rest.begin(), rest.end(), rng);
  const int free_slots =
      std::max(0, cfg_.clients_per_round - static_cast<int>(selected.size()));
  for (int k = 0; k < free_slots && k < static_cast<int>(rest.size()); ++k) {
    selected.push_back(rest[k]);
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

LocalTrainResult Federation::TrainClient(int client, int round) const {
  Rng rng = DeriveRng(cfg_.seed, Stream::kClientTraining,
                      {static_cast<std::uint64_t>(client),
                       static_cast<std::uint64_t>(round)});
  const auto& data = client_data_[client];
  if (const auto a = AttackerOfClient(client)) {
    AttackContext ctx = contexts_[*a];
    ctx.pool = pool_ ? &*pool_ : nullptr;
    return AttackerLocalTrain(arch_, global_, attackers_[*a], ctx, data, round,
                              cfg_.BenignTraining(), rng);
  }
  return TrainLocal(arch_, global_, data, cfg_.BenignTraining(), rng);
}

RoundOutcome Federation::RunRound(int round) {
  RoundOutcome outcome;
  outcome.round = round;
  outcome.selected = SelectClients(round);
  const std::size_t n = outcome.selected.size();

  std::vector<ParamVector> trained(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        trained[i] = TrainClient(outcome.selected[i], round).params;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_threads = std::min<int>(cfg_.threads, static_cast<int>(n));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  int injecting = 0;
  for (const int client : outcome.selected) {
    const auto a = AttackerOfClient(client);
    if (a && attackers_[*a].InjectsAt(round)) ++injecting;
  }
  std::vector<ClientUpdate> updates;
  for (std::size_t i = 0; i < n; ++i) {
    const int client = outcome.selected[i];
    ParamVector params = std::move(trained[i]);
    if (const auto a = AttackerOfClient(client);
        a && attackers_[*a].InjectsAt(round)) {
      params = Amplify(global_, params, SharedGamma(attackers_[*a].gamma, injecting,
                                          cfg_.share_gamma));
      outcome.malicious_clients.push_back(client);
    }
    updates.push_back({client, std::move(params), client_data_[client].size()});
  }

  switch (defense_.kind) {
    case DefenseKind::kNone: {
      AggregationResult& agg = outcome.aggregation;
      for (const auto& u : updates) {
        const double norm = (u.params - global_).Norm();
        agg.raw_norms.push_back(norm);
        agg.clipped_norms.push_back(norm);
        agg.accepted_clients.push_back(u.client_id);
      }
      agg.params = FedAvg(global_, updates, cfg_.server_lr);
      break;
    }
    case DefenseKind::kClippedClustering:
      outcome.aggregation =
          ClippedClusteringAgg(global_, updates, cfg_.server_lr);
      break;
    case DefenseKind::kDpFedAvg: {
      Rng noise_rng = DeriveRng(cfg_.seed, Stream::kDpNoise,
                                {static_cast<std::uint64_t>(round)});
      outcome.aggregation =
          DpFedAvgAgg(global_, updates, defense_.clip_bound,
                      defense_.noise_sigma, cfg_.server_lr, noise_rng);
      break;
    }
  }
  outcome.delta_norm = (outcome.aggregation.params - global_).Norm();
  global_ = outcome.aggregation.params;
  return outcome;
}

}  // namespace fedtrigger
