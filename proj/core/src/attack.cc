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

#include "fedtrigger/attack.h"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>

#include "fedtrigger/errors.h"

namespace fedtrigger {
namespace {

int RoundHalfUp(double x) { return static_cast<int>(std::floor(x + 0.5)); }

// Random permutation of batch positions; the first `own` get the attacker's
// trigger, the next blocks of `per_other` go to each other attacker in turn.
std::vector<int> ShuffledPositions(int n, Rng& rng) {
  std::vector<int> pos(n);
  std::iota(pos.begin(), pos.end(), 0);
  std::shuffle(pos.begin(), pos.end(), rng);
  return pos;
}

PoisonedBatch StartBatch(std::span<const ImageTensor> images,
                         std::span<const int> labels,
                         const BatchComposition& counts) {
  if (images.size() != labels.size()) {
    throw ShapeError("image and label counts differ");
  }
  PoisonedBatch batch;
  batch.images.assign(images.begin(), images.end());
  batch.labels.assign(labels.begin(), labels.end());
  batch.origin.assign(images.size(), kCleanSample);
  batch.counts = counts;
  return batch;
}

}  // namespace

BatchComposition ComposeCounts(int batch_size, double r_b, double r_br,
                               int n_others) {
  if (batch_size < 0 || n_others < 0) {
    throw ConfigError("batch size and attacker count must be non-negative");
  }
  if (!(r_b >= 0.0 && r_b <= 1.0) || !(r_br >= 0.0 && r_br <= 1.0)) {
    throw ConfigError("poison and replay ratios must be in [0, 1]");
  }
  BatchComposition c;
  c.own = RoundHalfUp(r_b * batch_size);
  c.per_other_replay = RoundHalfUp(r_br * batch_size);
  c.clean = batch_size - c.own - n_others * c.per_other_replay;
  if (c.clean < 0) {
    throw ConfigError("batch of " + std::to_string(batch_size) +
                      " cannot hold " + std::to_string(c.own) +
                      " poisoned and " + std::to_string(n_others) + " x " +
                      std::to_string(c.per_other_replay) + " replayed samples");
  }
  return c;
}

std::string ReplayModeName(ReplayMode mode) {
  return mode == ReplayMode::kPool ? "pool" : "direct";
}

std::set<int> InjectionWindow(int first, int duration) {
  std::set<int> rounds;
  for (int k = 0; k < duration; ++k) rounds.insert(first + k);
  return rounds;
}

ReplayPool BuildReplayPool(
    std::span<const AttackerSpec> attackers,
    std::span<const std::vector<LabeledExample>> attacker_data,
    int per_attacker, std::uint64_t seed) {
  if (attackers.size() != attacker_data.size()) {
    throw ShapeError("one local dataset per attacker is required");
  }
  ReplayPool pool;
  pool.partitions.resize(attackers.size());
  for (std::size_t a = 0; a < attackers.size(); ++a) {
    const int target = TargetLabel(attackers[a].trigger);
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < attacker_data[a].size(); ++i) {
      if (attacker_data[a][i].label != target) candidates.push_back(i);
    }
    Rng rng = DeriveRng(seed, Stream::kReplayPool, {a});
    std::shuffle(candidates.begin(), candidates.end(), rng);
    const std::size_t take =
        std::min<std::size_t>(candidates.size(), std::max(per_attacker, 0));
    for (std::size_t k = 0; k < take; ++k) {
      pool.partitions[a].push_back(ApplyTrigger(
          attacker_data[a][candidates[k]].image, attackers[a].trigger, true));
    }
  }
  return pool;
}

PoisonedBatch PoisonBatchDirect(std::span<const ImageTensor> images,
                                std::span<const int> labels,
                                const AttackerSpec& self,
                                std::span<const AnyTrigger> others, Rng& rng) {
  const int n = static_cast<int>(images.size());
  const BatchComposition counts =
      ComposeCounts(n, self.r_b, self.r_br, static_cast<int>(others.size()));
  PoisonedBatch batch = StartBatch(images, labels, counts);
  const std::vector<int> pos = ShuffledPositions(n, rng);
  int next = 0;
  auto convert = [&](const AnyTrigger& trigger, int origin) {
    const int p = pos[next++];
    PoisonedSample s = ApplyTrigger(batch.images[p], trigger, true);
    batch.images[p] = std::move(s.image);
    batch.labels[p] = s.label;
    batch.origin[p] = origin;
  };
  for (int k = 0; k < counts.own; ++k) convert(self.trigger, kOwnSample);
  for (std::size_t j = 0; j < others.size(); ++j) {
    for (int k = 0; k < counts.per_other_replay; ++k) {
      convert(others[j], static_cast<int>(j) + 1);
    }
  }
  return batch;
}

PoisonedBatch PoisonBatchPooled(std::span<const ImageTensor> images,
                                std::span<const int> labels,
                                const AttackerSpec& self, int self_index,
                                const ReplayPool& pool, Rng& rng) {
  const int n = static_cast<int>(images.size());
  const int n_others = static_cast<int>(pool.partitions.size()) - 1;
  if (self_index < 0 || n_others < 0 ||
      self_index >= static_cast<int>(pool.partitions.size())) {
    throw ConfigError("attacker index outside the replay pool");
  }
  const BatchComposition counts = ComposeCounts(n, self.r_b, self.r_br, n_others);
  PoisonedBatch batch = StartBatch(images, labels, counts);
  const std::vector<int> pos = ShuffledPositions(n, rng);
  int next = 0;
  for (int k = 0; k < counts.own; ++k) {
    const int p = pos[next++];
    PoisonedSample s = ApplyTrigger(batch.images[p], self.trigger, true);
    batch.images[p] = std::move(s.image);
    batch.labels[p] = s.label;
    batch.origin[p] = kOwnSample;
  }
  int other_number = 0;
  for (int j = 0; j < static_cast<int>(pool.partitions.size()); ++j) {
    if (j == self_index) continue;
    ++other_number;
    const auto& part = pool.partitions[j];
    if (static_cast<int>(part.size()) < counts.per_other_replay) {
      throw ConfigError("replay pool partition " + std::to_string(j + 1) +
                        " holds " + std::to_string(part.size()) +
                        " samples, batch needs " +
                        std::to_string(counts.per_other_replay));
    }
    if (counts.per_other_replay == 0) continue;
    std::vector<std::size_t> draw(part.size());
    std::iota(draw.begin(), draw.end(), 0);
    std::shuffle(draw.begin(), draw.end(), rng);
    for (int k = 0; k < counts.per_other_replay; ++k) {
      const int p = pos[next++];
      batch.images[p] = part[draw[k]].image;
      batch.labels[p] = part[draw[k]].label;
      batch.origin[p] = other_number;
    }
  }
  return batch;
}

LocalTrainResult AttackerLocalTrain(const ModelArch& arch,
                                    const ParamVector& global,
                                    const AttackerSpec& spec,
                                    const AttackContext& ctx,
                                    std::span<const LabeledExample> data,
                                    int round, const LocalTrainConfig& benign,
                                    Rng& rng) {
  if (!spec.InjectsAt(round)) {
    return TrainLocal(arch, global, data, benign, rng);
  }
  if (spec.replay_mode == ReplayMode::kPool && ctx.pool == nullptr) {
    throw ConfigError("attacker " + std::to_string(spec.id) +
                      " uses pool replay but no pool was built");
  }
  const LocalTrainConfig cfg{spec.local_epochs, benign.batch_size, spec.sgd};
  BatchHook hook = [&](std::vector<ImageTensor>& images,
                       std::vector<int>& labels, Rng& batch_rng) {
    PoisonedBatch pb =
        spec.replay_mode == ReplayMode::kPool
            ? PoisonBatchPooled(images, labels, spec, ctx.self_index, *ctx.pool,
                                batch_rng)
            : PoisonBatchDirect(images, labels, spec, ctx.others, batch_rng);
    images = std::move(pb.images);
    labels = std::move(pb.labels);
  };
  return TrainLocal(arch, global, data, cfg, rng, hook);
}

ParamVector Amplify(const ParamVector& global, const ParamVector& local,
                    double gamma) {
  if (global.size() != local.size()) {
    throw ShapeError("cannot amplify updates of different lengths");
  }
  if (gamma == 1.0) return local;
  ParamVector out = global;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += gamma * (local[i] - global[i]);
  }
  return out;
}

}  // namespace fedtrigger
