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

#ifndef FEDTRIGGER_AGGREGATION_H_
#define FEDTRIGGER_AGGREGATION_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fedtrigger/param_vector.h"
#include "fedtrigger/rng.h"

namespace fedtrigger {

struct ClientUpdate {
  int client_id = 0;
  ParamVector params;  // the client's local model
  std::size_t sample_count = 0;
};

enum class DefenseKind { kNone, kClippedClustering, kDpFedAvg };

std::string DefenseName(DefenseKind kind);  // none | clipcluster | dpfedavg
DefenseKind ParseDefense(const std::string& name);

struct DefenseConfig {
  DefenseKind kind = DefenseKind::kNone;
  // DP-FedAvg clip bound S. A value <= 0 selects the adaptive bound: the
  // lower median of the round's update norms.
  double clip_bound = 0.0;
  double noise_sigma = 0.5;
};

// What the server did with a round's updates.
struct AggregationResult {
  ParamVector params;
  std::vector<double> raw_norms;      // ||theta_i - global||, update order
  std::vector<double> clipped_norms;  // after clipping (== raw when unclipped)
  double clip_bound = 0.0;
  std::vector<int> accepted_clients;  // clients whose deltas were averaged
};

// Lower median: the element at index (n - 1) / 2 of the sorted values.
double LowerMedian(std::vector<double> values);

// global + server_lr * sum_i w_i (theta_i - global), w_i proportional to
// sample_count (equal weights when every count is zero). Computed as
// (1 - server_lr) * global + server_lr * sum_i w_i theta_i.
ParamVector FedAvg(const ParamVector& global,
                   std::span<const ClientUpdate> updates, double server_lr);

// Clip every delta to the lower median of the delta norms, split the clipped
// deltas into two clusters by average-linkage agglomerative clustering on
// cosine distance, and apply the equal-weight mean of the larger cluster
// (ties: the cluster holding the smallest client id). All-zero deltas fall
// back to the plain mean.
AggregationResult ClippedClusteringAgg(const ParamVector& global,
                                       std::span<const ClientUpdate> updates,
                                       double server_lr);

// Scale each delta by min(1, S / ||delta||), average with equal weights and
// add N(0, (sigma * S / m)^2) noise per coordinate, m = number of updates.
AggregationResult DpFedAvgAgg(const ParamVector& global,
                              std::span<const ClientUpdate> updates,
                              double clip_bound, double sigma, double server_lr,
                              Rng& rng);

}  // namespace fedtrigger

#endif  // FEDTRIGGER_AGGREGATION_H_
