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

#include "fedtrigger/aggregation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fedtrigger/errors.h"

namespace fedtrigger {
namespace {

void CheckUpdates(const ParamVector& global,
                  std::span<const ClientUpdate> updates) {
  if (updates.empty()) throw ConfigError("aggregation needs at least one update");
  for (const auto& u : updates) {
    if (u.params.size() != global.size()) {
      throw ShapeError("update from client " + std::to_string(u.client_id) +
                       " has " + std::to_string(u.params.size()) +
                       " parameters, expected " + std::to_string(global.size()));
    }
  }
}

std::vector<ParamVector> Deltas(const ParamVector& global,
                                std::span<const ClientUpdate> updates) {
  std::vector<ParamVector> deltas;
  deltas.reserve(updates.size());
  for (const auto& u : updates) deltas.push_back(u.params - global);
  return deltas;
}

ParamVector MeanOf(const std::vector<ParamVector>& vectors,
                   const std::vector<int>& members) {
  ParamVector mean(vectors.front().size());
  for (int m : members) mean += vectors[m];
  mean *= 1.0 / static_cast<double>(members.size());
  return mean;
}

ParamVector ApplyDelta(const ParamVector& global, const ParamVector& delta,
                       double server_lr) {
  ParamVector out = global;
  out.AddScaled(delta, server_lr);
  return out;
}

double CosineDistance(const ParamVector& a, double norm_a, const ParamVector& b,
                      double norm_b) {
  if (norm_a == 0.0 || norm_b == 0.0) return 1.0;
  return 1.0 - a.Dot(b) / (norm_a * norm_b);
}

// Average-linkage agglomerative clustering down to two clusters.
std::vector<std::vector<int>> TwoClusters(const std::vector<ParamVector>& deltas,
                                          const std::vector<double>& norms) {
  const int n = static_cast<int>(deltas.size());
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      dist[i][j] = dist[j][i] =
          CosineDistance(deltas[i], norms[i], deltas[j], norms[j]);
    }
  }
  std::vector<std::vector<int>> clusters(n);
  for (int i = 0; i < n; ++i) clusters[i] = {i};
  while (clusters.size() > 2) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_a = 0, best_b = 1;
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        double sum = 0.0;
        for (int i : clusters[a]) {
          for (int j : clusters[b]) sum += dist[i][j];
        }
        const double avg =
            sum / static_cast<double>(clusters[a].size() * clusters[b].size());
        if (avg < best) {
          best = avg;
          best_a = a;
          best_b = b;
        }
      }
    }
    clusters[best_a].insert(clusters[best_a].end(), clusters[best_b].begin(),
                            clusters[best_b].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_b));
  }
  return clusters;
}

}  // namespace

std::string DefenseName(DefenseKind kind) {
  switch (kind) {
    case DefenseKind::kNone:
      return "none";
    case DefenseKind::kClippedClustering:
      return "clipcluster";
    case DefenseKind::kDpFedAvg:
      return "dpfedavg";
  }
  return "none";
}

DefenseKind ParseDefense(const std::string& name) {
  if (name == "none") return DefenseKind::kNone;
  if (name == "clipcluster") return DefenseKind::kClippedClustering;
  if (name == "dpfedavg") return DefenseKind::kDpFedAvg;
  throw ConfigError("unknown defense '" + name +
                    "' (expected none, clipcluster or dpfedavg)");
}

double LowerMedian(std::vector<double> values) {
  if (values.empty()) throw ConfigError("median of an empty set");
  const auto mid = values.begin() +
                   static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

ParamVector FedAvg(const ParamVector& global,
                   std::span<const ClientUpdate> updates, double server_lr) {
  CheckUpdates(global, updates);
  double total = 0.0;
  for (const auto& u : updates) total += static_cast<double>(u.sample_count);
  ParamVector mean(global.size());
  for (const auto& u : updates) {
    const double w = total > 0.0
                         ? static_cast<double>(u.sample_count) / total
                         : 1.0 / static_cast<double>(updates.size());
    mean.AddScaled(u.params, w);
  }
  ParamVector out = global;
  out *= (1.0 - server_lr);
  out.AddScaled(mean, server_lr);
  return out;
}

AggregationResult ClippedClusteringAgg(const ParamVector& global,
                                       std::span<const ClientUpdate> updates,
                                       double server_lr) {
  CheckUpdates(global, updates);
  if (updates.size() < 2) {
    throw ConfigError("clipped clustering needs at least two updates");
  }
  AggregationResult result;
  std::vector<ParamVector> deltas = Deltas(global, updates);
  for (const auto& d : deltas) result.raw_norms.push_back(d.Norm());
  result.clip_bound = LowerMedian(result.raw_norms);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double norm = result.raw_norms[i];
    if (norm > result.clip_bound && norm > 0.0) {
      deltas[i] *= result.clip_bound / norm;
    }
    result.clipped_norms.push_back(std::min(norm, result.clip_bound));
  }

  std::vector<int> all(deltas.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  const bool all_zero = std::all_of(result.clipped_norms.begin(),
                                    result.clipped_norms.end(),
                                    [](double v) { return v == 0.0; });
  std::vector<int> chosen = all;
  if (!all_zero) {
    const auto clusters = TwoClusters(deltas, result.clipped_norms);
    auto min_client = [&](const std::vector<int>& c) {
      int m = std::numeric_limits<int>::max();
      for (int i : c) m = std::min(m, updates[i].client_id);
      return m;
    };
    const auto& a = clusters[0];
    const auto& b = clusters[1];
    if (a.size() != b.size()) {
      chosen = a.size() > b.size() ? a : b;
    } else {
      chosen = min_client(a) < min_client(b) ? a : b;
    }
    std::sort(chosen.begin(), chosen.end());
  }
  for (int i : chosen) result.accepted_clients.push_back(updates[i].client_id);
  result.params = ApplyDelta(global, MeanOf(deltas, chosen), server_lr);
  return result;
}

AggregationResult DpFedAvgAgg(const ParamVector& global,
                              std::span<const ClientUpdate> updates,
                              double clip_bound, double sigma, double server_lr,
                              Rng& rng) {
  CheckUpdates(global, updates);
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("noise sigma must be finite and >= 0");
  }
  AggregationResult result;
  std::vector<ParamVector> deltas = Deltas(global, updates);
  for (const auto& d : deltas) result.raw_norms.push_back(d.Norm());
  result.clip_bound =
      clip_bound > 0.0 ? clip_bound : LowerMedian(result.raw_norms);
  if (!(result.clip_bound > 0.0)) {
    throw ConfigError("DP-FedAvg clip bound must be > 0");
  }
  std::vector<int> all;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double norm = result.raw_norms[i];
    const double factor = norm > 0.0 ? std::min(1.0, result.clip_bound / norm)
                                     : 1.0;
    deltas[i] *= factor;
    result.clipped_norms.push_back(norm * factor);
    all.push_back(static_cast<int>(i));
    result.accepted_clients.push_back(updates[i].client_id);
  }
  ParamVector mean = MeanOf(deltas, all);
  const double stddev =
      sigma * result.clip_bound / static_cast<double>(updates.size());
  if (stddev > 0.0) {
    std::normal_distribution<double> noise(0.0, stddev);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += noise(rng);
  }
  result.params = ApplyDelta(global, mean, server_lr);
  return result;
}

}  // namespace fedtrigger
