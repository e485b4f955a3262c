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

#include "fedtrigger/partition.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fedtrigger/errors.h"
#include "fedtrigger/rng.h"

namespace fedtrigger {
namespace {

// Splits `total` items according to `proportions` (summing to 1) with
// largest-remainder rounding; ties go to the lower client index.
std::vector<std::size_t> LargestRemainder(const std::vector<double>& proportions,
                                          std::size_t total) {
  const std::size_t n = proportions.size();
  std::vector<std::size_t> counts(n);
  std::vector<double> remainders(n);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = proportions[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainders[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainders[a] > remainders[b];
  });
  // Floating-point rounding can leave `assigned` a hair above total.
  for (std::size_t i = 0; assigned > total; i = (i + 1) % n) {
    if (counts[order[n - 1 - i]] > 0) {
      --counts[order[n - 1 - i]];
      --assigned;
    }
  }
  for (std::size_t i = 0; assigned < total; i = (i + 1) % n) {
    ++counts[order[i]];
    ++assigned;
  }
  return counts;
}

}  // namespace

PartitionPlan DirichletPartition(const Dataset& ds, int n_clients, double alpha,
                                 std::uint64_t seed) {
  if (n_clients < 1) throw ConfigError("n_clients must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("dirichlet alpha must be finite and > 0");
  }
  PartitionPlan plan;
  plan.clients.resize(n_clients);
  Rng rng = DeriveRng(seed, Stream::kPartition);
  std::gamma_distribution<double> gamma(alpha, 1.0);

  std::vector<std::vector<std::size_t>> by_class(ds.class_count);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    by_class.at(ds.examples[i].label).push_back(i);
  }
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    std::vector<double> props(n_clients);
    double sum = 0.0;
    for (double& p : props) {
      p = gamma(rng);
      sum += p;
    }
    if (sum > 0.0) {
      for (double& p : props) p /= sum;
    } else {
      // All draws underflowed (tiny alpha); give the class to one client.
      std::fill(props.begin(), props.end(), 0.0);
      props[std::uniform_int_distribution<int>(0, n_clients - 1)(rng)] = 1.0;
    }
    const std::vector<std::size_t> counts = LargestRemainder(props, members.size());
    std::size_t next = 0;
    for (int c = 0; c < n_clients; ++c) {
      for (std::size_t k = 0; k < counts[c]; ++k) {
        plan.clients[c].push_back(members[next++]);
      }
    }
  }
  for (auto& list : plan.clients) std::sort(list.begin(), list.end());
  return plan;
}

double MeanClassEntropy(const Dataset& ds, const PartitionPlan& plan) {
  double total = 0.0;
  int counted = 0;
  for (const auto& list : plan.clients) {
    if (list.empty()) continue;
    std::vector<double> hist(ds.class_count, 0.0);
    for (std::size_t i : list) hist[ds.examples[i].label] += 1.0;
    double h = 0.0;
    for (double c : hist) {
      if (c > 0.0) {
        const double p = c / static_cast<double>(list.size());
        h -= p * std::log(p);
      }
    }
    total += h;
    ++counted;
  }
  return counted > 0 ? total / counted : 0.0;
}

}  // namespace fedtrigger
