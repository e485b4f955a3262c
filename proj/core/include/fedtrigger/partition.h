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

#ifndef FEDTRIGGER_PARTITION_H_
#define FEDTRIGGER_PARTITION_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fedtrigger/dataset.h"

namespace fedtrigger {

// Per-client lists of dataset indices. The lists are pairwise disjoint and
// together cover every index exactly once.
struct PartitionPlan {
  std::vector<std::vector<std::size_t>> clients;
};

// Non-IID split. For each class independently, client proportions are drawn
// from Dirichlet(alpha * 1) and the class's (shuffled) examples are handed out
// by largest-remainder rounding of proportion * class_size.
PartitionPlan DirichletPartition(const Dataset& ds, int n_clients,
                                 double alpha, std::uint64_t seed);

// Mean over clients with data of the Shannon entropy (nats) of the client's
// label distribution.
double MeanClassEntropy(const Dataset& ds, const PartitionPlan& plan);

}  // namespace fedtrigger

#endif  // FEDTRIGGER_PARTITION_H_
