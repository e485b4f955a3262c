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

#ifndef FEDTRIGGER_RNG_H_
#define FEDTRIGGER_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace fedtrigger {

using Rng = std::mt19937_64;

// Well-known stream tags so that independent consumers of one experiment seed
// never share a generator.
enum class Stream : std::uint32_t {
  kInit = 1,
  kSelection = 2,
  kClientTraining = 3,
  kPartition = 4,
  kSynthTrain = 5,
  kSynthTest = 6,
  kDpNoise = 7,
  kReplayPool = 8,
  kStealthSample = 9,
};

// Generator seeded from (seed, stream, keys...). Results depend only on the
// arguments, never on call order, so clients can be trained in any order.
inline Rng DeriveRng(std::uint64_t seed, Stream stream,
                     std::initializer_list<std::uint64_t> keys = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(3 + 2 * keys.size());
  words.push_back(static_cast<std::uint32_t>(seed));
  words.push_back(static_cast<std::uint32_t>(seed >> 32));
  words.push_back(static_cast<std::uint32_t>(stream));
  for (std::uint64_t k : keys) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

}  // namespace fedtrigger

#endif  // FEDTRIGGER_RNG_H_
