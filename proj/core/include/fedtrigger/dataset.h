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

#ifndef FEDTRIGGER_DATASET_H_
#define FEDTRIGGER_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fedtrigger/rng.h"
#include "fedtrigger/tensor.h"

namespace fedtrigger {

struct LabeledExample {
  ImageTensor image;
  int label = 0;
};

struct Dataset {
  std::vector<LabeledExample> examples;
  int class_count = 0;

  std::size_t size() const { return examples.size(); }
  // Throws FormatError if empty, a label is out of range, or a pixel is
  // outside [0, 255].
  void Validate() const;
};

// Copies the selected examples into a new dataset.
Dataset Subset(const Dataset& ds, std::span<const std::size_t> indices);

// Synthetic 3x32x32 stand-in for CIFAR-10: each class is a distinct colored
// geometric pattern (square, disc, stripes in three orientations, gradients,
// cross, ring, checkerboard) with per-sample jitter in position, size, color
// and additive Gaussian noise. Deterministic per (seed, stream); train and
// test splits use different streams. Requires 1 <= num_classes <= 10.
Dataset SynthShapes(std::uint64_t seed, int n_per_class, int num_classes = 10,
                    Stream stream = Stream::kSynthTrain);

// Bytes per record of the CIFAR-10 binary layout: 1 label byte followed by
// 1024 R, 1024 G and 1024 B bytes of a 32x32 image.
inline constexpr std::size_t kRawRecordBytes = 1 + 3 * 32 * 32;

Dataset ReadRawBin(const std::filesystem::path& path, int num_classes);
Dataset ParseRawBin(std::span<const std::uint8_t> bytes, int num_classes);

}  // namespace fedtrigger

#endif  // FEDTRIGGER_DATASET_H_
