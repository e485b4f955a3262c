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

#ifndef FEDTRIGGER_TRIGGER_H_
#define FEDTRIGGER_TRIGGER_H_

#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fedtrigger/tensor.h"

namespace fedtrigger {

enum class Channel { kRed = 0, kGreen = 1, kBlue = 2 };

std::string ChannelName(Channel c);  // "R", "G" or "B"

// Additive perturbation of an s x s block of DCT coefficients of one color
// channel. The block spans [block_u, block_u + s - 1] x
// [block_v, block_v + s - 1] in (row, column) frequency indices.
struct TriggerSpec {
  Channel channel = Channel::kRed;
  int block_u = 15;
  int block_v = 15;
  int block_size = 3;
  double magnitude = 100.0;
  int target_label = 0;
};

// Semi-transparent white square patches blended into every channel:
// pixel <- (1 - t) * pixel + t * 255.
struct PatchTriggerSpec {
  int patch_size = 5;
  std::vector<std::pair<int, int>> corners;  // top-left (row, col) per patch
  double transparency = 0.5;
  int target_label = 0;

  // One patch flush against each of the four image corners.
  static PatchTriggerSpec FourCorners(int height, int width, int patch_size,
                                      double transparency, int target_label);
};

using AnyTrigger = std::variant<TriggerSpec, PatchTriggerSpec>;

int TargetLabel(const AnyTrigger& trigger);

struct PoisonedSample {
  ImageTensor image;
  int label = 0;
};

// dct2 of the selected channel, add `magnitude` to every coefficient of the
// block, idct2 back; other channels are copied untouched. With `clip` the
// perturbed channel is clamped to [0, 255]. Throws ConfigError when the block
// does not fit the image.
PoisonedSample ApplyFreqTrigger(const ImageTensor& image,
                                const TriggerSpec& spec, bool clip);

PoisonedSample ApplyPatchTrigger(const ImageTensor& image,
                                 const PatchTriggerSpec& spec);

// Frequency triggers honor `clip`; patch triggers never leave [0, 255].
PoisonedSample ApplyTrigger(const ImageTensor& image, const AnyTrigger& trigger,
                            bool clip);

// Problems with a single trigger for images of `shape` (empty when valid).
std::vector<std::string> TriggerViolations(const AnyTrigger& trigger,
                                           Shape3 shape, int num_classes);

// Pairwise distinctness within one experiment: frequency triggers must not
// repeat a (channel, block origin) pair nor overlap coefficient blocks within
// one channel; patch triggers must differ in layout or transparency.
std::vector<std::string> TriggerSetViolations(
    std::span<const AnyTrigger> triggers);

}  // namespace fedtrigger

#endif  // FEDTRIGGER_TRIGGER_H_
