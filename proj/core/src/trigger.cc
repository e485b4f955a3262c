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

#include "fedtrigger/trigger.h"

#include <algorithm>
#include <cmath>

#include "fedtrigger/dct.h"
#include "fedtrigger/errors.h"

namespace fedtrigger {
namespace {

Matrix ExtractChannel(const ImageTensor& image, int c) {
  Matrix m(image.height(), image.width());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) m.at(y, x) = image.at(c, y, x);
  }
  return m;
}

bool BlocksOverlap(const TriggerSpec& a, const TriggerSpec& b) {
  const bool rows = a.block_u < b.block_u + b.block_size &&
                    b.block_u < a.block_u + a.block_size;
  const bool cols = a.block_v < b.block_v + b.block_size &&
                    b.block_v < a.block_v + a.block_size;
  return rows && cols;
}

std::string Describe(const TriggerSpec& t) {
  return ChannelName(t.channel) + ":[" + std::to_string(t.block_u) + "," +
         std::to_string(t.block_v) + "]";
}

}  // namespace

std::string ChannelName(Channel c) {
  switch (c) {
    case Channel::kRed:
      return "R";
    case Channel::kGreen:
      return "G";
    case Channel::kBlue:
      return "B";
  }
  return "?";
}

PatchTriggerSpec PatchTriggerSpec::FourCorners(int height, int width,
                                               int patch_size,
                                               double transparency,
                                               int target_label) {
  PatchTriggerSpec spec;
  spec.patch_size = patch_size;
  spec.transparency = transparency;
  spec.target_label = target_label;
  const int bottom = height - patch_size;
  const int right = width - patch_size;
  spec.corners = {{0, 0}, {0, right}, {bottom, 0}, {bottom, right}};
  return spec;
}

int TargetLabel(const AnyTrigger& trigger) {
  return std::visit([](const auto& t) { return t.target_label; }, trigger);
}

PoisonedSample ApplyFreqTrigger(const ImageTensor& image,
                                const TriggerSpec& spec, bool clip) {
  const int c = static_cast<int>(spec.channel);
  if (c < 0 || c >= image.channels()) {
    throw ConfigError("trigger channel " + ChannelName(spec.channel) +
                      " not present in image");
  }
  if (spec.block_size < 1 || spec.block_u < 0 || spec.block_v < 0 ||
      spec.block_u + spec.block_size > image.height() ||
      spec.block_v + spec.block_size > image.width()) {
    throw ConfigError("frequency block " + Describe(spec) + " of size " +
                      std::to_string(spec.block_size) +
                      " does not fit the image");
  }
  PoisonedSample out{image, spec.target_label};
  Matrix freq = Dct2(ExtractChannel(image, c));
  for (int u = spec.block_u; u < spec.block_u + spec.block_size; ++u) {
    for (int v = spec.block_v; v < spec.block_v + spec.block_size; ++v) {
      freq.at(u, v) += spec.magnitude;
    }
  }
  const Matrix spatial = Idct2(freq);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const double v = spatial.at(y, x);
      out.image.at(c, y, x) = clip ? std::clamp(v, 0.0, 255.0) : v;
    }
  }
  return out;
}

PoisonedSample ApplyPatchTrigger(const ImageTensor& image,
                                 const PatchTriggerSpec& spec) {
  for (const auto& [row, col] : spec.corners) {
    if (row < 0 || col < 0 || row + spec.patch_size > image.height() ||
        col + spec.patch_size > image.width()) {
      throw ConfigError("patch at (" + std::to_string(row) + "," +
                        std::to_string(col) + ") does not fit the image");
    }
  }
  const double t = spec.transparency;
  PoisonedSample out{image, spec.target_label};
  for (const auto& [row, col] : spec.corners) {
    for (int c = 0; c < image.channels(); ++c) {
      for (int y = row; y < row + spec.patch_size; ++y) {
        for (int x = col; x < col + spec.patch_size; ++x) {
          out.image.at(c, y, x) = (1.0 - t) * image.at(c, y, x) + t * 255.0;
        }
      }
    }
  }
  return out;
}

PoisonedSample ApplyTrigger(const ImageTensor& image, const AnyTrigger& trigger,
                            bool clip) {
  if (const auto* freq = std::get_if<TriggerSpec>(&trigger)) {
    return ApplyFreqTrigger(image, *freq, clip);
  }
  return ApplyPatchTrigger(image, std::get<PatchTriggerSpec>(trigger));
}

std::vector<std::string> TriggerViolations(const AnyTrigger& trigger,
                                           Shape3 shape, int num_classes) {
  std::vector<std::string> out;
  const int target = TargetLabel(trigger);
  if (target < 0 || target >= num_classes) {
    out.push_back("target label " + std::to_string(target) + " outside [0, " +
                  std::to_string(num_classes) + ")");
  }
  if (const auto* f = std::get_if<TriggerSpec>(&trigger)) {
    if (static_cast<int>(f->channel) >= shape.channels) {
      out.push_back("channel " + ChannelName(f->channel) + " not in image");
    }
    if (f->block_size < 1) out.push_back("block_size must be >= 1");
    if (f->block_u < 0 || f->block_v < 0 ||
        f->block_u + f->block_size > shape.height ||
        f->block_v + f->block_size > shape.width) {
      out.push_back("frequency block " + Describe(*f) + " of size " +
                    std::to_string(f->block_size) + " exceeds " +
                    std::to_string(shape.height) + "x" +
                    std::to_string(shape.width));
    }
    if (!std::isfinite(f->magnitude)) out.push_back("magnitude not finite");
  } else {
    const auto& p = std::get<PatchTriggerSpec>(trigger);
    if (!(p.transparency >= 0.0 && p.transparency <= 1.0)) {
      out.push_back("transparency must be in [0, 1]");
    }
    if (p.patch_size < 1) out.push_back("patch_size must be >= 1");
    for (const auto& [row, col] : p.corners) {
      if (row < 0 || col < 0 || row + p.patch_size > shape.height ||
          col + p.patch_size > shape.width) {
        out.push_back("patch at (" + std::to_string(row) + "," +
                      std::to_string(col) + ") exceeds the image");
      }
    }
  }
  return out;
}

std::vector<std::string> TriggerSetViolations(
    std::span<const AnyTrigger> triggers) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < triggers.size(); ++i) {
    for (std::size_t j = i + 1; j < triggers.size(); ++j) {
      const std::string pair =
          "attackers " + std::to_string(i + 1) + " and " + std::to_string(j + 1);
      const auto* fi = std::get_if<TriggerSpec>(&triggers[i]);
      const auto* fj = std::get_if<TriggerSpec>(&triggers[j]);
      if (fi != nullptr && fj != nullptr) {
        if (fi->channel != fj->channel) continue;
        if (fi->block_u == fj->block_u && fi->block_v == fj->block_v) {
          out.push_back(pair + " share channel and block origin " +
                        Describe(*fi));
        } else if (BlocksOverlap(*fi, *fj)) {
          out.push_back(pair + " have overlapping frequency blocks in channel " +
                        ChannelName(fi->channel));
        }
        continue;
      }
      const auto* pi = std::get_if<PatchTriggerSpec>(&triggers[i]);
      const auto* pj = std::get_if<PatchTriggerSpec>(&triggers[j]);
      if (pi != nullptr && pj != nullptr && pi->corners == pj->corners &&
          pi->patch_size == pj->patch_size &&
          pi->transparency == pj->transparency) {
        out.push_back(pair + " use identical patch triggers");
      }
    }
  }
  return out;
}

}  // namespace fedtrigger
