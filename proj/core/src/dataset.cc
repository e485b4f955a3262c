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

#include "fedtrigger/dataset.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

#include "fedtrigger/errors.h"
#include "fedtrigger/rng.h"

namespace fedtrigger {
namespace {

constexpr int kSide = 32;

// Foreground base colors (RGB), one per class.
constexpr std::array<std::array<double, 3>, 10> kPalette = {{
    {200, 60, 60},
    {60, 190, 70},
    {70, 90, 205},
    {205, 185, 60},
    {180, 70, 190},
    {60, 185, 190},
    {210, 130, 50},
    {120, 200, 140},
    {150, 110, 210},
    {190, 190, 190},
}};

struct Jitter {
  double cy;
  double cx;
  double size;
  double phase;
};

// Foreground coverage in [0, 1] of pixel (y, x) for the pattern of `cls`.
double PatternMask(int cls, int y, int x, const Jitter& j) {
  const double dy = y - j.cy;
  const double dx = x - j.cx;
  switch (cls) {
    case 0:  // filled square
      return (std::abs(dy) <= j.size && std::abs(dx) <= j.size) ? 1.0 : 0.0;
    case 1:  // disc
      return (dy * dy + dx * dx <= j.size * j.size * 1.2) ? 1.0 : 0.0;
    case 2:  // horizontal stripes
      return std::fmod(y + j.phase, 6.0) < 3.0 ? 1.0 : 0.0;
    case 3:  // vertical stripes
      return std::fmod(x + j.phase, 6.0) < 3.0 ? 1.0 : 0.0;
    case 4:  // diagonal stripes
      return std::fmod(x + y + j.phase, 8.0) < 4.0 ? 1.0 : 0.0;
    case 5:  // left-to-right ramp
      return std::clamp((x - j.phase) / 24.0, 0.0, 1.0);
    case 6:  // top-to-bottom ramp
      return std::clamp((y - j.phase) / 24.0, 0.0, 1.0);
    case 7: {  // plus sign
      const double arm = j.size * 0.35;
      const bool vertical = std::abs(dx) <= arm && std::abs(dy) <= j.size * 1.4;
      const bool horizontal = std::abs(dy) <= arm && std::abs(dx) <= j.size * 1.4;
      return (vertical || horizontal) ? 1.0 : 0.0;
    }
    case 8: {  // ring
      const double r = std::sqrt(dy * dy + dx * dx);
      return (r <= j.size * 1.3 && r >= j.size * 0.7) ? 1.0 : 0.0;
    }
    default: {  // checkerboard
      const int cy = static_cast<int>(std::floor((y + j.phase) / 4.0));
      const int cx = static_cast<int>(std::floor((x + j.phase) / 4.0));
      return ((cy + cx) % 2 == 0) ? 1.0 : 0.0;
    }
  }
}

LabeledExample MakeShape(int cls, Rng& rng) {
  std::uniform_real_distribution<double> center(12.0, 20.0);
  std::uniform_real_distribution<double> size(5.0, 8.0);
  std::uniform_real_distribution<double> phase(0.0, 8.0);
  std::uniform_real_distribution<double> hue(-25.0, 25.0);
  std::uniform_real_distribution<double> background(40.0, 90.0);
  std::normal_distribution<double> noise(0.0, 6.0);

  const Jitter j{center(rng), center(rng), size(rng), phase(rng)};
  std::array<double, 3> fg{};
  std::array<double, 3> bg{};
  for (int c = 0; c < 3; ++c) {
    fg[c] = std::clamp(kPalette[cls][c] + hue(rng), 0.0, 255.0);
    bg[c] = background(rng);
  }
  LabeledExample ex{ImageTensor({3, kSide, kSide}), cls};
  for (int y = 0; y < kSide; ++y) {
    for (int x = 0; x < kSide; ++x) {
      const double m = PatternMask(cls, y, x, j);
      for (int c = 0; c < 3; ++c) {
        const double v = bg[c] + m * (fg[c] - bg[c]) + noise(rng);
        ex.image.at(c, y, x) = std::clamp(v, 0.0, 255.0);
      }
    }
  }
  return ex;
}

}  // namespace

void Dataset::Validate() const {
  if (examples.empty()) throw FormatError("dataset is empty");
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    if (ex.label < 0 || ex.label >= class_count) {
      throw FormatError("example " + std::to_string(i) + " has label " +
                        std::to_string(ex.label) + " outside [0, " +
                        std::to_string(class_count) + ")");
    }
    for (double v : ex.image.values()) {
      if (!(v >= 0.0 && v <= 255.0)) {
        throw FormatError("example " + std::to_string(i) +
                          " has a pixel outside [0, 255]");
      }
    }
  }
}

Dataset Subset(const Dataset& ds, std::span<const std::size_t> indices) {
  Dataset out;
  out.class_count = ds.class_count;
  out.examples.reserve(indices.size());
  for (std::size_t i : indices) out.examples.push_back(ds.examples.at(i));
  return out;
}

Dataset SynthShapes(std::uint64_t seed, int n_per_class, int num_classes,
                    Stream stream) {
  if (num_classes < 1 || num_classes > 10) {
    throw ConfigError("synthetic dataset supports 1..10 classes");
  }
  if (n_per_class < 1) throw ConfigError("n_per_class must be >= 1");
  Dataset ds;
  ds.class_count = num_classes;
  ds.examples.reserve(static_cast<std::size_t>(n_per_class) * num_classes);
  for (int cls = 0; cls < num_classes; ++cls) {
    Rng rng = DeriveRng(seed, stream,
                        {static_cast<std::uint64_t>(cls)});
    for (int i = 0; i < n_per_class; ++i) {
      ds.examples.push_back(MakeShape(cls, rng));
    }
  }
  return ds;
}

Dataset ParseRawBin(std::span<const std::uint8_t> bytes, int num_classes) {
  if (bytes.empty()) throw FormatError("raw dataset is empty");
  if (bytes.size() % kRawRecordBytes != 0) {
    throw FormatError("raw dataset length " + std::to_string(bytes.size()) +
                      " is not a multiple of the " +
                      std::to_string(kRawRecordBytes) +
                      "-byte record size (truncated or malformed record " +
                      std::to_string(bytes.size() / kRawRecordBytes) + ")");
  }
  Dataset ds;
  ds.class_count = num_classes;
  const std::size_t n = bytes.size() / kRawRecordBytes;
  ds.examples.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::uint8_t* rec = bytes.data() + r * kRawRecordBytes;
    if (rec[0] >= num_classes) {
      throw FormatError("record " + std::to_string(r) + " has label " +
                        std::to_string(rec[0]) + " >= class count " +
                        std::to_string(num_classes));
    }
    LabeledExample ex{ImageTensor({3, kSide, kSide}), rec[0]};
    std::transform(rec + 1, rec + kRawRecordBytes, ex.image.values().begin(),
                   [](std::uint8_t b) { return static_cast<double>(b); });
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

Dataset ReadRawBin(const std::filesystem::path& path, int num_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open raw dataset " + path.string());
  const std::vector<std::uint8_t> bytes(std::istreambuf_iterator<char>(in), {});
  return ParseRawBin(bytes, num_classes);
}

}  // namespace fedtrigger
