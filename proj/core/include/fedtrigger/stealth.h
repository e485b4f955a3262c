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

#ifndef FEDTRIGGER_STEALTH_H_
#define FEDTRIGGER_STEALTH_H_

#include <limits>

#include "fedtrigger/tensor.h"

namespace fedtrigger {

inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

// PSNR in dB with a compatibility quirk: the MSE is taken over pixels divided
// by 255 while the peak stays 255, i.e. 10 log10(255^2 / mean((a-b)^2/255^2)).
// This is the convention under which a 3x3, +100 frequency trigger on a
// 3x32x32 image scores the published constant 81.5933 dB. Returns
// kInfinitePsnr for identical images.
double Psnr(const ImageTensor& a, const ImageTensor& b);

// Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5),
// C1 = (0.01 * 255)^2 and C2 = (0.03 * 255)^2, evaluated on every valid window
// of every channel and averaged. Requires H, W >= 11.
double Ssim(const ImageTensor& a, const ImageTensor& b);

struct StealthReport {
  double ssim = 1.0;
  double psnr = kInfinitePsnr;
};

StealthReport MeasureStealth(const ImageTensor& clean,
                             const ImageTensor& poisoned);

}  // namespace fedtrigger

#endif  // FEDTRIGGER_STEALTH_H_
