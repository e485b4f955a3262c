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

#include "fedtrigger/stealth.h"

#include <array>
#include <cmath>

#include "fedtrigger/errors.h"

namespace fedtrigger {
namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

void CheckSameShape(const ImageTensor& a, const ImageTensor& b) {
  if (!(a.shape() == b.shape())) {
    throw ShapeError("image metrics need equally shaped images");
  }
}

std::array<double, kWindow * kWindow> GaussianWindow() {
  std::array<double, kWindow * kWindow> w{};
  const int half = kWindow / 2;
  double sum = 0.0;
  for (int y = 0; y < kWindow; ++y) {
    for (int x = 0; x < kWindow; ++x) {
      const double dy = y - half;
      const double dx = x - half;
      const double v = std::exp(-(dy * dy + dx * dx) / (2.0 * kSigma * kSigma));
      w[y * kWindow + x] = v;
      sum += v;
    }
  }
  for (double& v : w) v /= sum;
  return w;
}

}  // namespace

double Psnr(const ImageTensor& a, const ImageTensor& b) {
  CheckSameShape(a, b);
  const auto& va = a.values();
  const auto& vb = b.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = (va[i] - vb[i]) / 255.0;
    sum += d * d;
  }
  if (sum == 0.0) return kInfinitePsnr;
  const double mse = sum / static_cast<double>(va.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double Ssim(const ImageTensor& a, const ImageTensor& b) {
  CheckSameShape(a, b);
  if (a.height() < kWindow || a.width() < kWindow) {
    throw ShapeError("SSIM needs images of at least 11x11 pixels");
  }
  static const std::array<double, kWindow * kWindow> window = GaussianWindow();
  const int out_h = a.height() - kWindow + 1;
  const int out_w = a.width() - kWindow + 1;
  double total = 0.0;
  for (int c = 0; c < a.channels(); ++c) {
    for (int y0 = 0; y0 < out_h; ++y0) {
      for (int x0 = 0; x0 < out_w; ++x0) {
        double mu_a = 0.0, mu_b = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
        for (int y = 0; y < kWindow; ++y) {
          for (int x = 0; x < kWindow; ++x) {
            const double w = window[y * kWindow + x];
            const double pa = a.at(c, y0 + y, x0 + x);
            const double pb = b.at(c, y0 + y, x0 + x);
            mu_a += w * pa;
            mu_b += w * pb;
            aa += w * pa * pa;
            bb += w * pb * pb;
            ab += w * pa * pb;
          }
        }
        const double var_a = aa - mu_a * mu_a;
        const double var_b = bb - mu_b * mu_b;
        const double cov = ab - mu_a * mu_b;
        total += ((2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2)) /
                 ((mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2));
      }
    }
  }
  return total / (static_cast<double>(a.channels()) * out_h * out_w);
}

StealthReport MeasureStealth(const ImageTensor& clean,
                             const ImageTensor& poisoned) {
  return {Ssim(clean, poisoned), Psnr(clean, poisoned)};
}

}  // namespace fedtrigger
