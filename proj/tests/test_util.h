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


#ifndef FEDTRIGGER_TESTS_TEST_UTIL_H_
#define FEDTRIGGER_TESTS_TEST_UTIL_H_

#include <random>
#include <vector>

#include "fedtrigger/dataset.h"
#include "fedtrigger/tensor.h"

namespace fedtrigger::testing {

inline ImageTensor RandomImage(std::mt19937_64& rng, Shape3 shape = {3, 32, 32},
                               double lo = 0.0, double hi = 255.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  ImageTensor img(shape);
  for (double& v : img.values()) v = dist(rng);
  return img;
}

inline Matrix RandomMatrix(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

// Integer-valued images, as produced by 8-bit datasets.
inline ImageTensor RandomPixelImage(std::mt19937_64& rng,
                                    Shape3 shape = {3, 32, 32}) {
  std::uniform_int_distribution<int> dist(0, 255);
  ImageTensor img(shape);
  for (double& v : img.values()) v = dist(rng);
  return img;
}

}  // namespace fedtrigger::testing

#endif  // FEDTRIGGER_TESTS_TEST_UTIL_H_
