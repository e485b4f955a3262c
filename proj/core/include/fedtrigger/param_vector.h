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

#ifndef FEDTRIGGER_PARAM_VECTOR_H_
#define FEDTRIGGER_PARAM_VECTOR_H_

#include <cstddef>
#include <span>
#include <vector>

namespace fedtrigger {

// Flat view of every trainable parameter of a model. The length is fixed at
// construction; arithmetic between vectors of different lengths throws
// ShapeError.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t size, double fill = 0.0)
      : values_(size, fill) {}
  explicit ParamVector(std::vector<double> values)
      : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }
  const std::vector<double>& values() const { return values_; }

  ParamVector& operator+=(const ParamVector& other);
  ParamVector& operator-=(const ParamVector& other);
  ParamVector& operator*=(double factor);
  // this += factor * other
  ParamVector& AddScaled(const ParamVector& other, double factor);

  double Dot(const ParamVector& other) const;
  double Norm() const;
  bool AllFinite() const;

  friend ParamVector operator+(ParamVector a, const ParamVector& b) {
    return a += b;
  }
  friend ParamVector operator-(ParamVector a, const ParamVector& b) {
    return a -= b;
  }
  friend ParamVector operator*(ParamVector a, double f) { return a *= f; }
  friend ParamVector operator*(double f, ParamVector a) { return a *= f; }
  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  void CheckCompatible(const ParamVector& other) const;

  std::vector<double> values_;
};

}  // namespace fedtrigger

#endif  // FEDTRIGGER_PARAM_VECTOR_H_
