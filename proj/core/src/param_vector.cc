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

#include "fedtrigger/param_vector.h"

#include <cmath>
#include <string>

#include "fedtrigger/errors.h"

namespace fedtrigger {

void ParamVector::CheckCompatible(const ParamVector& other) const {
  if (other.size() != size()) {
    throw ShapeError("parameter vector length mismatch: " +
                     std::to_string(size()) + " vs " +
                     std::to_string(other.size()));
  }
}

ParamVector& ParamVector::operator+=(const ParamVector& other) {
  CheckCompatible(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other[i];
  return *this;
}

ParamVector& ParamVector::operator-=(const ParamVector& other) {
  CheckCompatible(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other[i];
  return *this;
}

ParamVector& ParamVector::operator*=(double factor) {
  for (double& v : values_) v *= factor;
  return *this;
}

ParamVector& ParamVector::AddScaled(const ParamVector& other, double factor) {
  CheckCompatible(other);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    values_[i] += factor * other[i];
  }
  return *this;
}

double ParamVector::Dot(const ParamVector& other) const {
  CheckCompatible(other);
  double sum = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) sum += values_[i] * other[i];
  return sum;
}

double ParamVector::Norm() const { return std::sqrt(Dot(*this)); }

bool ParamVector::AllFinite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace fedtrigger
