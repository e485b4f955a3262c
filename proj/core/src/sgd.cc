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

#include "fedtrigger/sgd.h"

#include <cmath>
#include <string>
#include <vector>

#include "fedtrigger/errors.h"

namespace fedtrigger {

void SgdConfig::Validate() const {
  std::vector<std::string> problems;
  if (!std::isfinite(learning_rate) || learning_rate <= 0.0) {
    problems.push_back("learning_rate must be finite and > 0");
  }
  if (!std::isfinite(momentum) || momentum < 0.0 || momentum >= 1.0) {
    problems.push_back("momentum must be in [0, 1)");
  }
  if (!std::isfinite(weight_decay) || weight_decay < 0.0) {
    problems.push_back("weight_decay must be finite and >= 0");
  }
  if (!std::isfinite(lr_decay_per_iteration) || lr_decay_per_iteration < 0.0 ||
      lr_decay_per_iteration > 1.0) {
    problems.push_back("lr_decay_per_iteration must be in [0, 1]");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

double SgdConfig::LearningRateAt(int iteration) const {
  return learning_rate * std::pow(1.0 - lr_decay_per_iteration, iteration);
}

void SgdStep(ParamVector& params, const ParamVector& grad, SgdState& state,
             const SgdConfig& cfg, double lr) {
  if (grad.size() != params.size()) {
    throw ShapeError("gradient length does not match parameters");
  }
  if (state.velocity.size() == 0) {
    state.velocity = ParamVector(params.size());
  } else if (state.velocity.size() != params.size()) {
    throw ShapeError("momentum buffer length does not match parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& v = state.velocity[i];
    v = cfg.momentum * v + grad[i] + cfg.weight_decay * params[i];
    params[i] -= lr * v;
  }
}

}  // namespace fedtrigger
