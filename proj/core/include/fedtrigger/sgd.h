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

#ifndef FEDTRIGGER_SGD_H_
#define FEDTRIGGER_SGD_H_

#include "fedtrigger/param_vector.h"

namespace fedtrigger {

struct SgdConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  // Multiplicative decay applied once per local epoch:
  // lr_k = learning_rate * (1 - lr_decay_per_iteration)^k for epoch k.
  double lr_decay_per_iteration = 0.0;

  // Throws ConfigError when a field is out of range or non-finite.
  void Validate() const;
  double LearningRateAt(int iteration) const;
};

struct SgdState {
  ParamVector velocity;  // empty until the first step
};

// v <- momentum * v + grad + weight_decay * params
// params <- params - lr * v
void SgdStep(ParamVector& params, const ParamVector& grad, SgdState& state,
             const SgdConfig& cfg, double lr);
inline void SgdStep(ParamVector& params, const ParamVector& grad,
                    SgdState& state, const SgdConfig& cfg) {
  SgdStep(params, grad, state, cfg, cfg.learning_rate);
}

}  // namespace fedtrigger

#endif  // FEDTRIGGER_SGD_H_
