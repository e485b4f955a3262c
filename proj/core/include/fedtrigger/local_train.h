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

#ifndef FEDTRIGGER_LOCAL_TRAIN_H_
#define FEDTRIGGER_LOCAL_TRAIN_H_

#include <functional>
#include <span>
#include <vector>

#include "fedtrigger/dataset.h"
#include "fedtrigger/model.h"
#include "fedtrigger/param_vector.h"
#include "fedtrigger/rng.h"
#include "fedtrigger/sgd.h"

namespace fedtrigger {

struct LocalTrainConfig {
  int epochs = 2;
  int batch_size = 64;
  SgdConfig sgd;
};

// Rewrites a minibatch in place before its gradient step.
using BatchHook = std::function<void(std::vector<ImageTensor>& images,
                                     std::vector<int>& labels, Rng& rng)>;

struct LocalTrainResult {
  ParamVector params;
  std::vector<double> step_losses;   // loss of every minibatch, in order
  std::vector<double> epoch_losses;  // mean minibatch loss per epoch
};

// Minibatch SGD from `start` with a fresh momentum buffer. Every epoch
// reshuffles the data with `rng`. The learning rate is sgd.learning_rate
// throughout; callers apply per-iteration decay before calling.
// The trailing partial batch is kept. Empty data returns `start` unchanged.
LocalTrainResult TrainLocal(const ModelArch& arch, const ParamVector& start,
                            std::span<const LabeledExample> data,
                            const LocalTrainConfig& cfg, Rng& rng,
                            const BatchHook& hook = {});

}  // namespace fedtrigger

#endif  // FEDTRIGGER_LOCAL_TRAIN_H_
