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

#include "fedtrigger/local_train.h"

#include <algorithm>
#include <numeric>

#include "fedtrigger/errors.h"

namespace fedtrigger {

LocalTrainResult TrainLocal(const ModelArch& arch, const ParamVector& start,
                            std::span<const LabeledExample> data,
                            const LocalTrainConfig& cfg, Rng& rng,
                            const BatchHook& hook) {
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  cfg.sgd.Validate();
  LocalTrainResult result{start, {}, {}};
  if (data.empty()) return result;

  SgdState state;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<ImageTensor> images;
  std::vector<int> labels;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = cfg.sgd.LearningRateAt(epoch);
    double epoch_loss = 0.0;
    int steps = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      images.clear();
      labels.clear();
      for (std::size_t i = begin; i < end; ++i) {
        images.push_back(data[order[i]].image);
        labels.push_back(data[order[i]].label);
      }
      if (hook) hook(images, labels, rng);
      const LossAndGradient lg = LossAndGrad(arch, result.params, images, labels);
      SgdStep(result.params, lg.grad, state, cfg.sgd, lr);
      result.step_losses.push_back(lg.loss);
      epoch_loss += lg.loss;
      ++steps;
    }
    result.epoch_losses.push_back(epoch_loss / steps);
  }
  return result;
}

}  // namespace fedtrigger
