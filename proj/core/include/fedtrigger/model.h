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

#ifndef FEDTRIGGER_MODEL_H_
#define FEDTRIGGER_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fedtrigger/param_vector.h"
#include "fedtrigger/tensor.h"

namespace fedtrigger {

// Valid-padding 2-D convolution.
struct ConvLayer {
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
};
struct DenseLayer {
  int out_dim = 0;
};
struct ReluLayer {};
struct FlattenLayer {};

using LayerDesc = std::variant<ConvLayer, DenseLayer, ReluLayer, FlattenLayer>;

std::string LayerKind(const LayerDesc& layer);

// A feed-forward network description. Construction validates that the layer
// shapes chain from the input to a flat `num_classes`-dimensional output.
//
// Parameter layout in a ParamVector: for every conv or dense layer in order,
// the weights followed by the biases. Conv weights are indexed
// [out][in][ky][kx]; dense weights [out][in].
//
// Inputs are mapped to (x - input_offset) * input_scale before the first
// layer, so datasets can stay in [0, 255] pixel units.
class ModelArch {
 public:
  struct LayerPlan {
    LayerDesc desc;
    Shape3 in_shape;   // flat tensors use {n, 1, 1}
    Shape3 out_shape;
    std::size_t weight_offset = 0;
    std::size_t bias_offset = 0;
    std::size_t param_count = 0;
  };

  ModelArch(Shape3 input, std::vector<LayerDesc> layers, int num_classes,
            double input_scale = 1.0, double input_offset = 0.0);

  // conv 3->8 (3x3, s1), relu, conv 8->16 (3x3, s2), relu, flatten, dense K.
  // Pixels in [0, 255] are centered at 128 and scaled by 1/32 on input.
  static ModelArch TinyConv(int num_classes, Shape3 input = {3, 32, 32});

  const Shape3& input_shape() const { return input_; }
  int num_classes() const { return num_classes_; }
  double input_scale() const { return input_scale_; }
  double input_offset() const { return input_offset_; }
  std::size_t param_count() const { return param_count_; }
  const std::vector<LayerPlan>& plan() const { return plan_; }

 private:
  Shape3 input_;
  int num_classes_;
  double input_scale_;
  double input_offset_;
  std::vector<LayerPlan> plan_;
  std::size_t param_count_ = 0;
};

// PyTorch-style default init: weights and biases ~ U(-1/sqrt(fan_in), ...).
ParamVector InitParams(const ModelArch& arch, std::uint64_t seed);

// Logits for every image, one row per image.
Matrix Forward(const ModelArch& arch, const ParamVector& params,
               std::span<const ImageTensor> batch);

std::vector<int> Predict(const ModelArch& arch, const ParamVector& params,
                         std::span<const ImageTensor> batch);

struct LossAndGradient {
  double loss = 0.0;
  ParamVector grad;
};

// Mean softmax cross-entropy over the batch and its gradient.
LossAndGradient LossAndGrad(const ModelArch& arch, const ParamVector& params,
                            std::span<const ImageTensor> batch,
                            std::span<const int> labels);

// Mean cross-entropy of a logits matrix, computed with log-sum-exp.
double CrossEntropy(const Matrix& logits, std::span<const int> labels);

}  // namespace fedtrigger

#endif  // FEDTRIGGER_MODEL_H_
