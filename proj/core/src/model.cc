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

#include "fedtrigger/model.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedtrigger/errors.h"
#include "fedtrigger/rng.h"

namespace fedtrigger {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool IsFlat(const Shape3& s) { return s.height == 1 && s.width == 1; }

// Dot product with eight independent partial sums so the loop vectorizes
// without reassociation flags. The summation order is fixed, so results are
// reproducible.
double Dot(const double* a, const double* b, std::size_t n) {
  constexpr std::size_t kLanes = 8;
  double lanes[kLanes] = {};
  std::size_t j = 0;
  for (; j + kLanes <= n; j += kLanes) {
    for (std::size_t t = 0; t < kLanes; ++t) lanes[t] += a[j + t] * b[j + t];
  }
  double tail = 0.0;
  for (; j < n; ++j) tail += a[j] * b[j];
  return ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) +
         ((lanes[4] + lanes[5]) + (lanes[6] + lanes[7])) + tail;
}

std::string ShapeString(const Shape3& s) {
  return std::to_string(s.channels) + "x" + std::to_string(s.height) + "x" +
         std::to_string(s.width);
}

void CheckFinite(const std::vector<double>& values, int layer,
                 const LayerDesc& desc) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError(layer, LayerKind(desc));
  }
}

// Unfolds the receptive fields of a valid convolution into a
// (in_channels * k * k) x (out_h * out_w) matrix, row r = (i * k + ky) * k + kx.
void Im2Col(const Shape3& is, const Shape3& os, int k, int s, const double* in,
            std::vector<double>& cols) {
  const std::size_t positions = static_cast<std::size_t>(os.height) * os.width;
  cols.resize(static_cast<std::size_t>(is.channels) * k * k * positions);
  double* dst = cols.data();
  for (int i = 0; i < is.channels; ++i) {
    const double* plane = in + static_cast<std::size_t>(i) * is.height * is.width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        for (int y = 0; y < os.height; ++y) {
          const double* row = plane + (y * s + ky) * is.width + kx;
          for (int x = 0; x < os.width; ++x) *dst++ = row[x * s];
        }
      }
    }
  }
}

void ConvForward(const ModelArch::LayerPlan& lp, const ConvLayer& conv,
                 const double* params, const std::vector<double>& in,
                 std::vector<double>& out, std::vector<double>& cols) {
  const Shape3& is = lp.in_shape;
  const Shape3& os = lp.out_shape;
  const int k = conv.kernel;
  const std::size_t positions = static_cast<std::size_t>(os.height) * os.width;
  const std::size_t rows = static_cast<std::size_t>(is.channels) * k * k;
  Im2Col(is, os, k, conv.stride, in.data(), cols);
  out.resize(os.size());
  const double* w = params + lp.weight_offset;
  const double* b = params + lp.bias_offset;
  for (int o = 0; o < os.channels; ++o) {
    double* op = out.data() + o * positions;
    std::fill(op, op + positions, b[o]);
    const double* wrow = w + o * rows;
    for (std::size_t r = 0; r < rows; ++r) {
      const double wv = wrow[r];
      const double* crow = cols.data() + r * positions;
      for (std::size_t j = 0; j < positions; ++j) op[j] += wv * crow[j];
    }
  }
}

// Accumulates weight/bias gradients into `grad`; writes the input gradient
// into `grad_in` when it is non-null.
void ConvBackward(const ModelArch::LayerPlan& lp, const ConvLayer& conv,
                  const double* params, const std::vector<double>& in,
                  const std::vector<double>& grad_out, double* grad,
                  std::vector<double>* grad_in, std::vector<double>& cols,
                  std::vector<double>& grad_cols) {
  const Shape3& is = lp.in_shape;
  const Shape3& os = lp.out_shape;
  const int k = conv.kernel;
  const int s = conv.stride;
  const std::size_t positions = static_cast<std::size_t>(os.height) * os.width;
  const std::size_t rows = static_cast<std::size_t>(is.channels) * k * k;
  Im2Col(is, os, k, s, in.data(), cols);
  const double* w = params + lp.weight_offset;
  double* gw = grad + lp.weight_offset;
  double* gb = grad + lp.bias_offset;
  if (grad_in != nullptr) grad_cols.assign(rows * positions, 0.0);
  for (int o = 0; o < os.channels; ++o) {
    const double* gop = grad_out.data() + o * positions;
    double bias_sum = 0.0;
    for (std::size_t j = 0; j < positions; ++j) bias_sum += gop[j];
    gb[o] += bias_sum;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* crow = cols.data() + r * positions;
      gw[o * rows + r] += Dot(gop, crow, positions);
      if (grad_in != nullptr) {
        const double wv = w[o * rows + r];
        double* gcrow = grad_cols.data() + r * positions;
        for (std::size_t j = 0; j < positions; ++j) gcrow[j] += wv * gop[j];
      }
    }
  }
  if (grad_in == nullptr) return;
  grad_in->assign(is.size(), 0.0);
  const double* src = grad_cols.data();
  for (int i = 0; i < is.channels; ++i) {
    double* plane = grad_in->data() + static_cast<std::size_t>(i) * is.height * is.width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        for (int y = 0; y < os.height; ++y) {
          double* row = plane + (y * s + ky) * is.width + kx;
          for (int x = 0; x < os.width; ++x) row[x * s] += *src++;
        }
      }
    }
  }
}

void DenseForward(const ModelArch::LayerPlan& lp, const double* params,
                  const std::vector<double>& in, std::vector<double>& out) {
  const int n_in = static_cast<int>(lp.in_shape.size());
  const int n_out = lp.out_shape.channels;
  out.resize(n_out);
  const double* w = params + lp.weight_offset;
  const double* b = params + lp.bias_offset;
  for (int o = 0; o < n_out; ++o) {
    const double* row = w + static_cast<std::size_t>(o) * n_in;
    out[o] = b[o] + Dot(row, in.data(), static_cast<std::size_t>(n_in));
  }
}

void DenseBackward(const ModelArch::LayerPlan& lp, const double* params,
                   const std::vector<double>& in,
                   const std::vector<double>& grad_out, double* grad,
                   std::vector<double>* grad_in) {
  const int n_in = static_cast<int>(lp.in_shape.size());
  const int n_out = lp.out_shape.channels;
  const double* w = params + lp.weight_offset;
  double* gw = grad + lp.weight_offset;
  double* gb = grad + lp.bias_offset;
  if (grad_in != nullptr) grad_in->assign(n_in, 0.0);
  for (int o = 0; o < n_out; ++o) {
    const double g = grad_out[o];
    gb[o] += g;
    double* grow = gw + static_cast<std::size_t>(o) * n_in;
    for (int j = 0; j < n_in; ++j) grow[j] += g * in[j];
    if (grad_in != nullptr) {
      const double* row = w + static_cast<std::size_t>(o) * n_in;
      double* gi = grad_in->data();
      for (int j = 0; j < n_in; ++j) gi[j] += g * row[j];
    }
  }
}

void CheckBatch(const ModelArch& arch, const ParamVector& params,
                std::span<const ImageTensor> batch) {
  if (params.size() != arch.param_count()) {
    throw ShapeError("expected " + std::to_string(arch.param_count()) +
                     " parameters, got " + std::to_string(params.size()));
  }
  for (const ImageTensor& img : batch) {
    if (!(img.shape() == arch.input_shape())) {
      throw ShapeError("image shape " + ShapeString(img.shape()) +
                       " does not match model input " +
                       ShapeString(arch.input_shape()));
    }
  }
}

// Runs one image through the network. `acts[l]` receives the input of layer
// l; the returned vector holds the logits.
std::vector<double> ForwardOne(const ModelArch& arch, const double* params,
                               const ImageTensor& image,
                               std::vector<std::vector<double>>& acts,
                               std::vector<double>& cols) {
  const auto& plan = arch.plan();
  acts.resize(plan.size() + 1);
  acts[0] = image.values();
  for (double& v : acts[0]) {
    v = (v - arch.input_offset()) * arch.input_scale();
  }
  for (std::size_t l = 0; l < plan.size(); ++l) {
    const auto& lp = plan[l];
    const std::vector<double>& in = acts[l];
    std::vector<double>& out = acts[l + 1];
    std::visit(Overloaded{
                   [&](const ConvLayer& c) {
                     ConvForward(lp, c, params, in, out, cols);
                   },
                   [&](const DenseLayer&) { DenseForward(lp, params, in, out); },
                   [&](const ReluLayer&) {
                     out = in;
                     for (double& v : out) v = v > 0.0 ? v : 0.0;
                   },
                   [&](const FlattenLayer&) { out = in; },
               },
               lp.desc);
    CheckFinite(out, static_cast<int>(l), lp.desc);
  }
  return acts.back();
}

double LogSumExp(const double* z, int n) {
  double max_z = z[0];
  for (int j = 1; j < n; ++j) max_z = std::max(max_z, z[j]);
  double sum = 0.0;
  for (int j = 0; j < n; ++j) sum += std::exp(z[j] - max_z);
  return max_z + std::log(sum);
}

}  // namespace

std::string LayerKind(const LayerDesc& layer) {
  return std::visit(Overloaded{
                        [](const ConvLayer&) { return std::string("conv"); },
                        [](const DenseLayer&) { return std::string("dense"); },
                        [](const ReluLayer&) { return std::string("relu"); },
                        [](const FlattenLayer&) { return std::string("flatten"); },
                    },
                    layer);
}

ModelArch::ModelArch(Shape3 input, std::vector<LayerDesc> layers,
                     int num_classes, double input_scale,
                     double input_offset)
    : input_(input),
      num_classes_(num_classes),
      input_scale_(input_scale),
      input_offset_(input_offset) {
  if (input.channels < 1 || input.height < 1 || input.width < 1) {
    throw ShapeError("input shape must be positive");
  }
  if (num_classes < 1) throw ShapeError("class count must be >= 1");
  if (!std::isfinite(input_scale) || !std::isfinite(input_offset)) {
    throw ShapeError("input scale and offset must be finite");
  }
  Shape3 cur = input;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    LayerPlan lp;
    lp.desc = layers[l];
    lp.in_shape = cur;
    const std::string where = "layer " + std::to_string(l) + " (" +
                              LayerKind(layers[l]) + "): ";
    std::visit(
        Overloaded{
            [&](const ConvLayer& c) {
              if (c.out_channels < 1 || c.kernel < 1 || c.stride < 1) {
                throw ShapeError(where + "non-positive conv hyperparameter");
              }
              if (c.kernel > cur.height || c.kernel > cur.width) {
                throw ShapeError(where + "kernel larger than input " +
                                 ShapeString(cur));
              }
              lp.out_shape = {c.out_channels,
                              (cur.height - c.kernel) / c.stride + 1,
                              (cur.width - c.kernel) / c.stride + 1};
              const std::size_t n_weights = static_cast<std::size_t>(
                  c.out_channels) * cur.channels * c.kernel * c.kernel;
              lp.weight_offset = offset;
              lp.bias_offset = offset + n_weights;
              lp.param_count = n_weights + c.out_channels;
            },
            [&](const DenseLayer& d) {
              if (!IsFlat(cur)) {
                throw ShapeError(where + "dense layer needs a flat input, got " +
                                 ShapeString(cur));
              }
              if (d.out_dim < 1) throw ShapeError(where + "out_dim must be >= 1");
              lp.out_shape = {d.out_dim, 1, 1};
              const std::size_t n_weights =
                  static_cast<std::size_t>(d.out_dim) * cur.channels;
              lp.weight_offset = offset;
              lp.bias_offset = offset + n_weights;
              lp.param_count = n_weights + d.out_dim;
            },
            [&](const ReluLayer&) { lp.out_shape = cur; },
            [&](const FlattenLayer&) {
              lp.out_shape = {static_cast<int>(cur.size()), 1, 1};
            },
        },
        lp.desc);
    offset += lp.param_count;
    cur = lp.out_shape;
    plan_.push_back(lp);
  }
  if (!IsFlat(cur) || cur.channels != num_classes) {
    throw ShapeError("network output " + ShapeString(cur) + " is not a " +
                     std::to_string(num_classes) + "-dim logit vector");
  }
  param_count_ = offset;
}

ModelArch ModelArch::TinyConv(int num_classes, Shape3 input) {
  return ModelArch(input,
                   {ConvLayer{8, 3, 1}, ReluLayer{}, ConvLayer{16, 3, 2},
                    ReluLayer{}, FlattenLayer{}, DenseLayer{num_classes}},
                   num_classes, 1.0 / 32.0, 128.0);
}

ParamVector InitParams(const ModelArch& arch, std::uint64_t seed) {
  Rng rng = DeriveRng(seed, Stream::kInit);
  ParamVector params(arch.param_count());
  for (const auto& lp : arch.plan()) {
    if (lp.param_count == 0) continue;
    const std::size_t n_weights = lp.bias_offset - lp.weight_offset;
    const std::size_t n_bias = lp.param_count - n_weights;
    const double fan_in = static_cast<double>(n_weights) / n_bias;
    const double bound = 1.0 / std::sqrt(fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < lp.param_count; ++i) {
      params[lp.weight_offset + i] = dist(rng);
    }
  }
  return params;
}

Matrix Forward(const ModelArch& arch, const ParamVector& params,
               std::span<const ImageTensor> batch) {
  CheckBatch(arch, params, batch);
  Matrix logits(static_cast<int>(batch.size()), arch.num_classes());
  std::vector<std::vector<double>> acts;
  std::vector<double> cols;
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const std::vector<double> z =
        ForwardOne(arch, params.values().data(), batch[n], acts, cols);
    std::copy(z.begin(), z.end(), &logits.at(static_cast<int>(n), 0));
  }
  return logits;
}

std::vector<int> Predict(const ModelArch& arch, const ParamVector& params,
                         std::span<const ImageTensor> batch) {
  const Matrix logits = Forward(arch, params, batch);
  std::vector<int> out(batch.size());
  for (int r = 0; r < logits.rows(); ++r) {
    int best = 0;
    for (int c = 1; c < logits.cols(); ++c) {
      if (logits.at(r, c) > logits.at(r, best)) best = c;
    }
    out[r] = best;
  }
  return out;
}

double CrossEntropy(const Matrix& logits, std::span<const int> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size()) {
    throw ShapeError("label count does not match logits rows");
  }
  double total = 0.0;
  for (int r = 0; r < logits.rows(); ++r) {
    const double* z = logits.values().data() + static_cast<std::size_t>(r) * logits.cols();
    total += LogSumExp(z, logits.cols()) - z[labels[r]];
  }
  return logits.rows() > 0 ? total / logits.rows() : 0.0;
}

LossAndGradient LossAndGrad(const ModelArch& arch, const ParamVector& params,
                            std::span<const ImageTensor> batch,
                            std::span<const int> labels) {
  CheckBatch(arch, params, batch);
  if (labels.size() != batch.size()) {
    throw ShapeError("label count does not match batch size");
  }
  if (batch.empty()) throw ShapeError("empty batch");
  const int k = arch.num_classes();
  for (int y : labels) {
    if (y < 0 || y >= k) {
      throw ShapeError("label " + std::to_string(y) + " outside [0, " +
                       std::to_string(k) + ")");
    }
  }
  const auto& plan = arch.plan();
  const double* p = params.values().data();
  LossAndGradient result;
  result.grad = ParamVector(params.size());
  double* grad = result.grad.span().data();
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  std::vector<std::vector<double>> acts;
  std::vector<double> grad_out;
  std::vector<double> grad_in;
  std::vector<double> cols;
  std::vector<double> grad_cols;
  double total_loss = 0.0;
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const std::vector<double> z = ForwardOne(arch, p, batch[n], acts, cols);
    const double lse = LogSumExp(z.data(), k);
    total_loss += lse - z[labels[n]];
    grad_out.resize(k);
    for (int j = 0; j < k; ++j) {
      grad_out[j] = std::exp(z[j] - lse) * inv_batch;
    }
    grad_out[labels[n]] -= inv_batch;

    for (std::size_t l = plan.size(); l-- > 0;) {
      const auto& lp = plan[l];
      std::vector<double>* gin = l > 0 ? &grad_in : nullptr;
      std::visit(Overloaded{
                     [&](const ConvLayer& c) {
                       ConvBackward(lp, c, p, acts[l], grad_out, grad, gin, cols,
                                    grad_cols);
                     },
                     [&](const DenseLayer&) {
                       DenseBackward(lp, p, acts[l], grad_out, grad, gin);
                     },
                     [&](const ReluLayer&) {
                       if (gin == nullptr) return;
                       grad_in = grad_out;
                       const std::vector<double>& out = acts[l + 1];
                       for (std::size_t j = 0; j < grad_in.size(); ++j) {
                         if (out[j] <= 0.0) grad_in[j] = 0.0;
                       }
                     },
                     [&](const FlattenLayer&) {
                       if (gin != nullptr) grad_in = grad_out;
                     },
                 },
                 lp.desc);
      if (gin != nullptr) {
        CheckFinite(grad_in, static_cast<int>(l), lp.desc);
        std::swap(grad_out, grad_in);
      }
    }
  }
  for (const auto& lp : plan) {
    for (std::size_t i = 0; i < lp.param_count; ++i) {
      if (!std::isfinite(grad[lp.weight_offset + i])) {
        throw NumericError(static_cast<int>(&lp - plan.data()),
                           LayerKind(lp.desc));
      }
    }
  }
  result.loss = total_loss * inv_batch;
  return result;
}

}  // namespace fedtrigger
