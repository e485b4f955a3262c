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


#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "fedtrigger/errors.h"
#include "fedtrigger/model.h"
#include "fedtrigger/param_vector.h"
#include "fedtrigger/sgd.h"
#include "test_util.h"

namespace fedtrigger {
namespace {

using testing::RandomImage;

TEST(ParamVectorTest, ArithmeticAndNorm) {
  ParamVector a(std::vector<double>{3.0, 4.0});
  ParamVector b(std::vector<double>{1.0, -1.0});
  EXPECT_DOUBLE_EQ(a.Norm(), 5.0);
  EXPECT_DOUBLE_EQ(a.Dot(b), -1.0);
  EXPECT_EQ(a + b, ParamVector(std::vector<double>{4.0, 3.0}));
  EXPECT_EQ(a - b, ParamVector(std::vector<double>{2.0, 5.0}));
  EXPECT_EQ(2.0 * a, ParamVector(std::vector<double>{6.0, 8.0}));
  a.AddScaled(b, 0.5);
  EXPECT_EQ(a, ParamVector(std::vector<double>{3.5, 3.5}));
}

TEST(ParamVectorTest, LengthMismatchThrows) {
  ParamVector a(3);
  ParamVector b(4);
  EXPECT_THROW(a += b, ShapeError);
  EXPECT_THROW(a.Dot(b), ShapeError);
}

TEST(ParamVectorTest, AllFinite) {
  ParamVector a(3, 1.0);
  EXPECT_TRUE(a.AllFinite());
  a[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(a.AllFinite());
}

TEST(SgdTest, WeightDecayOnlyScalesParams) {
  const SgdConfig cfg{0.1, 0.9, 0.01, 0.0};
  ParamVector p(std::vector<double>{2.0, -4.0});
  SgdState state;
  SgdStep(p, ParamVector(2), state, cfg);
  EXPECT_DOUBLE_EQ(p[0], 2.0 * (1.0 - 0.1 * 0.01));
  EXPECT_DOUBLE_EQ(p[1], -4.0 * (1.0 - 0.1 * 0.01));
}

TEST(SgdTest, MomentumAccumulates) {
  const SgdConfig cfg{0.5, 0.9, 0.0, 0.0};
  ParamVector p(1, 0.0);
  ParamVector g(1, 1.0);
  SgdState state;
  SgdStep(p, g, state, cfg);
  EXPECT_DOUBLE_EQ(p[0], -0.5);
  SgdStep(p, g, state, cfg);
  EXPECT_DOUBLE_EQ(p[0], -0.5 - 0.5 * 1.9);
}

TEST(SgdTest, DecayPerEpoch) {
  const SgdConfig cfg{0.05, 0.9, 0.0005, 0.1};
  EXPECT_DOUBLE_EQ(cfg.LearningRateAt(0), 0.05);
  EXPECT_NEAR(cfg.LearningRateAt(2), 0.05 * 0.81, 1e-15);
}

TEST(SgdTest, ValidateRejectsBadValues) {
  EXPECT_THROW((SgdConfig{0.0, 0.9, 0.0, 0.0}.Validate()), ConfigError);
  EXPECT_THROW((SgdConfig{0.1, 1.0, 0.0, 0.0}.Validate()), ConfigError);
  EXPECT_THROW((SgdConfig{0.1, 0.5, -1.0, 0.0}.Validate()), ConfigError);
  EXPECT_THROW((SgdConfig{0.1, 0.5, 0.0, 1.5}.Validate()), ConfigError);
  EXPECT_NO_THROW((SgdConfig{}.Validate()));
}

TEST(ModelTest, TinyConvLayout) {
  const ModelArch arch = ModelArch::TinyConv(10);
  // conv 3->8 k3: 8*27+8; conv 8->16 k3: 16*72+16; dense 16*14*14 -> 10.
  EXPECT_EQ(arch.param_count(), 224u + 1168u + 31370u);
  EXPECT_EQ(arch.plan()[0].out_shape, (Shape3{8, 30, 30}));
  EXPECT_EQ(arch.plan()[2].out_shape, (Shape3{16, 14, 14}));
}

TEST(ModelTest, RejectsChainsThatDoNotEndInLogits) {
  EXPECT_THROW(ModelArch({3, 8, 8}, {ConvLayer{4, 3, 1}}, 10), ShapeError);
  EXPECT_THROW(ModelArch({3, 8, 8}, {DenseLayer{10}}, 10), ShapeError);
  EXPECT_THROW(ModelArch({3, 2, 2}, {ConvLayer{4, 3, 1}, FlattenLayer{},
                                     DenseLayer{10}},
                         10),
               ShapeError);
}

TEST(ModelTest, ZeroParamsGiveZeroLogits) {
  const ModelArch arch = ModelArch::TinyConv(10);
  std::mt19937_64 rng(1);
  std::vector<ImageTensor> batch{RandomImage(rng), RandomImage(rng)};
  const Matrix logits = Forward(arch, ParamVector(arch.param_count()), batch);
  for (double v : logits.values()) EXPECT_EQ(v, 0.0);
}

TEST(ModelTest, IdentityDenseLayerPassesInputThrough) {
  const ModelArch arch({4, 1, 1}, {FlattenLayer{}, DenseLayer{4}}, 4);
  ParamVector p(arch.param_count());
  for (int i = 0; i < 4; ++i) p[i * 4 + i] = 1.0;
  ImageTensor x({4, 1, 1});
  x.values() = {0.5, -1.0, 2.0, 3.25};
  const Matrix logits = Forward(arch, p, std::vector<ImageTensor>{x});
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(logits.at(0, i), x.values()[i]);
}

// Direct valid convolution with the documented [out][in][ky][kx] layout.
std::vector<double> NaiveConv(const ImageTensor& x, const double* w,
                              const double* b, int out_c, int k, int stride) {
  const int oh = (x.height() - k) / stride + 1;
  const int ow = (x.width() - k) / stride + 1;
  std::vector<double> out;
  for (int o = 0; o < out_c; ++o) {
    for (int y = 0; y < oh; ++y) {
      for (int xx = 0; xx < ow; ++xx) {
        double s = b[o];
        for (int c = 0; c < x.channels(); ++c) {
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              s += w[((o * x.channels() + c) * k + ky) * k + kx] *
                   x.at(c, y * stride + ky, xx * stride + kx);
            }
          }
        }
        out.push_back(s);
      }
    }
  }
  return out;
}

TEST(ModelTest, ConvMatchesDirectConvolution) {
  // A 1-output-per-position dense head of identity weights exposes the conv
  // output as logits.
  const int oc = 2, k = 3, stride = 2;
  const Shape3 in{3, 7, 9};
  const int oh = (in.height - k) / stride + 1, ow = (in.width - k) / stride + 1;
  const int n = oc * oh * ow;
  const ModelArch arch(in, {ConvLayer{oc, k, stride}, FlattenLayer{},
                            DenseLayer{n}},
                       n);
  std::mt19937_64 rng(7);
  ParamVector p = InitParams(arch, 3);
  const auto& dense = arch.plan()[2];
  for (std::size_t i = 0; i < dense.param_count; ++i) p[dense.weight_offset + i] = 0;
  for (int i = 0; i < n; ++i) p[dense.weight_offset + i * n + i] = 1.0;
  const ImageTensor x = RandomImage(rng, in, -1.0, 1.0);
  const Matrix logits = Forward(arch, p, std::vector<ImageTensor>{x});
  const auto& conv = arch.plan()[0];
  const auto expect = NaiveConv(x, &p.span()[conv.weight_offset],
                                &p.span()[conv.bias_offset], oc, k, stride);
  ASSERT_EQ(static_cast<int>(expect.size()), n);
  for (int i = 0; i < n; ++i) EXPECT_NEAR(logits.at(0, i), expect[i], 1e-12);
}

TEST(ModelTest, InputScaleAndOffsetPreprocess) {
  const std::vector<LayerDesc> layers{ConvLayer{4, 3, 1}, ReluLayer{},
                                      FlattenLayer{}, DenseLayer{3}};
  const ModelArch scaled({3, 6, 6}, layers, 3, 0.25, 100.0);
  const ModelArch plain({3, 6, 6}, layers, 3);
  std::mt19937_64 rng(8);
  const ParamVector p = InitParams(plain, 4);
  ImageTensor x = RandomImage(rng, {3, 6, 6});
  ImageTensor mapped = x;
  for (double& v : mapped.values()) v = (v - 100.0) * 0.25;
  const Matrix a = Forward(scaled, p, std::vector<ImageTensor>{x});
  const Matrix b = Forward(plain, p, std::vector<ImageTensor>{mapped});
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(a.at(0, j), b.at(0, j), 1e-12);
}

TEST(ModelTest, CrossEntropyMatchesClosedForm) {
  Matrix logits(2, 3);
  logits.values() = {0.0, 0.0, 0.0, 1.0, 2.0, 3.0};
  const std::vector<int> labels{1, 2};
  const double row0 = std::log(3.0);
  const double row1 =
      -std::log(std::exp(3.0) / (std::exp(1.0) + std::exp(2.0) + std::exp(3.0)));
  EXPECT_NEAR(CrossEntropy(logits, labels), 0.5 * (row0 + row1), 1e-14);
}

TEST(ModelTest, CrossEntropyIsStableForLargeLogits) {
  Matrix logits(1, 2);
  logits.values() = {1000.0, 0.0};
  EXPECT_NEAR(CrossEntropy(logits, std::vector<int>{0}), 0.0, 1e-12);
  EXPECT_NEAR(CrossEntropy(logits, std::vector<int>{1}), 1000.0, 1e-9);
}

TEST(ModelTest, GradientMatchesFiniteDifferences) {
  const ModelArch arch({3, 9, 9},
                       {ConvLayer{4, 3, 2}, ReluLayer{}, ConvLayer{5, 2, 1},
                        ReluLayer{}, FlattenLayer{}, DenseLayer{3}},
                       3, 1.0 / 32.0, 128.0);
  std::mt19937_64 rng(11);
  const ParamVector p = InitParams(arch, 5);
  std::vector<ImageTensor> batch;
  for (int i = 0; i < 3; ++i) batch.push_back(RandomImage(rng, {3, 9, 9}));
  const std::vector<int> labels{0, 2, 1};
  const ParamVector g = LossAndGrad(arch, p, batch, labels).grad;
  const double h = 1e-6;
  for (std::size_t i = 0; i < p.size(); ++i) {
    ParamVector up = p, down = p;
    up[i] += h;
    down[i] -= h;
    const double numeric =
        (CrossEntropy(Forward(arch, up, batch), labels) -
         CrossEntropy(Forward(arch, down, batch), labels)) /
        (2 * h);
    const double scale = std::max({std::abs(numeric), std::abs(g[i]), 1e-6});
    EXPECT_LE(std::abs(numeric - g[i]) / scale, 1e-4) << "coordinate " << i;
  }
}

TEST(ModelTest, LossMatchesForward) {
  const ModelArch arch = ModelArch::TinyConv(10);
  std::mt19937_64 rng(2);
  const ParamVector p = InitParams(arch, 2);
  std::vector<ImageTensor> batch{RandomImage(rng), RandomImage(rng)};
  const std::vector<int> labels{3, 7};
  EXPECT_NEAR(LossAndGrad(arch, p, batch, labels).loss,
              CrossEntropy(Forward(arch, p, batch), labels), 1e-12);
}

TEST(ModelTest, NonFiniteActivationsRaiseNumericError) {
  const ModelArch arch = ModelArch::TinyConv(10);
  ParamVector p = InitParams(arch, 1);
  p[0] = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(3);
  std::vector<ImageTensor> batch{RandomImage(rng)};
  try {
    Forward(arch, p, batch);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_EQ(e.layer_index(), 0);
  }
}

TEST(ModelTest, ShapeErrors) {
  const ModelArch arch = ModelArch::TinyConv(10);
  std::mt19937_64 rng(4);
  std::vector<ImageTensor> wrong{RandomImage(rng, {3, 16, 16})};
  EXPECT_THROW(Forward(arch, InitParams(arch, 1), wrong), ShapeError);
  std::vector<ImageTensor> ok{RandomImage(rng)};
  EXPECT_THROW(Forward(arch, ParamVector(5), ok), ShapeError);
  EXPECT_THROW(LossAndGrad(arch, InitParams(arch, 1), ok, std::vector<int>{10}),
               ShapeError);
}

TEST(ModelTest, InitIsDeterministicAndBounded) {
  const ModelArch arch = ModelArch::TinyConv(10);
  const ParamVector a = InitParams(arch, 9);
  EXPECT_EQ(a, InitParams(arch, 9));
  EXPECT_NE(a, InitParams(arch, 10));
  // First conv: fan_in 27.
  const double bound = 1.0 / std::sqrt(27.0);
  for (std::size_t i = 0; i < arch.plan()[0].param_count; ++i) {
    EXPECT_LE(std::abs(a[i]), bound);
  }
}

}  // namespace
}  // namespace fedtrigger
