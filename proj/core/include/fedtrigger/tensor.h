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

#ifndef FEDTRIGGER_TENSOR_H_
#define FEDTRIGGER_TENSOR_H_

#include <cstddef>
#include <vector>

namespace fedtrigger {

struct Shape3 {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

// Channel-major C x H x W image. Pixel values live in [0, 255] for dataset
// images; intermediate (unclipped) images may leave that range.
class ImageTensor {
 public:
  ImageTensor() = default;
  explicit ImageTensor(Shape3 shape, double fill = 0.0)
      : shape_(shape), values_(shape.size(), fill) {}

  const Shape3& shape() const { return shape_; }
  int channels() const { return shape_.channels; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }

  double& at(int c, int y, int x) {
    return values_[(static_cast<std::size_t>(c) * shape_.height + y) *
                       shape_.width +
                   x];
  }
  double at(int c, int y, int x) const {
    return values_[(static_cast<std::size_t>(c) * shape_.height + y) *
                       shape_.width +
                   x];
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  Shape3 shape_;
  std::vector<double> values_;
};

// Row-major dense matrix of reals.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols),
        values_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& at(int r, int c) {
    return values_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double at(int r, int c) const {
    return values_[static_cast<std::size_t>(r) * cols_ + c];
  }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
};

}  // namespace fedtrigger

#endif  // FEDTRIGGER_TENSOR_H_
