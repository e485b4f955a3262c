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

#include "fedtrigger/dct.h"

#include <cmath>
#include <numbers>

#include "fedtrigger/errors.h"

namespace fedtrigger {
namespace {

// a (r x k) * b (k x c), with optional transposition of either operand.
Matrix Multiply(const Matrix& a, bool trans_a, const Matrix& b, bool trans_b) {
  const int rows = trans_a ? a.cols() : a.rows();
  const int inner = trans_a ? a.rows() : a.cols();
  const int cols = trans_b ? b.rows() : b.cols();
  Matrix out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int k = 0; k < inner; ++k) {
      const double av = trans_a ? a.at(k, r) : a.at(r, k);
      for (int c = 0; c < cols; ++c) {
        out.at(r, c) += av * (trans_b ? b.at(c, k) : b.at(k, c));
      }
    }
  }
  return out;
}

void CheckNonEmpty(const Matrix& m) {
  if (m.rows() < 1 || m.cols() < 1) throw ShapeError("DCT of an empty matrix");
}

}  // namespace

Matrix DctBasis(int n) {
  Matrix basis(n, n);
  for (int u = 0; u < n; ++u) {
    const double scale = std::sqrt((u == 0 ? 1.0 : 2.0) / n);
    for (int x = 0; x < n; ++x) {
      basis.at(u, x) =
          scale * std::cos(std::numbers::pi * (2 * x + 1) * u / (2.0 * n));
    }
  }
  return basis;
}

Matrix Dct2(const Matrix& m) {
  CheckNonEmpty(m);
  const Matrix ch = DctBasis(m.rows());
  const Matrix cw = DctBasis(m.cols());
  return Multiply(Multiply(ch, false, m, false), false, cw, true);
}

Matrix Idct2(const Matrix& f) {
  CheckNonEmpty(f);
  const Matrix ch = DctBasis(f.rows());
  const Matrix cw = DctBasis(f.cols());
  return Multiply(Multiply(ch, true, f, false), false, cw, false);
}

}  // namespace fedtrigger
