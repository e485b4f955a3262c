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

#ifndef FEDTRIGGER_DCT_H_
#define FEDTRIGGER_DCT_H_

#include "fedtrigger/tensor.h"

namespace fedtrigger {

// Orthonormal 2-D DCT-II over the whole matrix:
//   F[u,v] = c(u) c(v) sum_x sum_y M[x,y] cos(pi(2x+1)u / 2H) cos(pi(2y+1)v / 2W)
// with c(0) = sqrt(1/N) and c(k>0) = sqrt(2/N) per dimension. The transform
// matrix is orthogonal, so energy is preserved and Idct2 is its transpose.
Matrix Dct2(const Matrix& m);
Matrix Idct2(const Matrix& f);

// N x N orthonormal DCT-II basis: row u holds c(u) cos(pi(2x+1)u / 2N).
Matrix DctBasis(int n);

}  // namespace fedtrigger

#endif  // FEDTRIGGER_DCT_H_
