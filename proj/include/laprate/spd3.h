// Copyright 2026 The laprate Authors
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

#ifndef LAPRATE_SPD3_H_
#define LAPRATE_SPD3_H_

#include <array>
#include <cmath>

#include "laprate/error.h"

namespace laprate {

template <typename Real>
using Vec3 = std::array<Real, 3>;

template <typename Real>
using Mat3 = std::array<std::array<Real, 3>, 3>;

// Lower Cholesky factor of a symmetric 3x3 matrix (only the lower triangle
// is read). Returns false if a pivot is not strictly positive.
template <typename Real>
bool cholesky3(const Mat3<Real>& h, Mat3<Real>& l) {
  l = Mat3<Real>{};
  for (int j = 0; j < 3; ++j) {
    Real d = h[j][j];
    for (int p = 0; p < j; ++p) d -= l[j][p] * l[j][p];
    if (!(d > Real(0))) return false;
    l[j][j] = std::sqrt(d);
    for (int i = j + 1; i < 3; ++i) {
      Real s = h[i][j];
      for (int p = 0; p < j; ++p) s -= l[i][p] * l[j][p];
      l[i][j] = s / l[j][j];
    }
  }
  return true;
}

// Solves H x = b for symmetric positive-definite H. Throws kNotSpd otherwise,
// which callers treat as a request to damp.
template <typename Real>
Vec3<Real> solve_spd3(const Mat3<Real>& h, const Vec3<Real>& b) {
  Mat3<Real> l;
  if (!cholesky3(h, l)) throw Error(ErrorCode::kNotSpd, "matrix is not SPD");
  Vec3<Real> y{};
  for (int i = 0; i < 3; ++i) {
    Real s = b[i];
    for (int p = 0; p < i; ++p) s -= l[i][p] * y[p];
    y[i] = s / l[i][i];
  }
  Vec3<Real> x{};
  for (int i = 2; i >= 0; --i) {
    Real s = y[i];
    for (int p = i + 1; p < 3; ++p) s -= l[p][i] * x[p];
    x[i] = s / l[i][i];
  }
  return x;
}

}  // namespace laprate

#endif  // LAPRATE_SPD3_H_
