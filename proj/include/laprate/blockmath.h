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

#ifndef LAPRATE_BLOCKMATH_H_
#define LAPRATE_BLOCKMATH_H_

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "laprate/error.h"

namespace laprate {

// M x N block; vectors over the block are flattened row-major, K = M * N.
class BlockShape {
 public:
  BlockShape(int rows, int cols) : rows_(rows), cols_(cols) {
    check_arg(rows >= 1 && cols >= 1, "block shape must be at least 1x1");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return static_cast<std::size_t>(rows_) * cols_; }

  friend bool operator==(const BlockShape&, const BlockShape&) = default;

 private:
  int rows_;
  int cols_;
};

// Row index m_k and column index n_k of each flattened position k.
struct IndexMaps {
  std::vector<int> m;
  std::vector<int> n;
};

inline IndexMaps index_maps(const BlockShape& shape) {
  const int cols = shape.cols();
  IndexMaps maps;
  maps.m.resize(shape.size());
  maps.n.resize(shape.size());
  for (std::size_t k = 0; k < shape.size(); ++k) {
    maps.m[k] = static_cast<int>(k) / cols;
    maps.n[k] = static_cast<int>(k) - cols * maps.m[k];
  }
  return maps;
}

// The K x 3 matrix A = [1 m n]. Only m and n are stored; row(k) expands it.
class DesignMatrix {
 public:
  explicit DesignMatrix(const BlockShape& shape)
      : shape_(shape), maps_(index_maps(shape)) {}

  const BlockShape& shape() const { return shape_; }
  const IndexMaps& maps() const { return maps_; }
  std::size_t rows() const { return shape_.size(); }

  int m(std::size_t k) const { return maps_.m[k]; }
  int n(std::size_t k) const { return maps_.n[k]; }

  template <typename Real = double>
  std::array<Real, 3> row(std::size_t k) const {
    return {Real(1), Real(maps_.m[k]), Real(maps_.n[k])};
  }

  template <typename Real = double>
  Real at(std::size_t k, int j) const {
    return row<Real>(k)[j];
  }

  // (A g)_k = g0 + m_k g1 + n_k g2.
  template <typename Real>
  Real linear(std::size_t k, const std::array<Real, 3>& g) const {
    return g[0] + Real(maps_.m[k]) * g[1] + Real(maps_.n[k]) * g[2];
  }

  // A^T diag(weights) A; pass all-ones weights for the Gram matrix.
  template <typename Real>
  std::array<std::array<Real, 3>, 3> weighted_gram(
      std::span<const Real> weights) const {
    std::array<std::array<Real, 3>, 3> out{};
    for (std::size_t k = 0; k < rows(); ++k) {
      const auto a = row<Real>(k);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j <= i; ++j) out[i][j] += weights[k] * a[i] * a[j];
    }
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) out[i][j] = out[j][i];
    return out;
  }

 private:
  BlockShape shape_;
  IndexMaps maps_;
};

inline DesignMatrix design_matrix(const BlockShape& shape) {
  return DesignMatrix(shape);
}

enum class Domain : uint16_t {
  kPixelResidual,         // r
  kTransformCoefficient,  // d
  kScaledCoefficient,     // c = d / Q
};

struct BlockData {
  BlockShape shape;
  Domain domain;
  std::vector<double> values;

  BlockData(BlockShape shape_in, Domain domain_in, std::vector<double> v)
      : shape(shape_in), domain(domain_in), values(std::move(v)) {
    check_arg(values.size() == shape.size(), "block value count != M*N");
    for (double x : values) check_arg(std::isfinite(x), "non-finite block value");
  }
};

namespace detail {

// Orthonormal DCT-II basis, basis[u * n + x]. Basis and sums are carried in
// long double so a round trip stays within a few ulps of the input.
inline std::vector<long double> dct_basis(int n) {
  std::vector<long double> basis(static_cast<std::size_t>(n) * n);
  const long double dc = std::sqrt(1.0L / n);
  const long double ac = std::sqrt(2.0L / n);
  for (int u = 0; u < n; ++u) {
    for (int x = 0; x < n; ++x) {
      basis[u * n + x] =
          (u == 0 ? dc : ac) *
          std::cos(std::numbers::pi_v<long double> * (2 * x + 1) * u / (2.0L * n));
    }
  }
  return basis;
}

// out = L * in * R^T for row-major in (rows x cols); transpose flags pick
// the inverse direction.
inline std::vector<double> separable_transform(std::span<const double> in,
                                               int rows, int cols,
                                               bool inverse) {
  const auto row_basis = dct_basis(rows);
  const auto col_basis = dct_basis(cols);
  auto rb = [&](int u, int x) {
    return inverse ? row_basis[x * rows + u] : row_basis[u * rows + x];
  };
  auto cb = [&](int v, int y) {
    return inverse ? col_basis[y * cols + v] : col_basis[v * cols + y];
  };
  std::vector<long double> tmp(in.size(), 0.0L);
  for (int i = 0; i < rows; ++i)
    for (int v = 0; v < cols; ++v) {
      long double acc = 0.0L;
      for (int y = 0; y < cols; ++y) acc += cb(v, y) * in[i * cols + y];
      tmp[i * cols + v] = acc;
    }
  std::vector<double> out(in.size(), 0.0);
  for (int u = 0; u < rows; ++u)
    for (int v = 0; v < cols; ++v) {
      long double acc = 0.0L;
      for (int x = 0; x < rows; ++x) acc += rb(u, x) * tmp[x * cols + v];
      out[u * cols + v] = static_cast<double>(acc);
    }
  return out;
}

}  // namespace detail

// Separable orthonormal 2D DCT-II, r -> d.
inline BlockData dct2_forward(const BlockData& block) {
  check_arg(block.domain == Domain::kPixelResidual,
            "dct2_forward expects pixel residuals");
  return BlockData(block.shape, Domain::kTransformCoefficient,
                   detail::separable_transform(block.values, block.shape.rows(),
                                               block.shape.cols(), false));
}

inline BlockData dct2_inverse(const BlockData& block) {
  check_arg(block.domain == Domain::kTransformCoefficient,
            "dct2_inverse expects transform coefficients");
  return BlockData(block.shape, Domain::kPixelResidual,
                   detail::separable_transform(block.values, block.shape.rows(),
                                               block.shape.cols(), true));
}

inline BlockData scale_by_q(const BlockData& block, double q) {
  check_arg(block.domain == Domain::kTransformCoefficient,
            "scale_by_q expects transform coefficients");
  check_arg(q > 0.0 && std::isfinite(q), "quantizer step must be positive");
  std::vector<double> c(block.values.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = block.values[k] / q;
  return BlockData(block.shape, Domain::kScaledCoefficient, std::move(c));
}

// HEVC-style step size, Q = 2^((QP - 4) / 6).
inline double qp_to_step(int qp) {
  check_arg(qp >= 0 && qp <= 51, "QP must be in [0, 51]");
  return std::exp2((qp - 4) / 6.0);
}

// Round half away from zero; level l covers the bin (l - 1/2, l + 1/2].
inline std::vector<int64_t> quantize_round(std::span<const double> t) {
  std::vector<int64_t> levels(t.size());
  for (std::size_t k = 0; k < t.size(); ++k)
    levels[k] = static_cast<int64_t>(std::llround(t[k]));
  return levels;
}

}  // namespace laprate

#endif  // LAPRATE_BLOCKMATH_H_
