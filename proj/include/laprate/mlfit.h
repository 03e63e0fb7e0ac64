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

#ifndef LAPRATE_MLFIT_H_
#define LAPRATE_MLFIT_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "laprate/blockmath.h"
#include "laprate/error.h"
#include "laprate/random.h"
#include "laprate/spd3.h"

namespace laprate {

// Per-block model: |w_k| ~ Exp(s_k) with s_k = exp(g0 + m_k g1 + n_k g2).
//   L(g)   = w^T s(g) - 1^T A g
//   dL/dg  = A^T (w o s - 1)
//   H(g)   = A^T diag(w o s) A
// H is SPD whenever every w_k > 0 and A has rank 3 (M, N >= 2), so Newton's
// method is well defined on the whole parameter space.

template <typename Real>
using ModelParamsT = Vec3<Real>;
using ModelParams = ModelParamsT<double>;

// Bound on |(A g)_k|; exp() stays far from overflow and underflow.
inline constexpr double kExponentBound = 40.0;

inline constexpr double kInitSlope = 0.05;

struct NewtonOptions {
  double grad_tol = 1e-9;
  int max_iters = 25;
  double damping = 0.0;  // initial Levenberg parameter

  void validate() const {
    check_arg(grad_tol > 0.0, "grad_tol must be positive");
    check_arg(max_iters >= 1, "max_iters must be >= 1");
    check_arg(damping >= 0.0, "damping must be non-negative");
  }
};

template <typename Real>
struct FitResultT {
  ModelParamsT<Real> g_star{};
  std::vector<Real> s_star;
  Mat3<Real> hessian{};
  int iterations = 0;
  bool converged = false;
  Real final_grad_norm = 0;
};

using FitResult = FitResultT<double>;

template <typename Real>
bool within_bound(const ModelParamsT<Real>& g, const DesignMatrix& a) {
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const Real e = a.linear(k, g);
    if (!(std::abs(e) <= Real(kExponentBound))) return false;
  }
  return true;
}

template <typename Real>
void check_bound(const ModelParamsT<Real>& g, const DesignMatrix& a) {
  if (!within_bound(g, a))
    throw Error(ErrorCode::kParameterBound,
                "model parameters exceed the exponent bound");
}

template <typename Real>
std::vector<Real> inv_scales(const ModelParamsT<Real>& g, const DesignMatrix& a) {
  check_bound(g, a);
  std::vector<Real> s(a.rows());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = std::exp(a.linear(k, g));
  return s;
}

template <typename Real>
Real neg_log_likelihood(const ModelParamsT<Real>& g, std::span<const Real> w,
                        const DesignMatrix& a) {
  check_arg(w.size() == a.rows(), "w length != K");
  const auto s = inv_scales(g, a);
  Real sum = 0;
  for (std::size_t k = 0; k < s.size(); ++k) sum += w[k] * s[k] - a.linear(k, g);
  return sum;
}

template <typename Real>
Vec3<Real> nll_gradient(const ModelParamsT<Real>& g, std::span<const Real> w,
                        const DesignMatrix& a) {
  check_arg(w.size() == a.rows(), "w length != K");
  const auto s = inv_scales(g, a);
  Vec3<Real> grad{};
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Real r = w[k] * s[k] - Real(1);
    grad[0] += r;
    grad[1] += r * Real(a.m(k));
    grad[2] += r * Real(a.n(k));
  }
  return grad;
}

template <typename Real>
Mat3<Real> nll_hessian(const ModelParamsT<Real>& g, std::span<const Real> w,
                       const DesignMatrix& a) {
  check_arg(w.size() == a.rows(), "w length != K");
  auto ws = inv_scales(g, a);
  for (std::size_t k = 0; k < ws.size(); ++k) ws[k] *= w[k];
  return a.weighted_gram<Real>(ws);
}

// g1 = g2 = 0.05 and g0 chosen so the first gradient component vanishes:
// g0 = -ln(mean_k w_k exp(g1 m_k + g2 n_k)).
template <typename Real>
ModelParamsT<Real> init_params(std::span<const Real> w, const IndexMaps& maps) {
  check_arg(w.size() == maps.m.size(), "w length != K");
  const Real slope = Real(kInitSlope);
  Real sum = 0;
  Real wsum = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    check_arg(w[k] >= Real(0), "w must be non-negative");
    wsum += w[k];
    sum += w[k] * std::exp(slope * Real(maps.m[k]) + slope * Real(maps.n[k]));
  }
  check_arg(wsum > Real(0), "init_params needs a nonzero w");
  return {-std::log(sum / Real(w.size())), slope, slope};
}

namespace detail {

template <typename Real>
Real inf_norm(const Vec3<Real>& v) {
  return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

// Rounding scale of L(g); steps whose increase stays below it are noise.
template <typename Real>
Real nll_noise(const ModelParamsT<Real>& g, std::span<const Real> w,
               const DesignMatrix& a) {
  Real scale = 0;
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const Real e = a.linear(k, g);
    scale += w[k] * std::exp(e) + std::abs(e);
  }
  return Real(16) * std::numeric_limits<Real>::epsilon() * scale;
}

}  // namespace detail

// Newton iterations g <- g - H^-1 grad from init_params. A step is accepted
// only if L does not increase; otherwise it is halved (up to 20 times) and
// then Levenberg damping H + lambda I is added (lambda from 1e-6, x10).
template <typename Real>
FitResultT<Real> fit_ml(std::span<const Real> w, const DesignMatrix& a,
                        const NewtonOptions& opts = {}) {
  opts.validate();
  check_arg(a.shape().rows() >= 2 && a.shape().cols() >= 2,
            "fit_ml needs M >= 2 and N >= 2");
  check_arg(w.size() == a.rows(), "w length != K");
  for (Real x : w) check_arg(x > Real(0) && std::isfinite(x), "w must be > 0");

  constexpr int kMaxHalvings = 20;
  constexpr double kMaxDamping = 1e20;

  FitResultT<Real> result;
  ModelParamsT<Real> g = init_params(w, a.maps());
  check_bound(g, a);
  Real loss = neg_log_likelihood(g, w, a);
  Vec3<Real> grad = nll_gradient(g, w, a);

  int iter = 0;
  bool stalled = false;
  while (detail::inf_norm(grad) > Real(opts.grad_tol) && iter < opts.max_iters) {
    const Mat3<Real> h = nll_hessian(g, w, a);
    const Real slack = detail::nll_noise(g, w, a);
    double lambda = opts.damping;
    bool accepted = false;
    while (!accepted) {
      Mat3<Real> hd = h;
      for (int i = 0; i < 3; ++i) hd[i][i] += Real(lambda);
      Vec3<Real> step;
      bool solved = true;
      try {
        step = solve_spd3(hd, grad);
      } catch (const Error&) {
        solved = false;
      }
      if (solved) {
        Real scale = 1;
        for (int half = 0; half <= kMaxHalvings && !accepted; ++half) {
          const ModelParamsT<Real> trial = {g[0] - scale * step[0],
                                            g[1] - scale * step[1],
                                            g[2] - scale * step[2]};
          if (within_bound(trial, a)) {
            const Real trial_loss = neg_log_likelihood(trial, w, a);
            if (trial_loss <= loss + slack) {
              g = trial;
              loss = trial_loss;
              accepted = true;
            }
          }
          scale /= 2;
        }
      }
      if (!accepted) {
        lambda = lambda == 0.0 ? 1e-6 : lambda * 10.0;
        if (lambda > kMaxDamping) {
          if (!solved)
            throw Error(ErrorCode::kNotSpd, "damped Hessian is singular");
          stalled = true;
          break;
        }
      }
    }
    if (stalled) break;
    ++iter;
    grad = nll_gradient(g, w, a);
  }

  result.g_star = g;
  result.s_star = inv_scales(g, a);
  result.hessian = nll_hessian(g, w, a);
  result.iterations = iter;
  result.final_grad_norm = detail::inf_norm(grad);
  result.converged = result.final_grad_norm <= Real(opts.grad_tol);
  return result;
}

// Zero-mean Laplace coefficients with scale 1/s_k(g), by inverse CDF.
inline BlockData sample_block(const ModelParams& g, const BlockShape& shape,
                              RandomStream& stream) {
  const DesignMatrix a(shape);
  const auto s = inv_scales(g, a);
  std::vector<double> c(shape.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double u = stream.uniform_open() - 0.5;
    const double mag = -std::log1p(-2.0 * std::abs(u)) / s[k];
    c[k] = u < 0.0 ? -mag : mag;
  }
  return BlockData(shape, Domain::kScaledCoefficient, std::move(c));
}

}  // namespace laprate

#endif  // LAPRATE_MLFIT_H_
