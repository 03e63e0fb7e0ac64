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

#ifndef LAPRATE_GRADCHECK_H_
#define LAPRATE_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <vector>

#include "laprate/blockmath.h"
#include "laprate/mlfit.h"
#include "laprate/rate.h"
#include "laprate/random.h"

namespace laprate {

// Finite-difference verification of rate_gradient. The reference perturbs
// each c_k by +-h, keeps the noise frozen, refits g* from scratch and
// re-evaluates the rate. It runs in long double so cancellation in
// R(c + h) - R(c - h) stays well below the compared magnitudes.

enum class FdStencil {
  kTwoPoint,     // (R(c+h) - R(c-h)) / 2h
  kFourthOrder,  // Richardson combination of the +-h and +-2h differences
};

struct GradCheckOptions {
  double step = 1e-5;
  FdStencil stencil = FdStencil::kFourthOrder;
  double magnitude_floor = 1e-8;  // components below this are not compared
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::vector<double> rel_errors;  // one per compared component
  std::vector<double> analytic;
  std::vector<double> numeric;
  double min_s_star = 0.0;
  double max_s_star = 0.0;
};

inline NewtonOptions reference_newton_options() {
  NewtonOptions opts;
  opts.grad_tol = 1e-14;
  opts.max_iters = 100;
  return opts;
}

inline std::vector<double> finite_difference_rate_gradient(
    std::span<const double> c, std::span<const double> eta, double tau,
    double alpha, const DesignMatrix& a, double step, FdStencil stencil) {
  using Real = long double;
  const NewtonOptions newton = reference_newton_options();
  std::vector<Real> cx(c.begin(), c.end());
  const std::vector<Real> ex(eta.begin(), eta.end());
  std::vector<double> grad(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const Real c0 = cx[k];
    auto at = [&](Real offset) {
      cx[k] = c0 + offset;
      const Real r = rate_with_frozen_noise<Real>(cx, ex, Real(tau), Real(alpha),
                                                  a, newton);
      cx[k] = c0;
      return r;
    };
    const Real h = Real(step);
    const Real d1 = (at(h) - at(-h)) / (Real(2) * h);
    if (stencil == FdStencil::kTwoPoint) {
      grad[k] = static_cast<double>(d1);
    } else {
      const Real d2 = (at(Real(2) * h) - at(Real(-2) * h)) / (Real(4) * h);
      grad[k] = static_cast<double>((Real(4) * d1 - d2) / Real(3));
    }
  }
  return grad;
}

inline double relative_error(double x, double y) {
  const double scale = std::max(std::abs(x), std::abs(y));
  return scale == 0.0 ? 0.0 : std::abs(x - y) / scale;
}

inline GradCheckResult gradcheck_block(const BlockData& c, const RateParams& params,
                                       RandomStream& stream,
                                       const GradCheckOptions& opts = {}) {
  const RateEstimate est = estimate_block(c, params, stream, true);
  const DesignMatrix a(c.shape);
  GradCheckResult out;
  out.analytic = *est.gradient;
  out.numeric = finite_difference_rate_gradient(c.values, est.noise,
                                                params.adjust.tau, params.alpha,
                                                a, opts.step, opts.stencil);
  for (std::size_t k = 0; k < out.analytic.size(); ++k) {
    if (std::abs(out.analytic[k]) <= opts.magnitude_floor) continue;
    const double e = relative_error(out.analytic[k], out.numeric[k]);
    out.rel_errors.push_back(e);
    out.max_rel_error = std::max(out.max_rel_error, e);
  }
  const auto [lo, hi] = std::minmax_element(est.fit.s_star.begin(),
                                            est.fit.s_star.end());
  out.min_s_star = *lo;
  out.max_s_star = *hi;
  return out;
}

}  // namespace laprate

#endif  // LAPRATE_GRADCHECK_H_
