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

#ifndef LAPRATE_RATE_H_
#define LAPRATE_RATE_H_

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "laprate/adjust.h"
#include "laprate/blockmath.h"
#include "laprate/error.h"
#include "laprate/mlfit.h"
#include "laprate/random.h"
#include "laprate/spd3.h"

namespace laprate {

inline constexpr double kProbabilityFloor = 1e-12;

template <typename Real>
Real laplace_cdf(Real t, Real s) {
  check_arg(s > Real(0), "Laplace inverse scale must be positive");
  return t < Real(0) ? Real(0.5) * std::exp(s * t)
                     : Real(1) - Real(0.5) * std::exp(-s * t);
}

// Mass of the unit bin centred on t, F(t + 1/2) - F(t - 1/2), without the
// floor. Evaluated on |t| (the bin mass is even in t); the tail case uses the
// product form so deep bins keep their relative precision.
template <typename Real>
Real bin_mass(Real t, Real s) {
  check_arg(s > Real(0), "Laplace inverse scale must be positive");
  const Real half(0.5);
  const Real a = std::abs(t);
  if (a >= half) return half * std::exp(-s * (a - half)) * -std::expm1(-s);
  return Real(1) - half * std::exp(-s * (a + half)) - half * std::exp(-s * (half - a));
}

// Bin mass floored at kProbabilityFloor so log2 stays finite.
template <typename Real>
Real bin_probability(Real t, Real s) {
  return std::max(bin_mass(t, s), Real(kProbabilityFloor));
}

template <typename Real>
struct RateCoreT {
  Real rate_per_coeff = 0;  // bits per coefficient
  std::vector<Real> p;
};

// R = -(alpha / K) sum_k log2 p_k.
template <typename Real>
RateCoreT<Real> estimate_rate(std::span<const Real> t, std::span<const Real> s_star,
                              Real alpha) {
  check_arg(t.size() == s_star.size() && !t.empty(), "t and s* must match");
  check_arg(alpha > Real(0), "alpha must be positive");
  RateCoreT<Real> out;
  out.p.resize(t.size());
  Real sum = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    out.p[k] = bin_probability(t[k], s_star[k]);
    sum += std::log2(out.p[k]);
  }
  out.rate_per_coeff = -alpha * sum / Real(t.size());
  return out;
}

// Closed-form gradient of R with respect to c, including the dependence of
// s* on c through the ML fit (implicit differentiation of grad L(g*) = 0):
//
//   gamma(k, d) = alpha s_k exp(-s_k |t_k + d|) / (2 ln2 K p_k)
//   phi(k, d)   = (t_k + d) gamma(k, d)
//   u = gamma(., 1/2) - gamma(., -1/2),  v = phi(., 1/2) - phi(., -1/2)
//   z = sign(t + eta) o s*,  y = psi'(c)
//   grad R = y o [z o (A H(g*)^-1 A^T v) - u]
//
// Needs one 3x3 solve; everything else is O(K).
template <typename Real>
std::vector<Real> rate_gradient(const AdjustedBlockT<Real>& adj,
                                const FitResultT<Real>& fit,
                                const DesignMatrix& a, Real alpha) {
  if (!fit.converged)
    throw Error(ErrorCode::kNotConverged, "rate_gradient needs a converged fit");
  check_arg(alpha > Real(0), "alpha must be positive");
  const std::size_t kk = a.rows();
  check_arg(adj.t.size() == kk && fit.s_star.size() == kk,
            "block length != K");

  const Real half(0.5);
  const Real norm = Real(2) * std::numbers::ln2_v<Real> * Real(kk);
  std::vector<Real> u(kk);
  Vec3<Real> atv{};
  for (std::size_t k = 0; k < kk; ++k) {
    const Real t = adj.t[k];
    const Real s = fit.s_star[k];
    const Real p = bin_probability(t, s);
    const Real c = alpha * s / (norm * p);
    const Real gp = c * std::exp(-s * std::abs(t + half));
    const Real gm = c * std::exp(-s * std::abs(t - half));
    u[k] = gp - gm;
    const Real v = (t + half) * gp - (t - half) * gm;
    atv[0] += v;
    atv[1] += v * Real(a.m(k));
    atv[2] += v * Real(a.n(k));
  }
  const Vec3<Real> x = solve_spd3(fit.hessian, atv);

  std::vector<Real> grad(kk);
  for (std::size_t k = 0; k < kk; ++k) {
    const Real r = adj.t[k] + adj.eta[k];
    const Real sign = r > Real(0) ? Real(1) : (r < Real(0) ? Real(-1) : Real(0));
    const Real z = sign * fit.s_star[k];
    grad[k] = adj.y[k] * (z * a.linear(k, x) - u[k]);
  }
  return grad;
}

struct RateParams {
  double alpha = 1.0;
  AdjustParams adjust;
  NewtonOptions newton;
};

struct RateEstimate {
  double rate_per_coeff = 0.0;
  double rate_bits = 0.0;  // K * rate_per_coeff
  std::vector<double> p;
  std::optional<std::vector<double>> gradient;
  FitResult fit;
  std::vector<double> noise;
};

// Rate of c for a fixed noise vector: adjust, fit, entropy. This is the
// function whose derivative rate_gradient returns.
template <typename Real>
Real rate_with_frozen_noise(std::span<const Real> c, std::span<const Real> eta,
                            Real tau, Real alpha, const DesignMatrix& a,
                            const NewtonOptions& newton) {
  const auto adj = adjust_with_noise(c, tau, eta);
  const auto fit = fit_ml<Real>(adj.w, a, newton);
  if (!fit.converged)
    throw Error(ErrorCode::kNotConverged, "ML fit did not converge");
  return estimate_rate<Real>(adj.t, fit.s_star, alpha).rate_per_coeff;
}

// adjust -> noise -> init -> Newton fit -> entropy rate (-> gradient).
inline RateEstimate estimate_block(const BlockData& c, const RateParams& params,
                                   RandomStream& stream, bool want_gradient) {
  check_arg(params.alpha > 0.0, "alpha must be positive");
  const DesignMatrix a(c.shape);
  const AdjustedBlock adj = adjust_block(c, params.adjust, stream);
  FitResult fit = fit_ml<double>(adj.w, a, params.newton);
  if (!fit.converged)
    throw Error(ErrorCode::kNotConverged,
                "ML fit did not converge after " + std::to_string(fit.iterations) +
                    " iterations");
  auto core = estimate_rate<double>(adj.t, fit.s_star, params.alpha);

  RateEstimate est;
  est.rate_per_coeff = core.rate_per_coeff;
  est.rate_bits = static_cast<double>(c.values.size()) * core.rate_per_coeff;
  est.p = std::move(core.p);
  if (want_gradient) est.gradient = rate_gradient(adj, fit, a, params.alpha);
  est.fit = std::move(fit);
  est.noise = adj.eta;
  return est;
}

}  // namespace laprate

#endif  // LAPRATE_RATE_H_
