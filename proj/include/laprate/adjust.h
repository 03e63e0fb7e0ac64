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

#ifndef LAPRATE_ADJUST_H_
#define LAPRATE_ADJUST_H_

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "laprate/blockmath.h"
#include "laprate/error.h"
#include "laprate/random.h"

namespace laprate {

struct AdjustParams {
  double tau = 0.4;   // adjustment strength
  double eps = 0.05;  // noise half-width

  void validate() const {
    check_arg(tau > 0.0 && std::isfinite(tau), "tau must be positive");
    check_arg(eps >= 0.0 && std::isfinite(eps), "eps must be non-negative");
  }
};

// Smallest fitting magnitude; keeps the likelihood finite when w_k == 0.
inline constexpr double kMagnitudeFloor = 1e-12;

// Shrinks small magnitudes, c^3 / (c^2 + tau). Odd in c.
template <typename Real>
Real psi(Real c, Real tau) {
  return c * c * c / (c * c + tau);
}

template <typename Real>
Real psi_deriv(Real c, Real tau) {
  const Real c2 = c * c;
  const Real den = c2 + tau;
  return Real(1) + tau * (c2 - tau) / (den * den);
}

template <typename Real>
struct AdjustedBlockT {
  std::vector<Real> t;    // psi(c)
  std::vector<Real> eta;  // frozen noise
  std::vector<Real> w;    // |t + eta|, floored
  std::vector<Real> y;    // psi'(c)
};

using AdjustedBlock = AdjustedBlockT<double>;

// eta_k ~ U(-eps, eps), w_k = |t_k + eta_k|.
inline std::pair<std::vector<double>, std::vector<double>> add_noise(
    std::span<const double> t, double eps, RandomStream& stream) {
  check_arg(eps >= 0.0, "eps must be non-negative");
  std::vector<double> w(t.size());
  std::vector<double> eta(t.size(), 0.0);
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (eps > 0.0) eta[k] = stream.uniform(-eps, eps);
    w[k] = std::abs(t[k] + eta[k]);
  }
  return {std::move(w), std::move(eta)};
}

// Adjustment with a given (frozen) noise vector. Used directly by the
// finite-difference harness, which must reuse the noise of the base point.
template <typename Real>
AdjustedBlockT<Real> adjust_with_noise(std::span<const Real> c, Real tau,
                                       std::span<const Real> eta) {
  check_arg(c.size() == eta.size(), "noise length != block length");
  AdjustedBlockT<Real> out;
  out.t.resize(c.size());
  out.w.resize(c.size());
  out.y.resize(c.size());
  out.eta.assign(eta.begin(), eta.end());
  for (std::size_t k = 0; k < c.size(); ++k) {
    out.t[k] = psi(c[k], tau);
    out.y[k] = psi_deriv(c[k], tau);
    const Real mag = std::abs(out.t[k] + eta[k]);
    out.w[k] = mag == Real(0) ? Real(kMagnitudeFloor) : mag;
  }
  return out;
}

inline AdjustedBlock adjust_block(const BlockData& c, const AdjustParams& params,
                                  RandomStream& stream) {
  check_arg(c.domain == Domain::kScaledCoefficient,
            "adjust_block expects scaled coefficients");
  params.validate();
  std::vector<double> t(c.values.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = psi(c.values[k], params.tau);
  auto [w, eta] = add_noise(t, params.eps, stream);
  return adjust_with_noise<double>(c.values, params.tau, eta);
}

}  // namespace laprate

#endif  // LAPRATE_ADJUST_H_
