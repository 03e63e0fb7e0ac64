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

#ifndef LAPRATE_BASELINES_H_
#define LAPRATE_BASELINES_H_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "laprate/error.h"

namespace laprate {

// Per-coefficient log rate, mu * sum_k log2(1 + |c_k|).
inline double log_rate(std::span<const double> c, double mu) {
  check_arg(mu > 0.0, "mu must be positive");
  double bits = 0.0;
  for (double x : c) bits += std::log2(1.0 + std::abs(x));
  return mu * bits;
}

// Subgradient 0 at c_k = 0.
inline std::vector<double> log_rate_gradient(std::span<const double> c, double mu) {
  check_arg(mu > 0.0, "mu must be positive");
  std::vector<double> grad(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double x = c[k];
    const double sign = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    grad[k] = mu * sign / ((1.0 + std::abs(x)) * std::numbers::ln2);
  }
  return grad;
}

// rho-domain model: R = theta * K * (1 - rho), rho = fraction of zero levels.
inline double rho_domain_rate(std::span<const int64_t> levels, double theta) {
  check_arg(theta > 0.0, "theta must be positive");
  check_arg(!levels.empty(), "rho_domain_rate needs at least one level");
  std::size_t nonzero = 0;
  for (int64_t l : levels) nonzero += l != 0;
  const double k = static_cast<double>(levels.size());
  const double rho = (k - static_cast<double>(nonzero)) / k;
  return theta * k * (1.0 - rho);
}

inline constexpr int64_t kMaxOracleLevel = int64_t{1} << 15;

namespace detail {

// Krichevsky-Trofimov binary estimator; accumulates ideal codelength.
class KtBit {
 public:
  double code(bool bit) {
    const double n = bit ? ones_ : zeros_;
    const double p = (n + 0.5) / (zeros_ + ones_ + 1.0);
    (bit ? ones_ : zeros_) += 1.0;
    return -std::log2(p);
  }

 private:
  double zeros_ = 0.0;
  double ones_ = 0.0;
};

}  // namespace detail

// Ideal codelength of a two-part adaptive code over the levels in order:
// a KT-coded zero/nonzero flag, then for nonzero levels a raw sign bit and
// |l| - 1 in unary with one KT estimator per bit position (positions >= 15
// share the last one). Stands in for a real encoder's bit count.
inline double adaptive_codelength_oracle(std::span<const int64_t> levels) {
  constexpr int kPositions = 16;
  detail::KtBit flag;
  std::array<detail::KtBit, kPositions> unary;
  double bits = 0.0;
  for (int64_t l : levels) {
    if (l > kMaxOracleLevel || l < -kMaxOracleLevel)
      throw Error(ErrorCode::kOverflow, "level magnitude exceeds 2^15");
    bits += flag.code(l != 0);
    if (l == 0) continue;
    bits += 1.0;  // sign
    const int64_t rest = (l < 0 ? -l : l) - 1;
    for (int64_t i = 0; i < rest; ++i)
      bits += unary[std::min<int64_t>(i, kPositions - 1)].code(true);
    bits += unary[std::min<int64_t>(rest, kPositions - 1)].code(false);
  }
  return bits;
}

struct CalibrationResult {
  double factor = 1.0;
  double mean_ratio = 0.0;     // of factor * raw / actual
  double ratio_stddev = 0.0;   // population
  std::size_t sample_count = 0;
  std::size_t excluded = 0;    // samples with actual <= 0
};

namespace detail {

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

inline MeanStd mean_std(std::span<const double> x) {
  MeanStd out;
  if (x.empty()) return out;
  for (double v : x) out.mean += v;
  out.mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(ss / static_cast<double>(x.size()));
  return out;
}

}  // namespace detail

// Total-bits ratio fit: factor = sum(actual) / sum(raw).
inline CalibrationResult calibrate(std::span<const double> raw,
                                   std::span<const double> actual) {
  check_arg(raw.size() == actual.size(), "calibrate needs aligned lists");
  check_arg(!raw.empty(), "calibrate needs at least one sample");
  double raw_sum = 0.0;
  double actual_sum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw_sum += raw[i];
    actual_sum += actual[i];
  }
  check_arg(raw_sum > 0.0, "calibrate needs a positive estimate total");
  check_arg(actual_sum > 0.0, "calibrate needs a positive actual total");

  CalibrationResult out;
  out.factor = actual_sum / raw_sum;
  std::vector<double> ratios;
  ratios.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (actual[i] > 0.0) {
      ratios.push_back(out.factor * raw[i] / actual[i]);
    } else {
      ++out.excluded;
    }
  }
  const auto ms = detail::mean_std(ratios);
  out.mean_ratio = ms.mean;
  out.ratio_stddev = ms.stddev;
  out.sample_count = ratios.size();
  return out;
}

struct RatioGroup {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

// Histogram of estimate/actual ratios: 40 bins of width 0.1 covering (0, 4],
// bin i = (0.1 i, 0.1 (i + 1)]. Ratios above 4 go to overflow, ratios <= 0
// to underflow; samples with actual <= 0 are excluded and counted.
struct RatioStats {
  static constexpr int kBins = 40;
  static constexpr double kBinWidth = 0.1;
  static constexpr double kMaxRatio = 4.0;

  std::vector<double> edges;  // kBins + 1 edges, 0 .. 4
  std::vector<std::size_t> counts;
  std::size_t overflow = 0;
  std::size_t underflow = 0;
  std::size_t excluded = 0;
  RatioGroup overall;
  std::map<std::string, RatioGroup> groups;
};

inline RatioStats ratio_stats(std::span<const double> estimates,
                              std::span<const double> actuals,
                              std::span<const std::string> group_keys) {
  check_arg(estimates.size() == actuals.size(), "ratio_stats needs aligned lists");
  check_arg(group_keys.empty() || group_keys.size() == estimates.size(),
            "group keys must be empty or aligned");
  RatioStats out;
  out.edges.resize(RatioStats::kBins + 1);
  for (int i = 0; i <= RatioStats::kBins; ++i)
    out.edges[i] = i * RatioStats::kBinWidth;
  out.counts.assign(RatioStats::kBins, 0);

  std::vector<double> all;
  std::map<std::string, std::vector<double>> by_group;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (!(actuals[i] > 0.0)) {
      ++out.excluded;
      continue;
    }
    const double r = estimates[i] / actuals[i];
    all.push_back(r);
    if (!group_keys.empty()) by_group[group_keys[i]].push_back(r);
    if (r <= 0.0) {
      ++out.underflow;
    } else if (r > RatioStats::kMaxRatio) {
      ++out.overflow;
    } else {
      const int bin = static_cast<int>(std::ceil(r * 10.0)) - 1;
      ++out.counts[std::clamp(bin, 0, RatioStats::kBins - 1)];
    }
  }
  auto summarize = [](std::span<const double> x) {
    const auto ms = detail::mean_std(x);
    return RatioGroup{x.size(), ms.mean, ms.stddev};
  };
  out.overall = summarize(all);
  for (const auto& [key, values] : by_group) out.groups[key] = summarize(values);
  return out;
}

}  // namespace laprate

#endif  // LAPRATE_BASELINES_H_
