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

// Acceptance suite: one PASS/FAIL line per headline property of the library.
// Exit status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include <unistd.h>

#include "laprate/app/commands.h"
#include "laprate/laprate.h"

namespace {

using namespace laprate;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string scratch(const std::string& name) {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() /
             ("laprate_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
  }();
  return (dir / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome gradient_correctness() {
  app::RunConfig cfg;
  cfg.threads = 1;
  app::GradcheckConfig gc;
  gc.blocks = 200;
  gc.tolerance = 1e-4;
  const auto t0 = Clock::now();
  const auto r = app::cmd_gradcheck(cfg, gc);
  const double secs = seconds_since(t0);
  Outcome o;
  o.passed = r.passed && secs < 60.0;
  o.detail = "max_rel_err=" + fmt("%.3e", r.max_rel_error) +
             " median=" + fmt("%.3e", r.median_rel_error) +
             " components=" + std::to_string(r.components) + " s*=[" +
             fmt("%.3g", r.min_s_star) + "," + fmt("%.3g", r.max_s_star) +
             "] time=" + fmt("%.1fs", secs) + " (limits 1e-4, 60s)";
  return o;
}

Outcome gradient_complexity() {
  // Cost of rate_gradient alone (fit done beforehand), best of several trials.
  std::vector<double> logk, logt;
  std::string detail;
  RandomStream rs(2024);
  for (int side : {4, 8, 16, 32}) {
    const BlockShape shape(side, side);
    const DesignMatrix a(shape);
    const auto c = sample_block({0.0, 0.05, 0.05}, shape, rs);
    const auto adj = adjust_block(c, AdjustParams{}, rs);
    const auto fit = fit_ml<double>(adj.w, a);
    const int reps = 400000 / static_cast<int>(shape.size());
    double best = 1e300;
    double sink = 0.0;
    for (int trial = 0; trial < 15; ++trial) {
      const auto t0 = Clock::now();
      for (int i = 0; i < reps; ++i) sink += rate_gradient(adj, fit, a, 1.0)[0];
      best = std::min(best, seconds_since(t0) / reps);
    }
    if (sink == 12345.678) std::puts("");
    logk.push_back(std::log(static_cast<double>(shape.size())));
    logt.push_back(std::log(best));
    detail += "K=" + std::to_string(shape.size()) + ":" + fmt("%.3gus ", best * 1e6);
  }
  const double n = static_cast<double>(logk.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < logk.size(); ++i) {
    mx += logk[i] / n;
    my += logt[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < logk.size(); ++i) {
    sxy += (logk[i] - mx) * (logt[i] - my);
    sxx += (logk[i] - mx) * (logk[i] - mx);
  }
  const double slope = sxy / sxx;
  return {std::abs(slope - 1.0) <= 0.2, detail + "exponent=" + fmt("%.3f", slope) +
                                            " (limit 1.0 +- 0.2)"};
}

Outcome newton_convergence() {
  const BlockShape shape(8, 8);
  const DesignMatrix a(shape);
  std::map<int, int> hist;
  std::vector<int> iters;
  int within10 = 0;
  const int blocks = 10000;
  for (int b = 0; b < blocks; ++b) {
    RandomStream gen = derive_block_stream(kSynthSalt, 1, static_cast<uint32_t>(b));
    const auto c = sample_block(random_model_params(gen, kCorpusRange), shape, gen);
    const auto adj = adjust_block(c, AdjustParams{}, gen);
    const auto fit = fit_ml<double>(adj.w, a);
    if (fit.converged && fit.iterations <= 10) ++within10;
    ++hist[fit.iterations];
    iters.push_back(fit.iterations);
  }
  std::nth_element(iters.begin(), iters.begin() + blocks / 2, iters.end());
  const int median = iters[blocks / 2];
  const double frac = static_cast<double>(within10) / blocks;
  std::string h;
  for (const auto& [k, v] : hist) h += std::to_string(k) + ":" + std::to_string(v) + " ";
  return {frac >= 0.99 && median <= 3,
          "within10=" + fmt("%.4f", frac) + " median=" + std::to_string(median) +
              " histogram={" + h + "} (limits >=0.99, median <=3)"};
}

Outcome init_stationarity() {
  RandomStream rs(7);
  double worst = 0.0;
  const BlockShape shapes[] = {BlockShape(4, 4), BlockShape(8, 8), BlockShape(16, 16),
                               BlockShape(4, 8)};
  for (int i = 0; i < 1000; ++i) {
    const BlockShape shape = shapes[i % 4];
    const DesignMatrix a(shape);
    std::vector<double> w(shape.size());
    const double scale = std::exp(rs.uniform(-3.0, 3.0));
    for (auto& x : w) x = scale * rs.uniform(1e-3, 5.0);
    const auto g = init_params<double>(w, a.maps());
    worst = std::max(worst, std::abs(nll_gradient<double>(g, w, a)[0]));
  }
  return {worst <= 1e-12, "max |dL/dg0|=" + fmt("%.3e", worst) + " (limit 1e-12)"};
}

Outcome ml_consistency() {
  const BlockShape shape(8, 8);
  const DesignMatrix a(shape);
  const ModelParams g_true = {1.0, 0.1, 0.2};
  RandomStream rs(99);
  ModelParams mean{};
  std::vector<double> w(shape.size());
  for (int b = 0; b < 1000; ++b) {
    const auto c = sample_block(g_true, shape, rs);
    for (std::size_t k = 0; k < w.size(); ++k)
      w[k] = std::max(std::abs(c.values[k]), kMagnitudeFloor);
    const auto fit = fit_ml<double>(w, a);
    for (int j = 0; j < 3; ++j) mean[j] += fit.g_star[j] / 1000.0;
  }
  double worst = 0.0;
  for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(mean[j] - g_true[j]));
  return {worst <= 0.05, "mean g*=(" + fmt("%.4f", mean[0]) + "," + fmt("%.4f", mean[1]) +
                             "," + fmt("%.4f", mean[2]) + ") max dev=" +
                             fmt("%.4f", worst) + " (limit 0.05)"};
}

Outcome derivative_checks() {
  RandomStream rs(5);
  double grad_err = 0.0, hess_err = 0.0, psi_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const BlockShape shape(8, 8);
    const DesignMatrix a(shape);
    std::vector<double> w(64);
    for (auto& x : w) x = rs.uniform(0.01, 4.0);
    const ModelParams g = {rs.uniform(-1.0, 1.0), rs.uniform(-0.2, 0.3),
                           rs.uniform(-0.2, 0.3)};
    const auto grad = nll_gradient<double>(g, w, a);
    const auto hess = nll_hessian<double>(g, w, a);
    double gscale = 0.0, hscale = 0.0;
    for (int i = 0; i < 3; ++i) {
      gscale = std::max(gscale, std::abs(grad[i]));
      for (int j = 0; j < 3; ++j) hscale = std::max(hscale, std::abs(hess[i][j]));
    }
    const double h = 1e-6;
    for (int j = 0; j < 3; ++j) {
      ModelParams gp = g, gm = g;
      gp[j] += h;
      gm[j] -= h;
      const double fd = (neg_log_likelihood<double>(gp, w, a) -
                         neg_log_likelihood<double>(gm, w, a)) / (2 * h);
      grad_err = std::max(grad_err, std::abs(fd - grad[j]) / gscale);
      const auto dp = nll_gradient<double>(gp, w, a);
      const auto dm = nll_gradient<double>(gm, w, a);
      for (int i = 0; i < 3; ++i)
        hess_err = std::max(hess_err, std::abs((dp[i] - dm[i]) / (2 * h) - hess[i][j]) / hscale);
    }
    for (int i = 0; i < 50; ++i) {
      const double c = rs.uniform(-6.0, 6.0);
      const double tau = rs.uniform(0.05, 2.0);
      const double hh = 1e-6;
      const double fd = (psi(c + hh, tau) - psi(c - hh, tau)) / (2 * hh);
      psi_err = std::max(psi_err, std::abs(fd - psi_deriv(c, tau)));
    }
  }
  return {grad_err <= 1e-6 && hess_err <= 1e-5 && psi_err <= 1e-8,
          "grad rel=" + fmt("%.2e", grad_err) + " (1e-6) hessian rel=" +
              fmt("%.2e", hess_err) + " (1e-5) psi' abs=" + fmt("%.2e", psi_err) + " (1e-8)"};
}

Outcome entropy_normalization() {
  double worst_sum = 0.0;
  for (double s = 0.2; s <= 20.0 + 1e-9; s *= 1.1) {
    double sum = 0.0;
    for (int l = -400; l <= 400; ++l) sum += bin_mass(static_cast<double>(l), s);
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  // Monte Carlo: quantized draws from fitted block models, 1e5 each. The
  // sample mean is an unbiased estimate of the entropy, so the 1% bound is
  // only meaningful when its standard error is well below 1%; models where
  // SE/H > 0.5% are checked at 3 standard errors instead and reported.
  RandomStream rs(44);
  const BlockShape shape(8, 8);
  double worst_mc = 0.0, worst_z = 0.0;
  int resolved = 0, unresolved = 0;
  for (int b = 0; b < 8; ++b) {
    const auto block = sample_block(random_model_params(rs, kCorpusRange), shape, rs);
    const auto adj = adjust_block(block, AdjustParams{}, rs);
    const auto fit = fit_ml<double>(adj.w, DesignMatrix(shape));
    double entropy = 0.0;
    for (double s : fit.s_star)
      for (int l = -4000; l <= 4000; ++l) {
        const double p = bin_probability(static_cast<double>(l), s);
        if (p > kProbabilityFloor) entropy -= p * std::log2(p);
      }
    entropy /= 64.0;
    const int samples = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < samples; ++i) {
      const double s = fit.s_star[i % 64];
      const double u = rs.uniform_open() - 0.5;
      const double mag = -std::log1p(-2.0 * std::abs(u)) / s;
      const double bits =
          -std::log2(bin_probability(static_cast<double>(std::llround(u < 0 ? -mag : mag)), s));
      sum += bits;
      sum2 += bits * bits;
    }
    const double mean = sum / samples;
    const double se = std::sqrt((sum2 / samples - mean * mean) / samples);
    const double dev = std::abs(mean - entropy) / entropy;
    if (se / entropy <= 0.005) {
      ++resolved;
      worst_mc = std::max(worst_mc, dev);
    } else {
      ++unresolved;
      worst_z = std::max(worst_z, std::abs(mean - entropy) / se);
    }
  }
  return {worst_sum <= 1e-12 && worst_mc <= 0.01 && worst_z <= 3.0 && resolved > 0,
          "max |sum p - 1|=" + fmt("%.2e", worst_sum) + " (1e-12) MC: " +
              std::to_string(resolved) + " models max rel dev=" + fmt("%.4f", worst_mc) +
              " (0.01); " + std::to_string(unresolved) +
              " low-entropy models max |z|=" + fmt("%.2f", worst_z) + " (3)"};
}

Outcome comparative_ordering() {
  const BlockShape shape(8, 8);
  const int blocks = 5000;
  const RateParams params;
  std::vector<double> proposed(blocks), lograte(blocks), oracle(blocks);
  app::parallel_for(blocks, 8, [&](std::size_t b) {
    const auto id = static_cast<uint32_t>(b);
    RandomStream gen = derive_block_stream(kSynthSalt, 2, id);
    const auto c = sample_block(random_model_params(gen, kCorpusRange), shape, gen);
    std::vector<double> t(c.values.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = psi(c.values[k], params.adjust.tau);
    oracle[b] = adaptive_codelength_oracle(quantize_round(t));
    lograte[b] = log_rate(c.values, 1.0);
    RandomStream noise = derive_block_stream(0, 2, id);
    proposed[b] = estimate_block(c, params, noise, false).rate_bits;
  });
  auto scaled_stats = [&](const std::vector<double>& raw) {
    const auto cal = calibrate(raw, oracle);
    std::vector<double> scaled(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) scaled[i] = cal.factor * raw[i];
    return ratio_stats(scaled, oracle, {});
  };
  const RatioStats p = scaled_stats(proposed);
  const RatioStats l = scaled_stats(lograte);
  const double p_over = static_cast<double>(p.overflow) / blocks;
  const double l_over = static_cast<double>(l.overflow) / blocks;
  return {p.overall.stddev < l.overall.stddev && l_over > p_over,
          "stddev proposed=" + fmt("%.4f", p.overall.stddev) +
              " lograte=" + fmt("%.4f", l.overall.stddev) +
              " overflow proposed=" + fmt("%.4f", p_over) + " lograte=" + fmt("%.4f", l_over)};
}

Outcome calibration_exactness() {
  app::SynthConfig sc;
  sc.count = 1000;
  sc.seed = 31;
  const std::string dump = scratch("cal.rdb");
  app::cmd_synth(sc, dump);
  app::RunConfig cfg;
  cfg.threads = 8;
  cfg.estimators = {app::Estimator::kProposed, app::Estimator::kLogRate};
  const std::string est = scratch("cal_est.txt");
  app::cmd_estimate(cfg, dump, est);
  cfg.estimators = {app::Estimator::kOracle};
  const std::string act = scratch("cal_oracle.txt");
  app::cmd_estimate(cfg, dump, act);
  const auto out = app::cmd_calibrate(est, act, "q");
  std::map<std::string, std::pair<double, double>> sums;
  for (const auto& j : out.joined) {
    auto& s = sums[j.require("estimator")];
    s.first += j.require_double("estimate");
    s.second += j.require_double("actual");
  }
  double worst = 0.0;
  std::string detail;
  for (const auto& [name, s] : sums) {
    const double dev = std::abs(s.first / s.second - 1.0);
    worst = std::max(worst, dev);
    detail += name + ":factor=" + fmt("%.5g", out.by_estimator.at(name).factor) +
              ",dev=" + fmt("%.2e", dev) + " ";
  }
  return {worst <= 1e-12 && sums.size() == 2, detail + "(limit 1e-12)"};
}

Outcome determinism() {
  app::SynthConfig sc;
  sc.count = 500;
  sc.seed = 77;
  const std::string dump = scratch("det.rdb");
  app::cmd_synth(sc, dump);
  app::RunConfig cfg;
  cfg.seed = 1234;
  cfg.gradient = true;
  cfg.estimators = {app::Estimator::kProposed, app::Estimator::kLogRate,
                    app::Estimator::kRhoDomain, app::Estimator::kOracle};
  const std::string a = scratch("det1.txt"), b = scratch("det2.txt"), c = scratch("det8.txt");
  app::cmd_estimate(cfg, dump, a);
  app::cmd_estimate(cfg, dump, b);
  cfg.threads = 8;
  app::cmd_estimate(cfg, dump, c);
  const std::string ra = slurp(a);
  const bool same = !ra.empty() && ra == slurp(b) && ra == slurp(c);
  return {same, "bytes=" + std::to_string(ra.size()) + " runs 1,1,8 threads " +
                    (same ? "identical" : "differ")};
}

Outcome dct_correctness() {
  RandomStream rs(3);
  double rt = 0.0, parseval = 0.0, dc = 0.0;
  for (int rows : {2, 4, 8, 16, 32})
    for (int cols : {2, 4, 8, 16, 32}) {
      const BlockShape shape(rows, cols);
      std::vector<double> v(shape.size());
      for (auto& x : v) x = rs.uniform(-255.0, 255.0);
      const BlockData r(shape, Domain::kPixelResidual, v);
      const BlockData d = dct2_forward(r);
      const BlockData back = dct2_inverse(d);
      double e_r = 0.0, e_d = 0.0;
      for (std::size_t k = 0; k < v.size(); ++k) {
        rt = std::max(rt, std::abs(back.values[k] - v[k]));
        e_r += v[k] * v[k];
        e_d += d.values[k] * d.values[k];
      }
      parseval = std::max(parseval, std::abs(std::sqrt(e_d) - std::sqrt(e_r)) / std::sqrt(e_r));
      const BlockData ones(shape, Domain::kPixelResidual, std::vector<double>(shape.size(), 1.0));
      const BlockData od = dct2_forward(ones);
      dc = std::max(dc, std::abs(od.values[0] - std::sqrt(static_cast<double>(shape.size()))));
      for (std::size_t k = 1; k < shape.size(); ++k) dc = std::max(dc, std::abs(od.values[k]));
    }
  return {rt <= 1e-12 && parseval <= 1e-12 && dc <= 1e-12,
          "round-trip=" + fmt("%.2e", rt) + " parseval=" + fmt("%.2e", parseval) +
              " dc=" + fmt("%.2e", dc) + " (limits 1e-12)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient-correctness", gradient_correctness},
      {"gradient-complexity", gradient_complexity},
      {"newton-convergence", newton_convergence},
      {"init-stationarity", init_stationarity},
      {"ml-consistency", ml_consistency},
      {"derivative-checks", derivative_checks},
      {"entropy-normalization", entropy_normalization},
      {"comparative-ordering", comparative_ordering},
      {"calibration-exactness", calibration_exactness},
      {"determinism", determinism},
      {"dct-correctness", dct_correctness},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.passed;
    std::printf("%s %s: %s\n", o.passed ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  std::error_code ec;
  std::filesystem::remove_all(std::filesystem::path(scratch("x")).parent_path(), ec);
  return failed == 0 ? 0 : 1;
}
