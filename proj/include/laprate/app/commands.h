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

#ifndef LAPRATE_APP_COMMANDS_H_
#define LAPRATE_APP_COMMANDS_H_

#include <algorithm>
#include <atomic>
#include <limits>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "laprate/adjust.h"
#include "laprate/baselines.h"
#include "laprate/blockmath.h"
#include "laprate/error.h"
#include "laprate/gradcheck.h"
#include "laprate/io/block_dump.h"
#include "laprate/io/records.h"
#include "laprate/mlfit.h"
#include "laprate/random.h"
#include "laprate/rate.h"
#include "laprate/synth.h"

namespace laprate::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInput = 2,
  kExitFailures = 3,
};

enum class Estimator { kProposed, kLogRate, kRhoDomain, kOracle };

inline const char* estimator_name(Estimator e) {
  switch (e) {
    case Estimator::kProposed: return "proposed";
    case Estimator::kLogRate: return "lograte";
    case Estimator::kRhoDomain: return "rhodomain";
    case Estimator::kOracle: return "oracle";
  }
  return "?";
}

inline Estimator parse_estimator(const std::string& name) {
  for (Estimator e : {Estimator::kProposed, Estimator::kLogRate,
                      Estimator::kRhoDomain, Estimator::kOracle})
    if (name == estimator_name(e)) return e;
  throw Error(ErrorCode::kInvalidArgument, "unknown estimator '" + name + "'");
}

struct RunConfig {
  RateParams rate;  // tau, eps, alpha, Newton options
  double mu = 1.0;
  double theta = 1.0;
  std::optional<double> q;
  std::optional<int> qp;
  uint64_t seed = 0;
  std::vector<Estimator> estimators = {Estimator::kProposed};
  bool gradient = false;
  int threads = 1;
  std::string group_key = "q";

  void validate() const {
    rate.adjust.validate();
    rate.newton.validate();
    check_arg(rate.alpha > 0.0, "alpha must be positive");
    check_arg(mu > 0.0, "mu must be positive");
    check_arg(theta > 0.0, "theta must be positive");
    check_arg(threads >= 1, "threads must be >= 1");
    check_arg(!estimators.empty(), "no estimator selected");
    check_arg(!(q && qp), "give --q or --qp, not both");
    if (q) check_arg(*q > 0.0, "Q must be positive");
  }

  // Config override first, then the dump header.
  double step_for(double header_q) const {
    if (q) return *q;
    if (qp) return qp_to_step(*qp);
    return header_q;
  }
};

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// processed exactly once; callers write results into per-index slots.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// estimate

struct BlockOutcome {
  std::vector<io::Record> records;
  std::vector<std::string> failures;
};

struct EstimateSummary {
  std::size_t blocks = 0;
  std::size_t records = 0;
  std::vector<std::string> failures;
  // (frame id, estimator) -> total estimated bits
  std::map<std::pair<uint32_t, std::string>, double> frame_totals;
};

inline std::string join_values(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(',');
    out += io::format_double(v[i]);
  }
  return out;
}

// Scaled coefficients c for a dump record; pixel residuals go through the
// DCT and the quantizer step first.
inline BlockData coefficients_for(const io::BlockRecord& rec, double q) {
  if (rec.block.domain == Domain::kPixelResidual)
    return scale_by_q(dct2_forward(rec.block), q);
  return rec.block;
}

inline BlockOutcome estimate_one(const io::BlockRecord& rec, double q,
                                 const RunConfig& cfg) {
  BlockOutcome out;
  const BlockData c = coefficients_for(rec, q);
  const double kk = static_cast<double>(c.values.size());
  std::optional<std::vector<int64_t>> levels;
  auto quantized = [&]() -> const std::vector<int64_t>& {
    if (!levels) {
      std::vector<double> t(c.values.size());
      for (std::size_t k = 0; k < t.size(); ++k) t[k] = psi(c.values[k], cfg.rate.adjust.tau);
      levels = quantize_round(t);
    }
    return *levels;
  };

  for (Estimator e : cfg.estimators) {
    io::Record r;
    r.add("frame", static_cast<long long>(rec.frame_id))
        .add("block", static_cast<long long>(rec.block_id))
        .add("estimator", estimator_name(e))
        .add("q", q);
    if (cfg.qp) r.add("qp", static_cast<long long>(*cfg.qp));
    try {
      double bits = 0.0;
      int iterations = 0;
      std::optional<std::vector<double>> grad;
      switch (e) {
        case Estimator::kProposed: {
          RandomStream stream = derive_block_stream(cfg.seed, rec.frame_id, rec.block_id);
          RateEstimate est = estimate_block(c, cfg.rate, stream, cfg.gradient);
          bits = est.rate_bits;
          iterations = est.fit.iterations;
          grad = std::move(est.gradient);
          break;
        }
        case Estimator::kLogRate:
          bits = log_rate(c.values, cfg.mu);
          if (cfg.gradient) grad = log_rate_gradient(c.values, cfg.mu);
          break;
        case Estimator::kRhoDomain:
          bits = rho_domain_rate(quantized(), cfg.theta);
          break;
        case Estimator::kOracle:
          bits = adaptive_codelength_oracle(quantized());
          break;
      }
      r.add("status", "ok")
          .add("rate_bits", bits)
          .add("rate_per_coeff", bits / kk)
          .add("iterations", static_cast<long long>(iterations))
          .add("converged", static_cast<long long>(1));
      if (grad) r.add("gradient", join_values(*grad));
    } catch (const Error& err) {
      r.add("status", "failed").add("error", error_code_name(err.code()));
      out.failures.push_back("frame " + std::to_string(rec.frame_id) + " block " +
                             std::to_string(rec.block_id) + " (" + estimator_name(e) +
                             "): " + err.what());
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

inline EstimateSummary cmd_estimate(const RunConfig& cfg, const std::string& input,
                                    const std::string& output) {
  cfg.validate();
  auto [header, blocks] = io::read_block_dump(input);
  const double q = cfg.step_for(header.q);

  std::vector<BlockOutcome> outcomes(blocks.size());
  parallel_for(blocks.size(), cfg.threads,
               [&](std::size_t i) { outcomes[i] = estimate_one(blocks[i], q, cfg); });

  EstimateSummary summary;
  summary.blocks = blocks.size();
  std::vector<io::Record> all;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    for (auto& r : outcomes[i].records) {
      if (r.get("status") == "ok")
        summary.frame_totals[{blocks[i].frame_id, r.require("estimator")}] +=
            r.require_double("rate_bits");
      all.push_back(std::move(r));
    }
    for (auto& f : outcomes[i].failures) summary.failures.push_back(std::move(f));
  }
  summary.records = all.size();
  io::write_records(output, all);
  return summary;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckConfig {
  std::size_t blocks = 200;
  int rows = 8;
  int cols = 8;
  double tolerance = 1e-4;
  GradCheckOptions fd;
};

struct GradcheckReport {
  std::size_t blocks = 0;
  std::size_t components = 0;
  double max_rel_error = 0.0;
  double median_rel_error = 0.0;
  double min_s_star = 0.0;
  double max_s_star = 0.0;
  std::vector<std::string> failures;
  bool passed = false;
};

inline GradcheckReport cmd_gradcheck(const RunConfig& cfg, const GradcheckConfig& gc) {
  cfg.validate();
  const BlockShape shape(gc.rows, gc.cols);
  std::vector<std::optional<GradCheckResult>> results(gc.blocks);
  std::vector<std::string> errors(gc.blocks);
  parallel_for(gc.blocks, cfg.threads, [&](std::size_t i) {
    const auto id = static_cast<uint32_t>(i);
    RandomStream gen = derive_block_stream(cfg.seed ^ kSynthSalt, 0, id);
    const ModelParams g = random_model_params(gen, kGradcheckRange);
    const BlockData c = sample_block(g, shape, gen);
    RandomStream noise = derive_block_stream(cfg.seed, 0, id);
    try {
      results[i] = gradcheck_block(c, cfg.rate, noise, gc.fd);
    } catch (const Error& e) {
      errors[i] = "block " + std::to_string(i) + ": " + e.what();
    }
  });

  GradcheckReport report;
  report.blocks = gc.blocks;
  report.min_s_star = std::numeric_limits<double>::infinity();
  report.max_s_star = 0.0;
  std::vector<double> all;
  for (std::size_t i = 0; i < gc.blocks; ++i) {
    if (!results[i]) {
      report.failures.push_back(errors[i]);
      continue;
    }
    const auto& r = *results[i];
    all.insert(all.end(), r.rel_errors.begin(), r.rel_errors.end());
    report.max_rel_error = std::max(report.max_rel_error, r.max_rel_error);
    report.min_s_star = std::min(report.min_s_star, r.min_s_star);
    report.max_s_star = std::max(report.max_s_star, r.max_s_star);
  }
  report.components = all.size();
  if (!all.empty()) {
    auto mid = all.begin() + static_cast<std::ptrdiff_t>(all.size() / 2);
    std::nth_element(all.begin(), mid, all.end());
    report.median_rel_error = *mid;
  }
  report.passed = report.failures.empty() && gc.tolerance > 0.0 &&
                  report.max_rel_error <= gc.tolerance;
  return report;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateOutput {
  std::vector<io::Record> summary;  // one per estimator and group
  std::vector<io::Record> joined;   // per block: calibrated estimate, actual
  std::map<std::string, CalibrationResult> by_estimator;
  std::size_t missing = 0;          // estimate records with no actual
  std::vector<std::string> missing_keys;
};

using BlockKey = std::pair<long long, long long>;

inline BlockKey block_key(const io::Record& r) {
  return {r.require_int("frame"), r.require_int("block")};
}

// Actual bits per block: the "bits" field if present, else "rate_bits".
inline std::map<BlockKey, double> load_actual_bits(const std::string& path) {
  std::map<BlockKey, double> actual;
  for (const auto& r : io::read_records(path)) {
    if (r.get("status") == "failed") continue;
    const double bits =
        r.has("bits") ? r.require_double("bits") : r.require_double("rate_bits");
    if (!actual.emplace(block_key(r), bits).second)
      throw Error(ErrorCode::kFormat,
                  "duplicate actual-bits record for frame " +
                      std::to_string(block_key(r).first) + " block " +
                      std::to_string(block_key(r).second));
  }
  return actual;
}

inline CalibrateOutput cmd_calibrate(const std::string& estimates_path,
                                     const std::string& actual_path,
                                     const std::string& group_key) {
  const auto actual = load_actual_bits(actual_path);
  struct Rows {
    std::vector<double> raw, act;
    std::vector<std::string> groups;
    std::vector<BlockKey> keys;
  };
  std::map<std::string, Rows> per_estimator;
  CalibrateOutput out;
  for (const auto& r : io::read_records(estimates_path)) {
    if (r.get("status") == "failed") continue;
    const BlockKey key = block_key(r);
    const auto it = actual.find(key);
    if (it == actual.end()) {
      ++out.missing;
      if (out.missing_keys.size() < 10)
        out.missing_keys.push_back("frame " + std::to_string(key.first) + " block " +
                                   std::to_string(key.second));
      continue;
    }
    auto& rows = per_estimator[r.get("estimator").value_or("unnamed")];
    rows.raw.push_back(r.require_double("rate_bits"));
    rows.act.push_back(it->second);
    rows.groups.push_back(r.get(group_key).value_or("none"));
    rows.keys.push_back(key);
  }
  if (per_estimator.empty())
    throw Error(ErrorCode::kFormat, "no estimate records joined with actual bits");

  for (const auto& [name, rows] : per_estimator) {
    const CalibrationResult cal = calibrate(rows.raw, rows.act);
    out.by_estimator[name] = cal;
    std::vector<double> scaled(rows.raw.size());
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = cal.factor * rows.raw[i];
    const RatioStats stats = ratio_stats(scaled, rows.act, rows.groups);

    io::Record overall;
    overall.add("estimator", name)
        .add("group", "all")
        .add("factor", cal.factor)
        .add("mean_ratio", cal.mean_ratio)
        .add("ratio_stddev", cal.ratio_stddev)
        .add("count", static_cast<long long>(cal.sample_count))
        .add("excluded", static_cast<long long>(cal.excluded))
        .add("overflow", static_cast<long long>(stats.overflow));
    out.summary.push_back(std::move(overall));
    for (const auto& [group, g] : stats.groups) {
      io::Record row;
      row.add("estimator", name)
          .add("group", group_key + "=" + group)
          .add("factor", cal.factor)
          .add("mean_ratio", g.mean)
          .add("ratio_stddev", g.stddev)
          .add("count", static_cast<long long>(g.count));
      out.summary.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < scaled.size(); ++i) {
      io::Record j;
      j.add("frame", rows.keys[i].first)
          .add("block", rows.keys[i].second)
          .add("estimator", name)
          .add(group_key, rows.groups[i])
          .add("estimate", scaled[i])
          .add("actual", rows.act[i]);
      out.joined.push_back(std::move(j));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// stats

// Histogram and per-group spread of estimate/actual, per estimator.
inline std::vector<io::Record> cmd_stats(const std::string& records_path,
                                         const std::string& group_key) {
  const auto records = io::read_records(records_path);
  if (records.empty()) throw Error(ErrorCode::kFormat, "stats input is empty");
  struct Rows {
    std::vector<double> est, act;
    std::vector<std::string> groups;
  };
  std::map<std::string, Rows> per_estimator;
  for (const auto& r : records) {
    auto& rows = per_estimator[r.get("estimator").value_or("all")];
    rows.est.push_back(r.require_double("estimate"));
    rows.act.push_back(r.require_double("actual"));
    rows.groups.push_back(r.get(group_key).value_or("none"));
  }
  std::vector<io::Record> out;
  for (const auto& [name, rows] : per_estimator) {
    const RatioStats s = ratio_stats(rows.est, rows.act, rows.groups);
    for (int b = 0; b < RatioStats::kBins; ++b) {
      if (s.counts[b] == 0) continue;
      io::Record r;
      r.add("estimator", name)
          .add("bin_lo", s.edges[b])
          .add("bin_hi", s.edges[b + 1])
          .add("count", static_cast<long long>(s.counts[b]));
      out.push_back(std::move(r));
    }
    io::Record tail;
    tail.add("estimator", name)
        .add("overflow", static_cast<long long>(s.overflow))
        .add("underflow", static_cast<long long>(s.underflow))
        .add("excluded", static_cast<long long>(s.excluded));
    out.push_back(std::move(tail));
    io::Record all;
    all.add("estimator", name)
        .add("group", "all")
        .add("count", static_cast<long long>(s.overall.count))
        .add("mean", s.overall.mean)
        .add("stddev", s.overall.stddev);
    out.push_back(std::move(all));
    for (const auto& [group, g] : s.groups) {
      io::Record r;
      r.add("estimator", name)
          .add("group", group_key + "=" + group)
          .add("count", static_cast<long long>(g.count))
          .add("mean", g.mean)
          .add("stddev", g.stddev);
      out.push_back(std::move(r));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// synth

struct SynthConfig {
  ModelParams g = {1.0, 0.1, 0.2};
  int rows = 8;
  int cols = 8;
  std::size_t count = 100;
  double q = 1.0;
  uint64_t seed = 0;
  uint32_t frame_id = 0;
  bool pixel = false;  // write residuals r = IDCT(Q c) instead of c
};

inline std::vector<io::BlockRecord> synth_blocks(const SynthConfig& sc) {
  check_arg(sc.q > 0.0, "Q must be positive");
  const BlockShape shape(sc.rows, sc.cols);
  check_bound(sc.g, DesignMatrix(shape));
  std::vector<io::BlockRecord> records;
  records.reserve(sc.count);
  for (std::size_t i = 0; i < sc.count; ++i) {
    const auto id = static_cast<uint32_t>(i);
    RandomStream stream = derive_block_stream(sc.seed ^ kSynthSalt, sc.frame_id, id);
    BlockData c = sample_block(sc.g, shape, stream);
    if (sc.pixel) {
      std::vector<double> d(c.values.size());
      for (std::size_t k = 0; k < d.size(); ++k) d[k] = c.values[k] * sc.q;
      records.push_back({sc.frame_id, id,
                         dct2_inverse(BlockData(shape, Domain::kTransformCoefficient,
                                                std::move(d)))});
    } else {
      records.push_back({sc.frame_id, id, std::move(c)});
    }
  }
  return records;
}

inline void cmd_synth(const SynthConfig& sc, const std::string& output) {
  io::BlockDumpHeader header;
  header.domain = sc.pixel ? Domain::kPixelResidual : Domain::kScaledCoefficient;
  header.rows = sc.rows;
  header.cols = sc.cols;
  header.q = sc.q;
  io::write_block_dump(output, header, synth_blocks(sc));
}

}  // namespace laprate::app

#endif  // LAPRATE_APP_COMMANDS_H_
