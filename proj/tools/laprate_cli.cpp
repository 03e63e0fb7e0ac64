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

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "laprate/app/commands.h"

namespace {

using laprate::Error;
using laprate::ErrorCode;
namespace app = laprate::app;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kFormat:
    case ErrorCode::kIo:
      return app::kExitInput;
    case ErrorCode::kInvalidArgument:
      return app::kExitUsage;
    default:
      return app::kExitFailures;
  }
}

std::vector<app::Estimator> parse_estimator_list(const std::string& list) {
  std::vector<app::Estimator> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(app::parse_estimator(item));
  return out;
}

// Options shared by estimate and gradcheck.
struct ModelFlags {
  double tau = 0.4;
  double eps = 0.05;
  double alpha = 1.0;
  double grad_tol = 1e-9;
  int max_iters = 25;
  uint64_t seed = 0;
  int threads = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--tau", tau, "adjustment strength")->capture_default_str();
    cmd->add_option("--eps", eps, "noise half-width")->capture_default_str();
    cmd->add_option("--alpha", alpha, "rate calibration factor")->capture_default_str();
    cmd->add_option("--grad-tol", grad_tol, "Newton gradient tolerance")->capture_default_str();
    cmd->add_option("--max-iters", max_iters, "Newton iteration cap")->capture_default_str();
    cmd->add_option("--seed", seed, "global seed")->capture_default_str();
    cmd->add_option("--threads", threads, "worker threads")->capture_default_str();
  }

  void apply(app::RunConfig& cfg) const {
    cfg.rate.adjust.tau = tau;
    cfg.rate.adjust.eps = eps;
    cfg.rate.alpha = alpha;
    cfg.rate.newton.grad_tol = grad_tol;
    cfg.rate.newton.max_iters = max_iters;
    cfg.seed = seed;
    cfg.threads = threads;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"laprate: differentiable bit-rate estimates for transform blocks"};
  cli.require_subcommand(1);

  // estimate
  ModelFlags est_flags;
  std::string est_input, est_output, est_list = "proposed";
  double est_mu = 1.0, est_theta = 1.0;
  std::optional<double> est_q;
  std::optional<int> est_qp;
  bool est_grad = false;
  std::string est_group = "q";
  auto* estimate = cli.add_subcommand("estimate", "estimate rates for a block dump");
  est_flags.attach(estimate);
  estimate->add_option("--input", est_input, "block dump")->required();
  estimate->add_option("--output", est_output, "record output")->required();
  estimate->add_option("--estimators", est_list,
                       "comma list of proposed|lograte|rhodomain|oracle")
      ->capture_default_str();
  estimate->add_option("--mu", est_mu, "log-rate factor")->capture_default_str();
  estimate->add_option("--theta", est_theta, "rho-domain factor")->capture_default_str();
  auto* q_opt = estimate->add_option("--q", est_q, "quantizer step override");
  estimate->add_option("--qp", est_qp, "QP override (Q = 2^((QP-4)/6))")->excludes(q_opt);
  estimate->add_flag("--grad", est_grad, "emit gradients");
  estimate->add_option("--group-key", est_group, "unused by estimate; accepted for symmetry");

  // gradcheck
  ModelFlags gc_flags;
  app::GradcheckConfig gc;
  int gc_stencil = 4;
  auto* gradcheck = cli.add_subcommand("gradcheck", "check closed-form gradients");
  gc_flags.attach(gradcheck);
  gradcheck->add_option("--blocks", gc.blocks, "number of random blocks")->capture_default_str();
  gradcheck->add_option("--rows", gc.rows, "block rows")->capture_default_str();
  gradcheck->add_option("--cols", gc.cols, "block columns")->capture_default_str();
  gradcheck->add_option("--tolerance", gc.tolerance, "max relative error")->capture_default_str();
  gradcheck->add_option("--step", gc.fd.step, "finite-difference step")->capture_default_str();
  gradcheck->add_option("--stencil", gc_stencil, "2 or 4 point central stencil")
      ->check(CLI::IsMember({2, 4}))
      ->capture_default_str();

  // calibrate
  std::string cal_est, cal_actual, cal_output, cal_joined, cal_group = "q";
  auto* calibrate = cli.add_subcommand("calibrate", "fit calibration factors");
  calibrate->add_option("--estimates", cal_est, "estimate records")->required();
  calibrate->add_option("--actual", cal_actual, "actual-bits records")->required();
  calibrate->add_option("--output", cal_output, "calibration summary")->required();
  calibrate->add_option("--joined", cal_joined, "per-block calibrated ratios for stats");
  calibrate->add_option("--group-key", cal_group, "record field to group by")
      ->capture_default_str();

  // synth
  app::SynthConfig sc;
  std::optional<int> syn_qp;
  std::string syn_output;
  auto* synth = cli.add_subcommand("synth", "write a synthetic block dump");
  synth->add_option("--g0", sc.g[0], "intercept")->capture_default_str();
  synth->add_option("--g1", sc.g[1], "row slope")->capture_default_str();
  synth->add_option("--g2", sc.g[2], "column slope")->capture_default_str();
  synth->add_option("--rows", sc.rows, "block rows")->capture_default_str();
  synth->add_option("--cols", sc.cols, "block columns")->capture_default_str();
  synth->add_option("--count", sc.count, "number of blocks")->capture_default_str();
  auto* syn_q = synth->add_option("--q", sc.q, "quantizer step")->capture_default_str();
  synth->add_option("--qp", syn_qp, "QP (sets Q)")->excludes(syn_q);
  synth->add_option("--seed", sc.seed, "seed")->capture_default_str();
  synth->add_option("--frame", sc.frame_id, "frame id of every block")->capture_default_str();
  synth->add_flag("--pixel", sc.pixel, "write pixel residuals instead of coefficients");
  synth->add_option("--output", syn_output, "block dump")->required();

  // stats
  std::string st_input, st_output, st_group = "q";
  auto* stats = cli.add_subcommand("stats", "ratio histogram and spread");
  stats->add_option("--input", st_input, "records with estimate and actual")->required();
  stats->add_option("--output", st_output, "output (default stdout)");
  stats->add_option("--group-key", st_group, "record field to group by")->capture_default_str();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : app::kExitUsage;
  }

  try {
    if (estimate->parsed()) {
      app::RunConfig cfg;
      est_flags.apply(cfg);
      cfg.estimators = parse_estimator_list(est_list);
      cfg.mu = est_mu;
      cfg.theta = est_theta;
      cfg.q = est_q;
      cfg.qp = est_qp;
      cfg.gradient = est_grad;
      cfg.group_key = est_group;
      const auto summary = app::cmd_estimate(cfg, est_input, est_output);
      for (const auto& [key, bits] : summary.frame_totals)
        std::printf("frame:%u estimator:%s total_bits:%s\n", key.first, key.second.c_str(),
                    laprate::io::format_double(bits).c_str());
      std::printf("blocks:%zu records:%zu failures:%zu\n", summary.blocks, summary.records,
                  summary.failures.size());
      for (const auto& f : summary.failures) std::fprintf(stderr, "failed: %s\n", f.c_str());
      return summary.failures.empty() ? app::kExitOk : app::kExitFailures;
    }
    if (gradcheck->parsed()) {
      app::RunConfig cfg;
      gc_flags.apply(cfg);
      gc.fd.stencil = gc_stencil == 2 ? laprate::FdStencil::kTwoPoint
                                      : laprate::FdStencil::kFourthOrder;
      const auto r = app::cmd_gradcheck(cfg, gc);
      std::printf(
          "blocks:%zu components:%zu max_rel_error:%.3e median_rel_error:%.3e "
          "s_star_min:%.4g s_star_max:%.4g tolerance:%.3e result:%s\n",
          r.blocks, r.components, r.max_rel_error, r.median_rel_error, r.min_s_star,
          r.max_s_star, gc.tolerance, r.passed ? "pass" : "fail");
      for (const auto& f : r.failures) std::fprintf(stderr, "failed: %s\n", f.c_str());
      return r.passed ? app::kExitOk : app::kExitFailures;
    }
    if (calibrate->parsed()) {
      const auto out = app::cmd_calibrate(cal_est, cal_actual, cal_group);
      laprate::io::write_records(cal_output, out.summary);
      if (!cal_joined.empty()) laprate::io::write_records(cal_joined, out.joined);
      for (const auto& r : out.summary) std::printf("%s\n", r.to_line().c_str());
      if (out.missing) {
        std::fprintf(stderr, "%zu estimate records had no actual bits, e.g.:\n", out.missing);
        for (const auto& k : out.missing_keys) std::fprintf(stderr, "  %s\n", k.c_str());
        return app::kExitInput;
      }
      return app::kExitOk;
    }
    if (synth->parsed()) {
      if (syn_qp) sc.q = laprate::qp_to_step(*syn_qp);
      app::cmd_synth(sc, syn_output);
      return app::kExitOk;
    }
    if (stats->parsed()) {
      const auto rows = app::cmd_stats(st_input, st_group);
      if (st_output.empty()) {
        for (const auto& r : rows) std::printf("%s\n", r.to_line().c_str());
      } else {
        laprate::io::write_records(st_output, rows);
      }
      return app::kExitOk;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", laprate::error_code_name(e.code()), e.what());
    return exit_code_for(e);
  }
  return app::kExitUsage;
}
