#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "zominimax/diagnostics.hpp"
#include "zominimax/harness/config.hpp"
#include "zominimax/harness/experiment.hpp"
#include "zominimax/harness/plot.hpp"
#include "zominimax/problems.hpp"

namespace zominimax::harness {

struct CriterionResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ReproduceReport {
  std::string experiment;
  std::vector<ExperimentResult> results;
  std::vector<CriterionResult> criteria;

  bool all_pass() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.pass; });
  }
  bool any_run_failed() const {
    return std::any_of(results.begin(), results.end(), [](const ExperimentResult& r) { return r.any_failed(); });
  }
  std::string summary() const {
    std::ostringstream os;
    for (const CriterionResult& c : criteria) os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    return os.str();
  }
};

inline std::vector<std::uint64_t> seed_range(std::uint64_t n) {
  std::vector<std::uint64_t> s(n);
  std::iota(s.begin(), s.end(), std::uint64_t{0});
  return s;
}

inline constexpr double kWganDistThreshold = 0.05;
inline constexpr std::int64_t kWganIterations = 5000;
inline constexpr double kRegretThreshold = 0.5;
inline constexpr double kRegretQueryBudget = 1e5;
inline constexpr double kReferenceRegretTol = 1e-2;

/// 10 seeds, 5000 iterations, alpha = 0.1, beta = 0.5 for all three;
/// zo-vragda with B = 100, q = b = 10.
inline std::vector<ExperimentConfig> wgan_configs(const std::string& out_dir) {
  ExperimentConfig base;
  base.problem_id = "wgan";
  base.alpha = 0.1;
  base.beta = 0.5;
  base.mu1 = base.mu2 = 1e-3;
  base.seeds = seed_range(10);
  base.max_iter = kWganIterations;
  base.record_every = 50;
  base.metrics = {"dist_to_opt", "grad_x_norm", "grad_y_norm"};
  base.output_dir = out_dir;

  ExperimentConfig agda = base;
  agda.algorithm = Algorithm::kZoAgda;
  ExperimentConfig vr = base;
  vr.algorithm = Algorithm::kZoVragda;
  vr.B = 100;
  vr.q = 10;
  vr.b = 10;
  ExperimentConfig fo = base;
  fo.algorithm = Algorithm::kFoAgda;
  return {agda, vr, fo};
}

/// 5 seeds on the noisy robust polynomial (value noise variance 0.5),
/// alpha = beta = 0.1 for all three; zo-vragda with B = 50, q = 2, b = 10.
/// Iteration counts give each algorithm about 1e5 function queries.
inline std::vector<ExperimentConfig> robust_poly_configs(const std::string& out_dir) {
  ExperimentConfig base;
  base.problem_id = "robust-poly-noisy";
  base.problem_params = json{{"noise_variance", 0.5}};
  base.alpha = 0.1;
  base.beta = 0.1;
  base.mu1 = base.mu2 = 1e-3;
  base.seeds = seed_range(5);
  base.metrics = {"regret", "dist_to_opt"};
  base.output_dir = out_dir;

  ExperimentConfig vr = base;
  vr.algorithm = Algorithm::kZoVragda;
  vr.B = 50;
  vr.q = 2;
  vr.b = 10;
  vr.max_iter = 720;  // 140 queries per iteration on average
  vr.record_every = 1;
  ExperimentConfig agda = base;
  agda.algorithm = Algorithm::kZoAgda;
  agda.max_iter = 25000;  // 4 per iteration
  agda.record_every = 25;
  ExperimentConfig fo = base;
  fo.algorithm = Algorithm::kFoAgda;
  fo.max_iter = 50000;  // 2 gradient calls per iteration
  fo.record_every = 50;
  return {vr, agda, fo};
}

namespace detail {

inline double mean_of(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += v[i];
  return s / static_cast<double>(hi - lo);
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

/// First-decile and final-decile means of a curve.
inline std::pair<double, double> decile_means(const std::vector<double>& curve) {
  const std::size_t n = curve.size();
  const std::size_t k = std::max<std::size_t>(1, n / 10);
  return {mean_of(curve, 0, k), mean_of(curve, n - k, n)};
}

/// Mean over seeds of each seed's best regret so far, with the mean query count.
inline std::vector<std::pair<double, double>> best_regret_curve(const ExperimentResult& r) {
  std::vector<std::vector<double>> best;
  std::vector<std::vector<double>> queries;
  for (const RunOutcome& o : r.runs) {
    if (o.failed) continue;
    const auto col = o.trace.column("regret");
    std::vector<double> b;
    std::vector<double> q;
    double run_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < col.size(); ++i) {
      run_min = std::min(run_min, col[i]);
      b.push_back(run_min);
      q.push_back(static_cast<double>(o.trace.rows()[i].queries));
    }
    best.push_back(std::move(b));
    queries.push_back(std::move(q));
  }
  std::vector<std::pair<double, double>> out;
  if (best.empty()) return out;
  std::size_t n = best.front().size();
  for (const auto& b : best) n = std::min(n, b.size());
  for (std::size_t i = 0; i < n; ++i) {
    double mq = 0.0, mb = 0.0;
    for (std::size_t s = 0; s < best.size(); ++s) {
      mq += queries[s][i];
      mb += best[s][i];
    }
    out.emplace_back(mq / best.size(), mb / best.size());
  }
  return out;
}

}  // namespace detail

inline std::vector<CriterionResult> wgan_criteria(const std::vector<ExperimentResult>& results) {
  std::vector<CriterionResult> out;
  for (const ExperimentResult& r : results) {
    const auto& rows = r.aggregate.rows;
    CriterionResult reach{"wgan " + r.series + " mean dist < 0.05 within 5000 iterations", false, ""};
    CriterionResult trend{"wgan " + r.series + " final-decile mean < first-decile mean", false, ""};
    if (rows.empty()) {
      reach.detail = trend.detail = "no completed seeds";
    } else {
      const auto dist = r.aggregate.mean_column("dist_to_opt");
      std::int64_t first = -1;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows.size(); ++i) {
        best = std::min(best, dist[i]);
        if (first < 0 && rows[i].t <= kWganIterations && dist[i] < kWganDistThreshold) first = rows[i].t;
      }
      reach.pass = first >= 0;
      reach.detail = (reach.pass ? "first at t=" + std::to_string(first) : "never") + ", min mean dist " +
                     detail::fmt(best) + ", final " + detail::fmt(dist.back()) + " over " +
                     std::to_string(rows.front().n) + " seeds";
      const auto [head, tail] = detail::decile_means(dist);
      trend.pass = tail < head;
      trend.detail = "first decile " + detail::fmt(head) + ", final decile " + detail::fmt(tail);
    }
    out.push_back(reach);
    out.push_back(trend);
  }
  return out;
}

inline std::vector<CriterionResult> robust_poly_criteria(const std::vector<ExperimentResult>& results) {
  std::vector<CriterionResult> out;
  for (const ExperimentResult& r : results) {
    if (r.series != "zo-vragda") continue;
    CriterionResult c{"robust-poly zo-vragda mean best regret < 0.5 within 1e5 queries", false, ""};
    const auto curve = detail::best_regret_curve(r);
    double at_budget = std::numeric_limits<double>::infinity();
    double first_q = -1.0;
    for (const auto& [q, b] : curve) {
      if (q > kRegretQueryBudget) break;
      at_budget = b;
      if (first_q < 0.0 && b < kRegretThreshold) first_q = q;
    }
    c.pass = first_q >= 0.0;
    c.detail = (c.pass ? "first at " + detail::fmt(first_q) + " queries" : std::string("never")) +
               ", best-so-far mean at budget " + detail::fmt(at_budget);
    out.push_back(c);
  }

  const MinimaxProblem p = make_robust_polynomial();
  QueryMeter meter;
  const RegretResult multi = regret(p, *p.reference_x, RegretOptions{}, meter);
  const RegretResult grid = grid_inner_minimum(p, *p.reference_x);
  CriterionResult ref{"robust-poly regret(x*) <= 1e-2, multi-start cross-checked by grid", false, ""};
  const bool agree = std::abs(multi.inner_min - grid.inner_min) <= kReferenceRegretTol;
  ref.pass = multi.regret <= kReferenceRegretTol && grid.regret <= kReferenceRegretTol && agree;
  ref.detail = "multi-start min " + detail::fmt(multi.inner_min) + " (regret " + detail::fmt(multi.regret) +
               "), grid min " + detail::fmt(grid.inner_min) + " (regret " + detail::fmt(grid.regret) + ")";
  out.push_back(ref);
  return out;
}

/// Runs the pinned configurations for `experiment` (wgan or robust-poly),
/// writes traces, a combined aggregate, plots and summary.txt under out_dir.
inline ReproduceReport reproduce(const std::string& experiment, const std::string& out_dir,
                                 const RunOptions& opts = {}) {
  ReproduceReport report;
  report.experiment = experiment;
  std::vector<ExperimentConfig> configs;
  std::vector<PlotSpec> plots;
  if (experiment == "wgan") {
    configs = wgan_configs(out_dir);
    plots = {{"dist_to_opt", XAxis::kIteration, false, "WGAN: distance to optimal generator"},
             {"grad_x_norm", XAxis::kIteration, true, "WGAN: generator gradient norm"},
             {"grad_y_norm", XAxis::kIteration, true, "WGAN: discriminator gradient norm"}};
  } else if (experiment == "robust-poly") {
    configs = robust_poly_configs(out_dir);
    plots = {{"regret", XAxis::kQueries, false, "Robust polynomial: regret vs function queries"},
             {"regret", XAxis::kIteration, false, "Robust polynomial: regret vs iteration"}};
  } else {
    throw Error(ErrorKind::kInvalidArgument, "unknown experiment '" + experiment + "'", "expected wgan or robust-poly");
  }
  for (const ExperimentConfig& c : configs) report.results.push_back(run_experiment(c, opts));

  std::vector<Aggregate> aggs;
  for (const ExperimentResult& r : report.results) aggs.push_back(r.aggregate);
  report.criteria = experiment == "wgan" ? wgan_criteria(report.results) : robust_poly_criteria(report.results);

  if (opts.write_files) {
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    write_file(dir / "aggregate.csv", aggregate_csv(aggs));
    for (const PlotSpec& ps : plots) {
      const std::string name =
          ps.metric + (ps.x_axis == XAxis::kQueries ? "_vs_queries" : "_vs_iteration") + ".svg";
      write_file(dir / name, render_svg(aggs, ps));
    }
    write_file(dir / "summary.txt", report.summary());
  }
  return report;
}

}  // namespace zominimax::harness
