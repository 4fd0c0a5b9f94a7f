#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "zominimax/harness/config.hpp"
#include "zominimax/harness/metrics.hpp"
#include "zominimax/rng.hpp"
#include "zominimax/trace.hpp"

namespace zominimax::harness {

/// %.17g: round-trips every finite double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw Error(ErrorKind::kIo, "bad number in CSV", s);
  return v;
}

// ---- per-seed traces -------------------------------------------------------

inline std::string trace_csv(const RunTrace& trace) {
  std::ostringstream os;
  os << "t,queries,aux_queries";
  for (const std::string& n : trace.metric_names()) os << ',' << n;
  os << '\n';
  for (const TraceRow& r : trace.rows()) {
    os << r.t << ',' << r.queries << ',' << r.aux_queries;
    for (double v : r.metrics) os << ',' << format_double(v);
    os << '\n';
  }
  return os.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write file", path.string());
  out << content;
  if (!out) throw Error(ErrorKind::kIo, "write failed", path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open file", path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Parses a file written by trace_csv.
inline RunTrace read_trace_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kIo, "empty trace file", path.string());
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "t" || header[1] != "queries" || header[2] != "aux_queries") {
    throw Error(ErrorKind::kIo, "not a trace file", path.string());
  }
  RunTrace trace(std::vector<std::string>(header.begin() + 3, header.end()));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw Error(ErrorKind::kIo, "ragged trace row", path.string());
    TraceRow r;
    r.t = std::stoll(cells[0]);
    r.queries = std::stoull(cells[1]);
    r.aux_queries = std::stoull(cells[2]);
    for (std::size_t i = 3; i < cells.size(); ++i) r.metrics.push_back(parse_double(cells[i]));
    trace.append(std::move(r));
  }
  return trace;
}

// ---- aggregation -------------------------------------------------------------

/// Welford accumulator; std is the n-1 estimator and 0 for a single value.
struct Running {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double v) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  double stddev() const { return n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0; }
};

struct AggregateRow {
  std::int64_t t = 0;
  std::size_t n = 0;
  double queries_mean = 0.0, queries_std = 0.0;
  double aux_mean = 0.0, aux_std = 0.0;
  std::vector<double> mean;
  std::vector<double> std;
};

struct Aggregate {
  std::string series;
  std::vector<std::string> metric_names;
  std::vector<AggregateRow> rows;

  std::vector<double> mean_column(const std::string& metric) const {
    const auto it = std::find(metric_names.begin(), metric_names.end(), metric);
    if (it == metric_names.end()) throw Error(ErrorKind::kInvalidArgument, "unknown metric", metric);
    const auto k = static_cast<std::size_t>(it - metric_names.begin());
    std::vector<double> out;
    for (const AggregateRow& r : rows) out.push_back(r.mean[k]);
    return out;
  }
};

/// Mean and sample std across traces at every t recorded by all of them.
inline Aggregate aggregate(const std::string& series, const std::vector<const RunTrace*>& traces) {
  Aggregate agg;
  agg.series = series;
  if (traces.empty()) return agg;
  agg.metric_names = traces.front()->metric_names();
  for (const RunTrace* tr : traces) {
    if (tr->metric_names() != agg.metric_names) {
      throw Error(ErrorKind::kInvalidArgument, "cannot aggregate traces with different metrics");
    }
  }
  std::vector<std::int64_t> common;
  for (const TraceRow& r : traces.front()->rows()) common.push_back(r.t);
  for (std::size_t i = 1; i < traces.size(); ++i) {
    std::vector<std::int64_t> ts;
    for (const TraceRow& r : traces[i]->rows()) ts.push_back(r.t);
    std::vector<std::int64_t> both;
    std::set_intersection(common.begin(), common.end(), ts.begin(), ts.end(), std::back_inserter(both));
    common = std::move(both);
  }
  std::vector<std::size_t> cursor(traces.size(), 0);
  const std::size_t k = agg.metric_names.size();
  for (std::int64_t t : common) {
    Running q, aux;
    std::vector<Running> m(k);
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const auto& rows = traces[i]->rows();
      while (rows[cursor[i]].t != t) ++cursor[i];
      const TraceRow& r = rows[cursor[i]];
      q.push(static_cast<double>(r.queries));
      aux.push(static_cast<double>(r.aux_queries));
      for (std::size_t j = 0; j < k; ++j) m[j].push(r.metrics[j]);
    }
    AggregateRow row;
    row.t = t;
    row.n = traces.size();
    row.queries_mean = q.mean;
    row.queries_std = q.stddev();
    row.aux_mean = aux.mean;
    row.aux_std = aux.stddev();
    for (const Running& r : m) {
      row.mean.push_back(r.mean);
      row.std.push_back(r.stddev());
    }
    agg.rows.push_back(std::move(row));
  }
  return agg;
}

inline std::string aggregate_header(const std::vector<std::string>& metric_names) {
  std::string h = "series,t,n,queries_mean,queries_std,aux_queries_mean,aux_queries_std";
  for (const std::string& m : metric_names) h += "," + m + "_mean," + m + "_std";
  return h;
}

/// Rows of one aggregate, without the header line.
inline std::string aggregate_rows_csv(const Aggregate& agg) {
  std::ostringstream os;
  for (const AggregateRow& r : agg.rows) {
    os << agg.series << ',' << r.t << ',' << r.n << ',' << format_double(r.queries_mean) << ','
       << format_double(r.queries_std) << ',' << format_double(r.aux_mean) << ',' << format_double(r.aux_std);
    for (std::size_t j = 0; j < r.mean.size(); ++j) os << ',' << format_double(r.mean[j]) << ',' << format_double(r.std[j]);
    os << '\n';
  }
  return os.str();
}

/// Several series with identical metric lists in one file.
inline std::string aggregate_csv(const std::vector<Aggregate>& series) {
  if (series.empty()) return "";
  std::string out = aggregate_header(series.front().metric_names) + "\n";
  for (const Aggregate& a : series) {
    if (a.metric_names != series.front().metric_names) {
      throw Error(ErrorKind::kInvalidArgument, "series in one aggregate file must share metrics");
    }
    out += aggregate_rows_csv(a);
  }
  return out;
}

inline std::vector<Aggregate> read_aggregate_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kIo, "empty aggregate file", path.string());
  const auto header = split_csv_line(line);
  if (header.size() < 7 || header[0] != "series" || (header.size() - 7) % 2 != 0) {
    throw Error(ErrorKind::kIo, "not an aggregate file", path.string());
  }
  std::vector<std::string> metrics;
  for (std::size_t i = 7; i < header.size(); i += 2) {
    const std::string& h = header[i];
    if (h.size() < 5 || h.compare(h.size() - 5, 5, "_mean") != 0) throw Error(ErrorKind::kIo, "bad column", h);
    metrics.push_back(h.substr(0, h.size() - 5));
  }
  std::vector<Aggregate> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != header.size()) throw Error(ErrorKind::kIo, "ragged aggregate row", path.string());
    if (out.empty() || out.back().series != c[0]) {
      out.push_back(Aggregate{c[0], metrics, {}});
    }
    AggregateRow r;
    r.t = std::stoll(c[1]);
    r.n = std::stoull(c[2]);
    r.queries_mean = parse_double(c[3]);
    r.queries_std = parse_double(c[4]);
    r.aux_mean = parse_double(c[5]);
    r.aux_std = parse_double(c[6]);
    for (std::size_t i = 7; i < c.size(); i += 2) {
      r.mean.push_back(parse_double(c[i]));
      r.std.push_back(parse_double(c[i + 1]));
    }
    out.back().rows.push_back(std::move(r));
  }
  return out;
}

// ---- running -----------------------------------------------------------------

struct RunOutcome {
  std::uint64_t seed = 0;
  RunTrace trace;
  bool failed = false;
  std::string error;
};

struct ExperimentResult {
  std::string series;
  std::vector<RunOutcome> runs;
  Aggregate aggregate;
  std::vector<std::string> warnings;

  bool any_failed() const {
    return std::any_of(runs.begin(), runs.end(), [](const RunOutcome& r) { return r.failed; });
  }
};

struct RunOptions {
  std::uint64_t seed_offset = 0;
  /// Concurrent seeds; 0 reads ZO_MINIMAX_THREADS, then hardware concurrency.
  unsigned threads = 0;
  bool write_files = true;
  MetricOptions metric_options;
};

inline unsigned thread_budget(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ZO_MINIMAX_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// One seed, start to finish. Throws RunError on abort.
inline RunTrace run_single(const ExperimentConfig& c, const AnyProblem& problem, const Recorder& rec,
                           std::uint64_t seed) {
  const RngStream rng(seed);
  const ProblemInfo& pi = info(problem);
  return std::visit(
      [&](const auto& p) -> RunTrace {
        using P = std::decay_t<decltype(p)>;
        switch (c.algorithm) {
          case Algorithm::kZoAgda:
            return run_agda(p, agda_config(c, pi), rng, rec, c.start);
          case Algorithm::kFoAgda:
            return run_fo_agda(p, fo_config(c), rng, rec, c.start);
          case Algorithm::kZoVragda:
            if constexpr (std::is_same_v<P, StochasticMinimaxProblem>) {
              return run_vragda(p, vragda_config(c, pi), rng, rec, c.start);
            } else {
              throw Error(ErrorKind::kInvalidArgument, "zo-vragda requires a stochastic problem", p.id);
            }
        }
        throw Error(ErrorKind::kInvalidArgument, "unknown algorithm");
      },
      problem);
}

inline void write_outputs(const ExperimentConfig& c, const ExperimentResult& r) {
  namespace fs = std::filesystem;
  const fs::path dir(c.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create output directory", dir.string());
  json runs = json::array();
  for (const RunOutcome& o : r.runs) {
    write_file(dir / (r.series + "_seed" + std::to_string(o.seed) + ".csv"), trace_csv(o.trace));
    json entry = {{"seed", o.seed}, {"failed", o.failed}, {"error", o.error}, {"rows", o.trace.size()}};
    if (o.trace.converged_at) entry["converged_at"] = *o.trace.converged_at;
    runs.push_back(entry);
  }
  json meta = {{"series", r.series},        {"problem", c.problem_id}, {"algorithm", to_string(c.algorithm)},
               {"max_iter", c.max_iter},    {"runs", runs},           {"warnings", r.warnings}};
  if (!r.runs.empty()) meta["config"] = r.runs.front().trace.config;
  write_file(dir / (r.series + "_runs.json"), meta.dump(2) + "\n");
  write_file(dir / (r.series + "_aggregate.csv"), aggregate_csv({r.aggregate}));
}

/// Runs every seed (concurrently, each with its own stream), aggregates the
/// completed ones and writes traces plus aggregate to the output directory.
inline ExperimentResult run_experiment(const ExperimentConfig& c, const RunOptions& opts = {}) {
  c.validate();
  const AnyProblem problem = make_problem(c.problem_id, c.problem_params);
  check_compatible(c, problem);
  std::shared_ptr<const MinimaxProblem> eval = evaluation_problem(problem);
  if (!eval && !c.metrics.empty()) {
    throw Error(ErrorKind::kUnsupported, "metrics need a closed-form expectation", c.problem_id);
  }
  const Recorder rec = make_recorder(c.metrics, eval, c.record_every, opts.metric_options);

  ExperimentResult result;
  result.series = c.series();
  result.runs.resize(c.seeds.size());
  for (std::size_t i = 0; i < c.seeds.size(); ++i) result.runs[i].seed = c.seeds[i] + opts.seed_offset;

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < result.runs.size(); i = next++) {
      RunOutcome& o = result.runs[i];
      try {
        o.trace = run_single(c, problem, rec, o.seed);
      } catch (const RunError& e) {
        o.failed = true;
        o.error = e.what();
        o.trace = e.partial_trace();
      } catch (const std::exception& e) {
        o.failed = true;
        o.error = e.what();
      }
    }
  };
  const unsigned n_threads = std::min<unsigned>(thread_budget(opts.threads), static_cast<unsigned>(c.seeds.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  std::vector<const RunTrace*> done;
  for (const RunOutcome& o : result.runs) {
    if (!o.failed) {
      done.push_back(&o.trace);
    } else {
      result.warnings.push_back("seed " + std::to_string(o.seed) + " failed: " + o.error);
    }
  }
  if (done.size() < result.runs.size()) {
    result.warnings.push_back("aggregate over " + std::to_string(done.size()) + " of " +
                              std::to_string(result.runs.size()) + " seeds");
  }
  result.aggregate = aggregate(result.series, done);
  if (result.aggregate.metric_names.empty()) result.aggregate.metric_names = rec.names();
  if (opts.write_files) write_outputs(c, result);
  return result;
}

}  // namespace zominimax::harness
