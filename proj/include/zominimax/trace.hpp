#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zominimax/error.hpp"
#include "zominimax/problem.hpp"
#include "zominimax/vector.hpp"

namespace zominimax {

struct TraceRow {
  std::int64_t t = 0;
  std::uint64_t queries = 0;
  std::uint64_t aux_queries = 0;
  std::vector<double> metrics;
};

/// Per-iteration record of one run. Rows have strictly increasing t,
/// non-decreasing query counts and one value per metric name.
class RunTrace {
 public:
  RunTrace() = default;
  explicit RunTrace(std::vector<std::string> metric_names) : metric_names_(std::move(metric_names)) {}

  void append(TraceRow row) {
    if (row.metrics.size() != metric_names_.size()) {
      throw Error(ErrorKind::kInvalidArgument, "trace row has the wrong number of metrics");
    }
    if (!rows_.empty()) {
      const TraceRow& last = rows_.back();
      if (row.t <= last.t) throw Error(ErrorKind::kInvalidArgument, "trace rows must have increasing t");
      if (row.queries < last.queries || row.aux_queries < last.aux_queries) {
        throw Error(ErrorKind::kInvalidArgument, "trace query counters must be non-decreasing");
      }
    }
    rows_.push_back(std::move(row));
  }

  const std::vector<std::string>& metric_names() const noexcept { return metric_names_; }
  const std::vector<TraceRow>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  const TraceRow& back() const { return rows_.back(); }

  std::optional<std::size_t> metric_index(const std::string& name) const {
    for (std::size_t i = 0; i < metric_names_.size(); ++i) {
      if (metric_names_[i] == name) return i;
    }
    return std::nullopt;
  }

  std::vector<double> column(const std::string& name) const {
    const auto idx = metric_index(name);
    if (!idx) throw Error(ErrorKind::kInvalidArgument, "unknown metric", name);
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const TraceRow& row : rows_) out.push_back(row.metrics[*idx]);
    return out;
  }

  std::string problem_id;
  std::string algorithm;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  Vector final_x;
  Vector final_y;
  /// First iteration at which the stationarity check passed, if any.
  std::optional<std::int64_t> converged_at;
  bool aborted = false;
  std::string error_message;

 private:
  std::vector<std::string> metric_names_;
  std::vector<TraceRow> rows_;
};

/// Metric evaluated at recorded iterates. Any oracle queries it spends must
/// be added to `aux`.
using MetricFn = std::function<double(const Vector& x, const Vector& y, QueryMeter& aux)>;

struct Metric {
  std::string name;
  MetricFn eval;
};

/// Which metrics to record and how often. The initial point and the final
/// iterate are always recorded.
struct Recorder {
  std::vector<Metric> metrics;
  std::int64_t record_every = 1;

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const Metric& m : metrics) out.push_back(m.name);
    return out;
  }

  bool due(std::int64_t t, std::int64_t max_iter) const {
    return t == 0 || t == max_iter || (record_every > 0 && t % record_every == 0);
  }

  TraceRow row(std::int64_t t, const Vector& x, const Vector& y, std::uint64_t queries, QueryMeter& aux) const {
    TraceRow r;
    r.t = t;
    r.metrics.reserve(metrics.size());
    for (const Metric& m : metrics) r.metrics.push_back(m.eval(x, y, aux));
    r.queries = queries;
    r.aux_queries = aux.value();
    return r;
  }
};

/// Thrown when a run aborts; carries the rows recorded so far.
class RunError : public Error {
 public:
  RunError(const Error& cause, RunTrace partial)
      : Error(cause.kind(), cause.message(), cause.context()), partial_(std::move(partial)) {}

  const RunTrace& partial_trace() const noexcept { return partial_; }

 private:
  RunTrace partial_;
};

}  // namespace zominimax
