#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "zominimax/diagnostics.hpp"
#include "zominimax/error.hpp"
#include "zominimax/problem.hpp"
#include "zominimax/trace.hpp"

namespace zominimax::harness {

inline constexpr std::array<std::string_view, 7> kMetricCatalog = {
    "dist_to_opt", "grad_phi_norm", "grad_x_norm", "grad_y_norm", "potential_v", "regret", "value"};

inline bool is_known_metric(std::string_view name) {
  for (std::string_view m : kMetricCatalog) {
    if (m == name) return true;
  }
  return false;
}

inline std::string catalog_list() {
  std::string out;
  for (std::string_view m : kMetricCatalog) {
    if (!out.empty()) out += ", ";
    out += m;
  }
  return out;
}

struct MetricOptions {
  StationarityOptions stationarity;
  RegretOptions regret;
};

// Metrics are measured on `eval`, the deterministic problem or the closed-form
// expectation of a stochastic one. Oracle calls go to the aux meter.
inline Metric make_metric(const std::string& name, std::shared_ptr<const MinimaxProblem> eval,
                          const MetricOptions& opts = {}) {
  if (!eval) throw Error(ErrorKind::kUnsupported, "metrics need a deterministic evaluation problem", name);
  const MinimaxProblem& p = *eval;
  if (name == "dist_to_opt") {
    if (!p.reference_x) throw Error(ErrorKind::kUnsupported, "dist_to_opt needs a known x*", p.id);
    return {name, [eval](const Vector& x, const Vector&, QueryMeter&) { return (x - *eval->reference_x).norm(); }};
  }
  if (name == "grad_phi_norm") {
    return {name, [eval, o = opts.stationarity](const Vector& x, const Vector& y, QueryMeter& aux) {
              return stationarity(*eval, x, y, o, aux).grad_phi_norm;
            }};
  }
  if (name == "grad_x_norm") {
    return {name, [eval, h = opts.stationarity.fd_step](const Vector& x, const Vector& y, QueryMeter& aux) {
              return detail::grad_x_of(*eval, x, y, h, aux).norm();
            }};
  }
  if (name == "grad_y_norm") {
    return {name, [eval, h = opts.stationarity.fd_step](const Vector& x, const Vector& y, QueryMeter& aux) {
              return detail::grad_y_of(*eval, x, y, h, aux).norm();
            }};
  }
  if (name == "potential_v") {
    return {name, [eval, o = opts.stationarity](const Vector& x, const Vector& y, QueryMeter& aux) {
              return potential_v(*eval, x, y, o, aux);
            }};
  }
  if (name == "regret") {
    if (!p.reference_value || !p.y_feasible) {
      throw Error(ErrorKind::kUnsupported, "regret needs a reference value and a bounded y set", p.id);
    }
    return {name, [eval, o = opts.regret](const Vector& x, const Vector&, QueryMeter& aux) {
              return regret(*eval, x, o, aux).regret;
            }};
  }
  if (name == "value") {
    return {name, [eval](const Vector& x, const Vector& y, QueryMeter& aux) {
              aux.add(1);
              return eval->value(x, y);
            }};
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown metric '" + name + "'", "available: " + catalog_list());
}

inline Recorder make_recorder(const std::vector<std::string>& names, std::shared_ptr<const MinimaxProblem> eval,
                              std::int64_t record_every, const MetricOptions& opts = {}) {
  Recorder rec;
  rec.record_every = record_every;
  for (const std::string& n : names) rec.metrics.push_back(make_metric(n, eval, opts));
  return rec;
}

}  // namespace zominimax::harness
