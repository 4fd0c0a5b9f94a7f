#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "zominimax/agda.hpp"
#include "zominimax/error.hpp"
#include "zominimax/harness/metrics.hpp"
#include "zominimax/problems.hpp"
#include "zominimax/vragda.hpp"

namespace zominimax::harness {

using json = nlohmann::json;
using AnyProblem = std::variant<MinimaxProblem, StochasticMinimaxProblem>;

enum class Algorithm { kZoAgda, kZoVragda, kFoAgda };
enum class ParamMode { kExplicit, kTheory };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kZoAgda: return "zo-agda";
    case Algorithm::kZoVragda: return "zo-vragda";
    case Algorithm::kFoAgda: return "fo-agda";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "zo-agda") return Algorithm::kZoAgda;
  if (s == "zo-vragda") return Algorithm::kZoVragda;
  if (s == "fo-agda") return Algorithm::kFoAgda;
  throw Error(ErrorKind::kInvalidArgument, "unknown algorithm '" + s + "'", "expected zo-agda, zo-vragda or fo-agda");
}

inline bool is_stochastic(const AnyProblem& p) { return std::holds_alternative<StochasticMinimaxProblem>(p); }

inline const ProblemInfo& info(const AnyProblem& p) {
  return std::visit([](const auto& q) -> const ProblemInfo& { return q; }, p);
}

/// The problem metrics are measured on; null when none exists.
inline std::shared_ptr<const MinimaxProblem> evaluation_problem(const AnyProblem& p) {
  if (const auto* det = std::get_if<MinimaxProblem>(&p)) return std::make_shared<MinimaxProblem>(*det);
  const auto& sto = std::get<StochasticMinimaxProblem>(p);
  if (!sto.expected) return nullptr;
  return std::make_shared<MinimaxProblem>(*sto.expected);
}

namespace detail {

inline Matrix matrix_from_json(const json& j, const char* key) {
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) throw Error(ErrorKind::kInvalidArgument, "matrix must be a number or array of rows", key);
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).is_array() ? j.at(0).size() : 1);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j.at(static_cast<std::size_t>(r));
    if (row.is_number()) {
      if (cols != 1) throw Error(ErrorKind::kDimensionMismatch, "ragged matrix", key);
      m(r, 0) = row.get<double>();
      continue;
    }
    if (static_cast<Eigen::Index>(row.size()) != cols) throw Error(ErrorKind::kDimensionMismatch, "ragged matrix", key);
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

inline Vector vector_from_json(const json& j, const char* key) {
  if (!j.is_array()) throw Error(ErrorKind::kInvalidArgument, "expected an array", key);
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

}  // namespace detail

/// Builds a registered problem. Keys in `params` by id:
///   pl-quadratic: A, B, C (number or row arrays; default 1), noise_variance
///   wgan: lambda, real_mean, real_std, variance_convention (bool)
///   robust-poly: noise_variance;  robust-poly-noisy: noise_variance (0.5)
inline AnyProblem make_problem(const std::string& id, const json& params = json::object()) {
  const json p = params.is_null() ? json::object() : params;
  if (id == "pl-quadratic") {
    PlQuadraticSpec spec;
    spec.A = p.contains("A") ? detail::matrix_from_json(p.at("A"), "A") : Matrix::Constant(1, 1, 1.0);
    spec.Bm = p.contains("B") ? detail::matrix_from_json(p.at("B"), "B") : Matrix::Constant(1, 1, 1.0);
    spec.Cm = p.contains("C") ? detail::matrix_from_json(p.at("C"), "C") : Matrix::Constant(1, 1, 1.0);
    MinimaxProblem q = make_pl_quadratic(spec);
    if (p.contains("noise_variance")) return with_value_noise(q, p.at("noise_variance").get<double>());
    return q;
  }
  if (id == "wgan") {
    WganSpec spec;
    if (detail::get_or(p, "variance_convention", false)) spec = WganSpec::variance_convention();
    spec.lambda = detail::get_or(p, "lambda", spec.lambda);
    spec.real_mean = detail::get_or(p, "real_mean", spec.real_mean);
    spec.real_std = detail::get_or(p, "real_std", spec.real_std);
    return make_wgan(spec);
  }
  if (id == "robust-poly") {
    MinimaxProblem q = make_robust_polynomial();
    if (p.contains("noise_variance")) return with_value_noise(q, p.at("noise_variance").get<double>());
    return q;
  }
  if (id == "robust-poly-noisy") return noisy_robust_polynomial(detail::get_or(p, "noise_variance", 0.5));
  throw Error(ErrorKind::kInvalidArgument, "unknown problem '" + id + "'",
              "expected pl-quadratic, wgan, robust-poly or robust-poly-noisy");
}

/// One experiment: a problem, an algorithm and a list of seeds.
struct ExperimentConfig {
  std::string problem_id;
  json problem_params = json::object();
  Algorithm algorithm = Algorithm::kZoAgda;
  /// Series name used for output files; defaults to the algorithm name.
  std::string label;

  ParamMode mode = ParamMode::kExplicit;
  double eps = 0.1;
  std::int64_t max_batch = 100000;

  double alpha = 0.1;
  double beta = 0.1;
  double mu1 = 1e-3;
  double mu2 = 1e-3;
  std::int64_t q = 10;
  std::int64_t B = 100;
  std::int64_t b = 10;
  bool projection = true;
  double target_eps = 0.0;
  std::int64_t check_every = 100;

  std::vector<std::uint64_t> seeds;
  std::int64_t max_iter = 1000;
  std::int64_t record_every = 1;
  std::vector<std::string> metrics;
  std::string output_dir = "out";
  std::optional<StartPoint> start;

  std::string series() const { return label.empty() ? to_string(algorithm) : label; }

  void validate() const {
    if (seeds.empty()) throw Error(ErrorKind::kInvalidArgument, "seeds must be non-empty");
    if (record_every < 1) throw Error(ErrorKind::kInvalidArgument, "record_every must be >= 1");
    if (max_iter < 1) throw Error(ErrorKind::kInvalidArgument, "max_iter must be >= 1");
    for (const std::string& m : metrics) {
      if (!is_known_metric(m)) {
        throw Error(ErrorKind::kInvalidArgument, "unknown metric '" + m + "'", "available: " + catalog_list());
      }
    }
    if (mode == ParamMode::kTheory && algorithm == Algorithm::kFoAgda) {
      throw Error(ErrorKind::kInvalidArgument, "fo-agda has no theory parameter mode");
    }
    if (mode == ParamMode::kTheory && !(eps > 0.0)) throw Error(ErrorKind::kInvalidArgument, "theory mode needs eps > 0");
  }

  static ExperimentConfig from_json(const json& j) {
    ExperimentConfig c;
    try {
      const json& prob = j.at("problem");
      if (prob.is_string()) {
        c.problem_id = prob.get<std::string>();
      } else {
        c.problem_id = prob.at("id").get<std::string>();
        if (prob.contains("params")) c.problem_params = prob.at("params");
      }
      c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
      c.label = detail::get_or<std::string>(j, "label", "");
      if (j.contains("params")) {
        const json& pr = j.at("params");
        const std::string mode = detail::get_or<std::string>(pr, "mode", "explicit");
        if (mode == "theory") {
          c.mode = ParamMode::kTheory;
        } else if (mode != "explicit") {
          throw Error(ErrorKind::kInvalidArgument, "params.mode must be explicit or theory");
        }
        c.eps = detail::get_or(pr, "eps", c.eps);
        c.max_batch = detail::get_or(pr, "max_batch", c.max_batch);
        c.alpha = detail::get_or(pr, "alpha", c.alpha);
        c.beta = detail::get_or(pr, "beta", c.beta);
        c.mu1 = detail::get_or(pr, "mu1", c.mu1);
        c.mu2 = detail::get_or(pr, "mu2", c.mu2);
        c.q = detail::get_or(pr, "q", c.q);
        c.B = detail::get_or(pr, "B", c.B);
        c.b = detail::get_or(pr, "b", c.b);
        c.projection = detail::get_or(pr, "projection", c.projection);
        c.target_eps = detail::get_or(pr, "target_eps", c.target_eps);
        c.check_every = detail::get_or(pr, "check_every", c.check_every);
      }
      c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
      c.max_iter = j.at("max_iter").get<std::int64_t>();
      c.record_every = detail::get_or<std::int64_t>(j, "record_every", 1);
      c.metrics = detail::get_or(j, "metrics", std::vector<std::string>{});
      c.output_dir = detail::get_or<std::string>(j, "output_dir", "out");
      if (j.contains("start")) {
        const json& s = j.at("start");
        c.start = StartPoint{detail::vector_from_json(s.at("x"), "start.x"), detail::vector_from_json(s.at("y"), "start.y")};
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kInvalidArgument, "malformed experiment config", e.what());
    }
    c.validate();
    return c;
  }

  static ExperimentConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kIo, "cannot open config", path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kInvalidArgument, "config is not valid JSON", path + ": " + e.what());
    }
    return from_json(j);
  }
};

/// Checks the problem against the algorithm and builds the stepsize configs.
inline void check_compatible(const ExperimentConfig& c, const AnyProblem& p) {
  if (c.algorithm == Algorithm::kZoVragda && !is_stochastic(p)) {
    throw Error(ErrorKind::kInvalidArgument, "zo-vragda requires a stochastic problem", c.problem_id);
  }
  if (c.algorithm == Algorithm::kFoAgda) {
    const bool grads = std::visit([](const auto& q) { return q.has_analytic_grads(); }, p);
    if (!grads) throw Error(ErrorKind::kMissingOracle, "fo-agda needs analytic gradients", c.problem_id);
  }
}

inline AgdaConfig agda_config(const ExperimentConfig& c, const ProblemInfo& p) {
  AgdaConfig a;
  if (c.mode == ParamMode::kTheory) {
    a = derive_agda_params(p.constants, p.d1, p.d2, c.eps);
  } else {
    a.alpha = c.alpha;
    a.beta = c.beta;
    a.smoothing = {c.mu1, c.mu2};
    a.target_eps = c.target_eps;
  }
  a.max_iter = c.max_iter;
  a.check_every = c.check_every;
  a.projection_enabled = c.projection;
  return a;
}

inline VragdaConfig vragda_config(const ExperimentConfig& c, const ProblemInfo& p) {
  VragdaConfig v;
  if (c.mode == ParamMode::kTheory) {
    v = derive_vragda_params(p.constants, p.d1, p.d2, c.eps, c.max_batch);
  } else {
    v.alpha = c.alpha;
    v.beta = c.beta;
    v.smoothing = {c.mu1, c.mu2};
    v.q = c.q;
    v.B = c.B;
    v.b = c.b;
    v.target_eps = c.target_eps;
  }
  v.max_iter = c.max_iter;
  v.check_every = c.check_every;
  v.projection_enabled = c.projection;
  return v;
}

inline FoAgdaConfig fo_config(const ExperimentConfig& c) {
  FoAgdaConfig f;
  f.alpha = c.alpha;
  f.beta = c.beta;
  f.max_iter = c.max_iter;
  f.projection_enabled = c.projection;
  return f;
}

}  // namespace zominimax::harness
