#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "zominimax/error.hpp"
#include "zominimax/rng.hpp"
#include "zominimax/vector.hpp"

namespace zominimax {

/// Constants the parameter schedules consume: gradient-Lipschitz l, PL
/// constant mu_pl and (stochastic problems only) the estimator noise bound.
class ProblemConstants {
 public:
  ProblemConstants() = default;

  ProblemConstants(double l, double mu_pl, std::optional<double> sigma = std::nullopt,
                   std::optional<double> known_optimum = std::nullopt)
      : l_(l), mu_pl_(mu_pl), sigma_(sigma), known_optimum_(known_optimum) {
    if (!(std::isfinite(l) && l > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "Lipschitz constant l must be finite and > 0");
    }
    if (!(std::isfinite(mu_pl) && mu_pl > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "PL constant must be finite and > 0");
    }
    // An l-smooth function cannot satisfy PL with a larger constant.
    if (l < mu_pl) {
      throw Error(ErrorKind::kInvalidArgument, "l < mu_pl gives kappa < 1");
    }
    if (sigma && !(std::isfinite(*sigma) && *sigma >= 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "sigma must be finite and >= 0");
    }
  }

  double l() const noexcept { return l_; }
  double mu_pl() const noexcept { return mu_pl_; }
  const std::optional<double>& sigma() const noexcept { return sigma_; }
  const std::optional<double>& known_optimum() const noexcept { return known_optimum_; }

  double kappa() const noexcept { return l_ / mu_pl_; }

  /// Smoothness constant of the max-function Phi: l + l^2 / (2 mu).
  double smoothness() const noexcept { return l_ + l_ * l_ / (2.0 * mu_pl_); }

 private:
  double l_ = 1.0;
  double mu_pl_ = 1.0;
  std::optional<double> sigma_;
  std::optional<double> known_optimum_;
};

/// Axis-aligned box, closed on both ends.
struct Box {
  Vector lo;
  Vector hi;
};

/// Euclidean ball.
struct Ball {
  Vector center;
  double radius = 1.0;
};

inline Vector project_box(const Vector& x, const Box& box) {
  require_dim(box.lo, x.size(), "project_box lower bound");
  require_dim(box.hi, x.size(), "project_box upper bound");
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (box.lo[i] > box.hi[i]) {
      throw Error(ErrorKind::kInvalidArgument, "project_box: lo > hi",
                  "coordinate " + std::to_string(i));
    }
    out[i] = std::clamp(x[i], box.lo[i], box.hi[i]);
  }
  return out;
}

inline Vector project_ball(const Vector& y, const Vector& center, double radius) {
  require_dim(center, y.size(), "project_ball center");
  if (!(radius > 0.0)) throw Error(ErrorKind::kInvalidArgument, "project_ball: radius must be > 0");
  const Vector offset = y - center;
  const double norm = offset.norm();
  // Slack of a few ulps keeps the projection idempotent under rounding.
  if (norm <= radius * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())) return y;
  return center + (radius / norm) * offset;
}

inline Vector project_ball(const Vector& y, const Ball& ball) {
  return project_ball(y, ball.center, ball.radius);
}

/// Counts value-oracle evaluations. Atomic so batch terms may be evaluated
/// concurrently.
class QueryMeter {
 public:
  QueryMeter() = default;
  QueryMeter(const QueryMeter&) = delete;
  QueryMeter& operator=(const QueryMeter&) = delete;

  void add(std::uint64_t n) noexcept { count_.fetch_add(n, std::memory_order_relaxed); }
  std::uint64_t value() const noexcept { return count_.load(std::memory_order_relaxed); }
  void reset() noexcept { count_.store(0, std::memory_order_relaxed); }

 private:
  std::atomic<std::uint64_t> count_{0};
};

/// A realization of the random variable xi. Empty for deterministic problems.
using Sample = std::vector<double>;

using ValueOracle = std::function<double(const Vector&, const Vector&)>;
using GradOracle = std::function<Vector(const Vector&, const Vector&)>;
using ScalarOfX = std::function<double(const Vector&)>;
using VectorOfX = std::function<Vector(const Vector&)>;
using SampledValueOracle = std::function<double(const Vector&, const Vector&, const Sample&)>;
using SampledGradOracle = std::function<Vector(const Vector&, const Vector&, const Sample&)>;
using Sampler = std::function<Sample(RngStream&)>;

/// Metadata shared by deterministic and stochastic problems.
struct ProblemInfo {
  std::string id;
  int d1 = 0;
  int d2 = 0;
  ProblemConstants constants;
  std::optional<Box> x_feasible;
  std::optional<Ball> y_feasible;
  /// Reference minimizer x* (diagnostics only; never read by algorithms).
  std::optional<Vector> reference_x;
  /// Reference optimal value in the problem's display convention.
  std::optional<double> reference_value;
  /// Default starting point.
  Vector x0;
  Vector y0;

  Vector project_x(const Vector& x) const { return x_feasible ? project_box(x, *x_feasible) : x; }
  Vector project_y(const Vector& y) const { return y_feasible ? project_ball(y, *y_feasible) : y; }

  void validate_info() const {
    if (d1 < 1 || d2 < 1) throw Error(ErrorKind::kInvalidArgument, "problem dimensions must be >= 1", id);
    require_dim(x0, d1, "initial x");
    require_dim(y0, d2, "initial y");
    require_finite(x0, "initial x");
    require_finite(y0, "initial y");
    if (x_feasible) {
      require_dim(x_feasible->lo, d1, "x box lower bound");
      require_dim(x_feasible->hi, d1, "x box upper bound");
    }
    if (y_feasible) require_dim(y_feasible->center, d2, "y ball center");
    if (reference_x) require_dim(*reference_x, d1, "reference x");
  }
};

/// min_x max_y f(x, y) accessed through a value oracle. The optional
/// closed-form helpers are used by baselines and verification only.
struct MinimaxProblem : ProblemInfo {
  ValueOracle value;
  GradOracle grad_x;
  GradOracle grad_y;
  ScalarOfX phi_value;
  VectorOfX phi_grad;
  VectorOfX y_star;

  bool has_analytic_grads() const { return static_cast<bool>(grad_x) && static_cast<bool>(grad_y); }

  void validate() const {
    validate_info();
    if (!value) throw Error(ErrorKind::kMissingOracle, "problem has no value oracle", id);
  }
};

/// min_x max_y E_xi G(x, y; xi), accessed through sampled value evaluations.
struct StochasticMinimaxProblem : ProblemInfo {
  Sampler sample;
  SampledValueOracle value_at;
  /// Per-sample analytic gradients (first-order baseline only).
  SampledGradOracle grad_x_at;
  SampledGradOracle grad_y_at;
  /// Closed-form expectation g(x, y) = E G(x, y; xi) with its helpers.
  std::optional<MinimaxProblem> expected;

  bool has_analytic_grads() const {
    return static_cast<bool>(grad_x_at) && static_cast<bool>(grad_y_at);
  }

  void validate() const {
    validate_info();
    if (!sample || !value_at) {
      throw Error(ErrorKind::kMissingOracle, "stochastic problem needs sample and value_at", id);
    }
  }
};

/// Adds N(0, variance) noise to every value evaluation. The draw is the
/// sample xi, so two evaluations sharing one xi see the same noise.
inline StochasticMinimaxProblem with_value_noise(const MinimaxProblem& problem, double variance) {
  if (!(std::isfinite(variance) && variance >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "noise variance must be finite and >= 0");
  }
  problem.validate();
  StochasticMinimaxProblem out;
  static_cast<ProblemInfo&>(out) = static_cast<const ProblemInfo&>(problem);
  const double stddev = std::sqrt(variance);
  out.sample = [stddev](RngStream& rng) -> Sample {
    return Sample{stddev > 0.0 ? rng.normal(0.0, stddev) : 0.0};
  };
  out.value_at = [value = problem.value](const Vector& x, const Vector& y, const Sample& xi) {
    return value(x, y) + (xi.empty() ? 0.0 : xi[0]);
  };
  if (problem.has_analytic_grads()) {
    out.grad_x_at = [g = problem.grad_x](const Vector& x, const Vector& y, const Sample&) { return g(x, y); };
    out.grad_y_at = [g = problem.grad_y](const Vector& x, const Vector& y, const Sample&) { return g(x, y); };
  }
  out.expected = problem;
  // Shared-xi differences cancel the additive noise, so the gradient-noise
  // bound is inherited unchanged.
  out.constants = ProblemConstants(problem.constants.l(), problem.constants.mu_pl(),
                                   problem.constants.sigma().value_or(0.0),
                                   problem.constants.known_optimum());
  return out;
}

/// Fixes xi to an empty sample so a deterministic problem can be driven by
/// the stochastic algorithms.
inline StochasticMinimaxProblem as_stochastic(const MinimaxProblem& problem) {
  return with_value_noise(problem, 0.0);
}

}  // namespace zominimax
