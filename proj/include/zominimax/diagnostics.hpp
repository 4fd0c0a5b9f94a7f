#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "zominimax/error.hpp"
#include "zominimax/problem.hpp"
#include "zominimax/rng.hpp"
#include "zominimax/vector.hpp"
#include "zominimax/zo_grad.hpp"

namespace zominimax {

enum class StationarityMethod { kAnalytic, kInnerAscent };

inline const char* to_string(StationarityMethod m) {
  return m == StationarityMethod::kAnalytic ? "analytic" : "inner-ascent";
}

struct StationarityOptions {
  int inner_iters = 500;
  double inner_tol = 1e-6;
  /// Ascent stepsize; 0 selects 1/l.
  double step = 0.0;
  /// Inner ascent aborts once ||y|| exceeds this.
  double radius_guard = 1e6;
  /// Central-difference step used when analytic gradients are absent.
  double fd_step = 1e-6;
  /// Skip the closed-form gradient of Phi even when the problem has one.
  bool force_inner_ascent = false;
};

struct StationarityReport {
  double grad_phi_norm = 0.0;
  StationarityMethod method = StationarityMethod::kAnalytic;
  int inner_iterations = 0;
  std::uint64_t queries_used = 0;
  /// Approximate maximizer y*(x) (inner-ascent path) or y_star(x) when known.
  Vector y_hat;
};

namespace detail {

/// Central-difference gradient in one block; 2 d queries.
inline Vector central_diff(const ValueOracle& value, const Vector& x, const Vector& y, bool x_block,
                           double h, QueryMeter& meter) {
  const Vector& base = x_block ? x : y;
  Vector g(base.size());
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    Vector plus = base;
    Vector minus = base;
    plus[i] += h;
    minus[i] -= h;
    const double fp = x_block ? value(plus, y) : value(x, plus);
    const double fm = x_block ? value(minus, y) : value(x, minus);
    g[i] = (fp - fm) / (2.0 * h);
  }
  meter.add(2 * static_cast<std::uint64_t>(base.size()));
  return g;
}

inline Vector grad_y_of(const MinimaxProblem& p, const Vector& x, const Vector& y, double h, QueryMeter& meter) {
  return p.grad_y ? p.grad_y(x, y) : central_diff(p.value, x, y, false, h, meter);
}

inline Vector grad_x_of(const MinimaxProblem& p, const Vector& x, const Vector& y, double h, QueryMeter& meter) {
  return p.grad_x ? p.grad_x(x, y) : central_diff(p.value, x, y, true, h, meter);
}

struct InnerSolve {
  Vector y;
  int iterations = 0;
};

/// Projected gradient ascent in y at fixed x.
inline InnerSolve inner_ascent(const MinimaxProblem& p, const Vector& x, Vector y, const StationarityOptions& opts,
                               QueryMeter& meter) {
  const double step = opts.step > 0.0 ? opts.step : 1.0 / p.constants.l();
  int it = 0;
  for (; it < opts.inner_iters; ++it) {
    const Vector g = grad_y_of(p, x, y, opts.fd_step, meter);
    const Vector next = p.project_y(y + step * g);
    // Projected-gradient mapping norm; equals ||grad_y|| when unconstrained.
    const double residual = (next - y).norm() / step;
    if (residual <= opts.inner_tol) break;
    y = next;
    if (!y.allFinite() || y.norm() > opts.radius_guard) {
      throw Error(ErrorKind::kDivergence, "inner ascent diverged", "x=" + to_string(x));
    }
  }
  return {y, it};
}

}  // namespace detail

/// ||grad Phi(x)||, either from the closed form or from grad_x f(x, y_hat)
/// where y_hat approximately maximizes f(x, .) starting at y_start.
inline StationarityReport stationarity(const MinimaxProblem& problem, const Vector& x, const Vector& y_start,
                                       const StationarityOptions& opts, QueryMeter& meter) {
  StationarityReport report;
  const std::uint64_t before = meter.value();
  if (problem.phi_grad && !opts.force_inner_ascent) {
    report.grad_phi_norm = problem.phi_grad(x).norm();
    report.method = StationarityMethod::kAnalytic;
    if (problem.y_star) report.y_hat = problem.y_star(x);
  } else {
    const detail::InnerSolve solved = detail::inner_ascent(problem, x, y_start, opts, meter);
    report.grad_phi_norm = detail::grad_x_of(problem, x, solved.y, opts.fd_step, meter).norm();
    report.method = StationarityMethod::kInnerAscent;
    report.inner_iterations = solved.iterations;
    report.y_hat = solved.y;
  }
  if (!std::isfinite(report.grad_phi_norm)) {
    throw Error(ErrorKind::kNonFinite, "stationarity measure is not finite", "x=" + to_string(x));
  }
  report.queries_used = meter.value() - before;
  return report;
}

/// Stochastic problems are measured on their closed-form expectation.
inline StationarityReport stationarity(const StochasticMinimaxProblem& problem, const Vector& x,
                                       const Vector& y_start, const StationarityOptions& opts, QueryMeter& meter) {
  if (!problem.expected) {
    throw Error(ErrorKind::kUnsupported, "stationarity needs a closed-form expectation", problem.id);
  }
  return stationarity(*problem.expected, x, y_start, opts, meter);
}

/// Phi(x) from the closed form, else f(x, y_hat) after an inner solve.
inline double phi_value(const MinimaxProblem& problem, const Vector& x, const Vector& y_start,
                        const StationarityOptions& opts, QueryMeter& meter) {
  if (problem.phi_value) return problem.phi_value(x);
  if (problem.y_star) {
    meter.add(1);
    return problem.value(x, problem.y_star(x));
  }
  const detail::InnerSolve solved = detail::inner_ascent(problem, x, y_start, opts, meter);
  meter.add(1);
  return problem.value(x, solved.y);
}

/// Lyapunov potential (3/2) Phi(x) - (1/2) f(x, y).
inline double potential_v(const MinimaxProblem& problem, const Vector& x, const Vector& y,
                          const StationarityOptions& opts, QueryMeter& meter) {
  const double phi = phi_value(problem, x, y, opts, meter);
  meter.add(1);
  return 1.5 * phi - 0.5 * problem.value(x, y);
}

enum class Block { kX, kY };

struct MonteCarloEstimate {
  Vector mean;
  /// Per-coordinate standard error of the mean.
  Vector stderr_;
  std::size_t n = 0;

  double stderr_norm() const { return stderr_.norm(); }
};

/// Monte-Carlo average of n_samples UniGE draws, an estimate of the gradient
/// of the smoothed function f_mu in the chosen block.
inline MonteCarloEstimate smoothed_grad_reference(const ValueOracle& value, const Vector& x, const Vector& y,
                                                  double mu, Block block, std::size_t n_samples, RngStream& rng) {
  if (n_samples < 1) throw Error(ErrorKind::kInvalidArgument, "smoothed_grad_reference needs n_samples >= 1");
  const Eigen::Index dim = block == Block::kX ? x.size() : y.size();
  QueryMeter meter;
  Vector sum = Vector::Zero(dim);
  Vector sum_sq = Vector::Zero(dim);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Vector dir = sample_unit_sphere(static_cast<int>(dim), rng);
    const Vector g = block == Block::kX ? unige_x(value, x, y, mu, dir, meter) : unige_y(value, x, y, mu, dir, meter);
    sum += g;
    sum_sq += g.cwiseProduct(g);
  }
  MonteCarloEstimate out;
  out.n = n_samples;
  const double n = static_cast<double>(n_samples);
  out.mean = sum / n;
  if (n_samples > 1) {
    const Vector var = ((sum_sq - n * out.mean.cwiseProduct(out.mean)) / (n - 1.0)).cwiseMax(0.0);
    out.stderr_ = (var / n).cwiseSqrt();
  } else {
    out.stderr_ = Vector::Zero(dim);
  }
  return out;
}

struct EstimatorStats {
  Vector mean;
  /// Per-coordinate standard error of the mean.
  Vector mean_stderr;
  /// Trace of the unbiased sample covariance.
  double covariance_trace = 0.0;
  /// Sample mean of ||g||^2 and its standard error.
  double second_moment = 0.0;
  double second_moment_stderr = 0.0;
  std::size_t n_reps = 0;
};

/// Unbiased statistics over n_reps independent draws of `estimator`; each
/// replication receives its own child stream.
inline EstimatorStats estimator_stats(const std::function<Vector(RngStream&)>& estimator, std::size_t n_reps,
                                      const RngStream& rng) {
  if (n_reps < 2) throw Error(ErrorKind::kInvalidArgument, "estimator_stats needs n_reps >= 2");
  std::vector<Vector> draws;
  draws.reserve(n_reps);
  for (std::size_t r = 0; r < n_reps; ++r) {
    RngStream child = rng.split(r);
    draws.push_back(estimator(child));
  }
  const Eigen::Index dim = draws.front().size();
  const double n = static_cast<double>(n_reps);
  EstimatorStats out;
  out.n_reps = n_reps;
  out.mean = Vector::Zero(dim);
  for (const Vector& g : draws) out.mean += g;
  out.mean /= n;
  Vector var = Vector::Zero(dim);
  double sq_mean = 0.0;
  for (const Vector& g : draws) {
    const Vector d = g - out.mean;
    var += d.cwiseProduct(d);
    sq_mean += g.squaredNorm();
  }
  var /= (n - 1.0);
  sq_mean /= n;
  double sq_var = 0.0;
  for (const Vector& g : draws) {
    const double d = g.squaredNorm() - sq_mean;
    sq_var += d * d;
  }
  sq_var /= (n - 1.0);
  out.mean_stderr = (var / n).cwiseSqrt();
  out.covariance_trace = var.sum();
  out.second_moment = sq_mean;
  out.second_moment_stderr = std::sqrt(sq_var / n);
  return out;
}

struct RegretOptions {
  int starts = 16;
  int iters = 400;
  double tol = 1e-8;
  std::uint64_t seed = 0x5eedULL;
};

struct RegretResult {
  double regret = 0.0;
  /// min over the feasible ball of the display-convention objective.
  double inner_min = 0.0;
  Vector argmin_y;
  bool converged = true;
};

/// Minimum of the display-convention objective (-value) over the y ball,
/// by multi-start projected gradient descent with backtracking.
inline RegretResult inner_minimum(const MinimaxProblem& problem, const Vector& x, const RegretOptions& opts,
                                  QueryMeter& meter) {
  if (!problem.y_feasible) throw Error(ErrorKind::kUnsupported, "inner minimum needs a bounded y set", problem.id);
  const Ball& ball = *problem.y_feasible;
  const auto objective = [&](const Vector& y) {
    meter.add(1);
    return -problem.value(x, y);
  };
  const auto gradient = [&](const Vector& y) -> Vector {
    if (problem.grad_y) return -problem.grad_y(x, y);
    return -detail::central_diff(problem.value, x, y, false, 1e-6, meter);
  };

  RngStream rng = RngStream(opts.seed).split(tag(Role::kMultiStart));
  RegretResult best;
  best.inner_min = std::numeric_limits<double>::infinity();
  best.converged = false;
  bool all_converged = true;
  for (int s = 0; s < opts.starts; ++s) {
    Vector y = ball.center;
    if (s > 0) {
      // Uniform in the ball: direction times radius * U^(1/d).
      const Vector dir = sample_unit_sphere(problem.d2, rng);
      const double r = ball.radius * std::pow(rng.uniform(), 1.0 / problem.d2);
      y = ball.center + r * dir;
    }
    double fy = objective(y);
    double step = 1.0;
    bool converged = false;
    for (int it = 0; it < opts.iters; ++it) {
      const Vector g = gradient(y);
      step = std::min(step * 2.0, 1.0);
      Vector next = project_ball(y - step * g, ball);
      double fnext = objective(next);
      while (fnext > fy - 1e-4 * (y - next).squaredNorm() / step && step > 1e-14) {
        step *= 0.5;
        next = project_ball(y - step * g, ball);
        fnext = objective(next);
      }
      const double moved = (next - y).norm();
      if (fnext <= fy) {
        y = next;
        fy = fnext;
      }
      if (moved <= opts.tol) {
        converged = true;
        break;
      }
    }
    all_converged = all_converged && converged;
    if (fy < best.inner_min) {
      best.inner_min = fy;
      best.argmin_y = y;
    }
  }
  best.converged = all_converged;
  return best;
}

/// Brute-force minimum of -value over a polar grid on a 2-D y ball.
inline RegretResult grid_inner_minimum(const MinimaxProblem& problem, const Vector& x, int radial = 201,
                                       int angular = 720) {
  if (!problem.y_feasible || problem.d2 != 2) {
    throw Error(ErrorKind::kUnsupported, "grid oracle needs a 2-D y ball", problem.id);
  }
  if (radial < 2 || angular < 4) throw Error(ErrorKind::kInvalidArgument, "grid resolution too coarse");
  const Ball& ball = *problem.y_feasible;
  RegretResult best;
  best.inner_min = -problem.value(x, ball.center);
  best.argmin_y = ball.center;
  const double two_pi = 2.0 * std::acos(-1.0);
  for (int i = 1; i < radial; ++i) {
    const double r = ball.radius * i / (radial - 1);
    for (int j = 0; j < angular; ++j) {
      const double th = two_pi * j / angular;
      const Vector y = ball.center + r * vec({std::cos(th), std::sin(th)});
      const double v = -problem.value(x, y);
      if (v < best.inner_min) {
        best.inner_min = v;
        best.argmin_y = y;
      }
    }
  }
  if (problem.reference_value) best.regret = *problem.reference_value - best.inner_min;
  return best;
}

/// reference_value - min_{y in ball} f(x, y), with f the display-convention
/// objective of a max-min problem stored negated.
inline RegretResult regret(const MinimaxProblem& problem, const Vector& x, const RegretOptions& opts,
                           QueryMeter& meter) {
  if (!problem.reference_value) {
    throw Error(ErrorKind::kUnsupported, "regret needs a reference optimal value", problem.id);
  }
  RegretResult out = inner_minimum(problem, x, opts, meter);
  out.regret = *problem.reference_value - out.inner_min;
  return out;
}

}  // namespace zominimax
