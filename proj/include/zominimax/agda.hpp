#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>

#include "zominimax/diagnostics.hpp"
#include "zominimax/error.hpp"
#include "zominimax/problem.hpp"
#include "zominimax/rng.hpp"
#include "zominimax/trace.hpp"
#include "zominimax/vector.hpp"
#include "zominimax/zo_grad.hpp"

namespace zominimax {

/// Optional override of the problem's default starting point.
struct StartPoint {
  Vector x;
  Vector y;
};

struct AgdaConfig {
  double alpha = 0.1;
  double beta = 0.1;
  SmoothingParams smoothing;
  std::int64_t max_iter = 1000;
  /// Stop once measured ||grad Phi|| <= target_eps; 0 runs to max_iter.
  double target_eps = 0.0;
  /// Stationarity is measured every check_every iterations (aux queries).
  std::int64_t check_every = 100;
  bool projection_enabled = true;
  StationarityOptions stationarity;

  void validate() const {
    if (!(std::isfinite(alpha) && alpha > 0.0) || !(std::isfinite(beta) && beta > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "stepsizes alpha and beta must be finite and > 0");
    }
    smoothing.validate();
    if (max_iter < 1) throw Error(ErrorKind::kInvalidArgument, "max_iter must be >= 1");
    if (!(target_eps >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "target_eps must be >= 0");
    if (check_every < 1) throw Error(ErrorKind::kInvalidArgument, "check_every must be >= 1");
  }
};

struct AgdaState {
  std::int64_t t = 0;
  Vector x;
  Vector y;
  /// Most recent estimates s_t (at (x_t, y_t)) and w_t (at (x_{t+1}, y_t)).
  Vector last_s;
  Vector last_w;
};

/// Stepsizes at the upper bounds of the deterministic convergence theorem and
/// the matching smoothing radii:
///   beta = 1/(4 d2 L),  alpha = min{beta/(32 kappa^2), 1/(10 d1 L)},
///   theta1 = (5 d1 L + 3/(2 alpha) + 3L/2 + d2 L) d1^2 L^2 alpha^2,
///   mu1 = sqrt(alpha) eps / (2 sqrt(theta1)),  mu2 = sqrt(alpha) eps / (sqrt(3 beta) d2 L).
inline AgdaConfig derive_agda_params(const ProblemConstants& constants, int d1, int d2, double eps) {
  if (!(std::isfinite(eps) && eps > 0.0)) throw Error(ErrorKind::kInvalidArgument, "eps must be finite and > 0");
  if (d1 < 1 || d2 < 1) throw Error(ErrorKind::kInvalidArgument, "dimensions must be >= 1");
  const double L = constants.smoothness();
  const double kappa = constants.kappa();
  const double n1 = d1;
  const double n2 = d2;

  AgdaConfig cfg;
  cfg.beta = 1.0 / (4.0 * n2 * L);
  cfg.alpha = std::min(cfg.beta / (32.0 * kappa * kappa), 1.0 / (10.0 * n1 * L));
  const double theta1 =
      (5.0 * n1 * L + 3.0 / (2.0 * cfg.alpha) + 1.5 * L + n2 * L) * n1 * n1 * L * L * cfg.alpha * cfg.alpha;
  cfg.smoothing.mu1 = std::sqrt(cfg.alpha) * eps / (2.0 * std::sqrt(theta1));
  cfg.smoothing.mu2 = std::sqrt(cfg.alpha) * eps / (std::sqrt(3.0 * cfg.beta) * n2 * L);
  cfg.target_eps = eps;

  const bool ok = std::isfinite(cfg.alpha) && cfg.alpha > 0.0 && std::isfinite(cfg.beta) && cfg.beta > 0.0 &&
                  std::isfinite(cfg.smoothing.mu1) && cfg.smoothing.mu1 > 0.0 &&
                  std::isfinite(cfg.smoothing.mu2) && cfg.smoothing.mu2 > 0.0;
  if (!ok) {
    std::ostringstream os;
    os << "alpha=" << cfg.alpha << " beta=" << cfg.beta << " mu1=" << cfg.smoothing.mu1
       << " mu2=" << cfg.smoothing.mu2;
    throw Error(ErrorKind::kInvalidArgument, "derived ZO-AGDA parameters degenerate", os.str());
  }
  return cfg;
}

namespace detail {

template <class P>
inline constexpr bool is_stochastic_v = std::is_same_v<std::remove_cvref_t<P>, StochasticMinimaxProblem>;

inline void check_iterate(const Vector& v, const char* what, std::int64_t t) {
  if (!v.allFinite()) {
    throw Error(ErrorKind::kNonFinite, std::string(what) + " became non-finite",
                "t=" + std::to_string(t) + " " + what + "=" + to_string(v));
  }
}

/// Single-direction estimate in one block. Stochastic problems draw one xi
/// that both evaluation points share.
template <class P>
Vector zo_estimate(const P& problem, const Vector& x, const Vector& y, Block block, double mu, const Vector& dir,
                   RngStream& sample_rng, QueryMeter& meter) {
  if constexpr (is_stochastic_v<P>) {
    const Sample xi = problem.sample(sample_rng);
    const DirectionBatch batch(static_cast<int>(dir.size()), {dir});
    const std::span<const Sample> samples(&xi, 1);
    return block == Block::kX ? unige_x_batch(problem.value_at, x, y, mu, samples, batch, meter)
                              : unige_y_batch(problem.value_at, x, y, mu, samples, batch, meter);
  } else {
    (void)sample_rng;
    return block == Block::kX ? unige_x(problem.value, x, y, mu, dir, meter)
                              : unige_y(problem.value, x, y, mu, dir, meter);
  }
}

template <class P>
StationarityReport measure(const P& problem, const Vector& x, const Vector& y, const StationarityOptions& opts,
                           QueryMeter& aux) {
  return stationarity(problem, x, y, opts, aux);
}

}  // namespace detail

/// One alternating step: x first with a fresh u_t, then y at the updated
/// x_{t+1} with a fresh v_t. Four value queries.
template <class P>
AgdaState agda_step(const P& problem, const AgdaState& state, const AgdaConfig& config, const RngStream& rng,
                    QueryMeter& meter) {
  require_dim(state.x, problem.d1, "agda_step x");
  require_dim(state.y, problem.d2, "agda_step y");
  const auto t = static_cast<std::uint64_t>(state.t);
  RngStream u_rng = rng.split({t, tag(Role::kXDirection)});
  RngStream xi_rng = rng.split({t, tag(Role::kXSample)});
  RngStream v_rng = rng.split({t, tag(Role::kYDirection)});
  RngStream zeta_rng = rng.split({t, tag(Role::kYSample)});

  AgdaState next;
  next.t = state.t + 1;
  const Vector u = sample_unit_sphere(problem.d1, u_rng);
  next.last_s = detail::zo_estimate(problem, state.x, state.y, Block::kX, config.smoothing.mu1, u, xi_rng, meter);
  next.x = state.x - config.alpha * next.last_s;
  if (config.projection_enabled) next.x = problem.project_x(next.x);
  detail::check_iterate(next.x, "x", next.t);

  const Vector v = sample_unit_sphere(problem.d2, v_rng);
  next.last_w = detail::zo_estimate(problem, next.x, state.y, Block::kY, config.smoothing.mu2, v, zeta_rng, meter);
  next.y = state.y + config.beta * next.last_w;
  if (config.projection_enabled) next.y = problem.project_y(next.y);
  detail::check_iterate(next.y, "y", next.t);
  return next;
}

namespace detail {

template <class P>
AgdaState initial_state(const P& problem, const std::optional<StartPoint>& start, bool project) {
  AgdaState s;
  s.x = start ? start->x : problem.x0;
  s.y = start ? start->y : problem.y0;
  require_dim(s.x, problem.d1, "start x");
  require_dim(s.y, problem.d2, "start y");
  require_finite(s.x, "start x");
  require_finite(s.y, "start y");
  if (project) {
    s.x = problem.project_x(s.x);
    s.y = problem.project_y(s.y);
  }
  s.last_s = Vector::Zero(problem.d1);
  s.last_w = Vector::Zero(problem.d2);
  return s;
}

inline std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

/// ZO-AGDA loop. Algorithm queries go to the trace's `queries` column;
/// stationarity checks and metrics are metered as aux queries.
template <class P>
RunTrace run_agda(const P& problem, const AgdaConfig& config, const RngStream& rng, const Recorder& recorder,
                  const std::optional<StartPoint>& start = std::nullopt) {
  problem.validate();
  config.validate();
  RunTrace trace(recorder.names());
  trace.problem_id = problem.id;
  trace.algorithm = "zo-agda";
  trace.seed = rng.seed();
  trace.config = {{"alpha", detail::fmt_double(config.alpha)},
                  {"beta", detail::fmt_double(config.beta)},
                  {"mu1", detail::fmt_double(config.smoothing.mu1)},
                  {"mu2", detail::fmt_double(config.smoothing.mu2)},
                  {"max_iter", std::to_string(config.max_iter)},
                  {"target_eps", detail::fmt_double(config.target_eps)}};

  QueryMeter meter;
  QueryMeter aux;
  AgdaState state = detail::initial_state(problem, start, config.projection_enabled);
  try {
    trace.append(recorder.row(0, state.x, state.y, meter.value(), aux));
    while (state.t < config.max_iter) {
      if (config.target_eps > 0.0 && state.t % config.check_every == 0) {
        const auto report = detail::measure(problem, state.x, state.y, config.stationarity, aux);
        if (report.grad_phi_norm <= config.target_eps) {
          trace.converged_at = state.t;
          break;
        }
      }
      state = agda_step(problem, state, config, rng, meter);
      if (recorder.due(state.t, config.max_iter)) {
        trace.append(recorder.row(state.t, state.x, state.y, meter.value(), aux));
      }
    }
    if (!trace.converged_at && config.target_eps > 0.0 && state.t == config.max_iter) {
      const auto report = detail::measure(problem, state.x, state.y, config.stationarity, aux);
      if (report.grad_phi_norm <= config.target_eps) trace.converged_at = state.t;
    }
    if (trace.back().t != state.t) trace.append(recorder.row(state.t, state.x, state.y, meter.value(), aux));
  } catch (const Error& e) {
    trace.aborted = true;
    trace.error_message = e.what();
    trace.final_x = state.x;
    trace.final_y = state.y;
    throw RunError(e, std::move(trace));
  }
  trace.final_x = state.x;
  trace.final_y = state.y;
  return trace;
}

struct FoAgdaConfig {
  double alpha = 0.1;
  double beta = 0.1;
  std::int64_t max_iter = 1000;
  bool projection_enabled = true;
};

/// First-order alternating GDA baseline on analytic gradients:
/// x_{t+1} = x_t - alpha grad_x f(x_t, y_t); y_{t+1} = y_t + beta grad_y f(x_{t+1}, y_t).
/// Stochastic problems use one fresh sample per gradient. Each gradient
/// evaluation is metered as one query.
template <class P>
RunTrace run_fo_agda(const P& problem, const FoAgdaConfig& config, const RngStream& rng, const Recorder& recorder,
                     const std::optional<StartPoint>& start = std::nullopt) {
  problem.validate();
  if (!problem.has_analytic_grads()) {
    throw Error(ErrorKind::kMissingOracle, "fo-agda needs analytic gradients", problem.id);
  }
  if (!(config.alpha > 0.0) || !(config.beta > 0.0) || config.max_iter < 1) {
    throw Error(ErrorKind::kInvalidArgument, "fo-agda needs alpha, beta > 0 and max_iter >= 1");
  }
  RunTrace trace(recorder.names());
  trace.problem_id = problem.id;
  trace.algorithm = "fo-agda";
  trace.seed = rng.seed();
  trace.config = {{"alpha", detail::fmt_double(config.alpha)},
                  {"beta", detail::fmt_double(config.beta)},
                  {"max_iter", std::to_string(config.max_iter)}};

  QueryMeter meter;
  QueryMeter aux;
  AgdaState state = detail::initial_state(problem, start, config.projection_enabled);
  const auto gx = [&](const Vector& x, const Vector& y, std::uint64_t t) -> Vector {
    meter.add(1);
    if constexpr (detail::is_stochastic_v<P>) {
      RngStream r = rng.split({t, tag(Role::kXSample)});
      return problem.grad_x_at(x, y, problem.sample(r));
    } else {
      return problem.grad_x(x, y);
    }
  };
  const auto gy = [&](const Vector& x, const Vector& y, std::uint64_t t) -> Vector {
    meter.add(1);
    if constexpr (detail::is_stochastic_v<P>) {
      RngStream r = rng.split({t, tag(Role::kYSample)});
      return problem.grad_y_at(x, y, problem.sample(r));
    } else {
      return problem.grad_y(x, y);
    }
  };

  try {
    trace.append(recorder.row(0, state.x, state.y, meter.value(), aux));
    while (state.t < config.max_iter) {
      const auto t = static_cast<std::uint64_t>(state.t);
      AgdaState next;
      next.t = state.t + 1;
      next.last_s = gx(state.x, state.y, t);
      next.x = state.x - config.alpha * next.last_s;
      if (config.projection_enabled) next.x = problem.project_x(next.x);
      detail::check_iterate(next.x, "x", next.t);
      next.last_w = gy(next.x, state.y, t);
      next.y = state.y + config.beta * next.last_w;
      if (config.projection_enabled) next.y = problem.project_y(next.y);
      detail::check_iterate(next.y, "y", next.t);
      state = std::move(next);
      if (recorder.due(state.t, config.max_iter)) {
        trace.append(recorder.row(state.t, state.x, state.y, meter.value(), aux));
      }
    }
  } catch (const Error& e) {
    trace.aborted = true;
    trace.error_message = e.what();
    trace.final_x = state.x;
    trace.final_y = state.y;
    throw RunError(e, std::move(trace));
  }
  trace.final_x = state.x;
  trace.final_y = state.y;
  return trace;
}

}  // namespace zominimax
