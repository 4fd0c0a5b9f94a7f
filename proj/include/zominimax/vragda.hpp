#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "zominimax/agda.hpp"
#include "zominimax/diagnostics.hpp"
#include "zominimax/error.hpp"
#include "zominimax/problem.hpp"
#include "zominimax/rng.hpp"
#include "zominimax/trace.hpp"
#include "zominimax/zo_grad.hpp"

namespace zominimax {

struct VragdaConfig {
  double alpha = 0.1;
  double beta = 0.1;
  SmoothingParams smoothing;
  /// Epoch length; a full batch of size B is drawn whenever t mod q == 0.
  std::int64_t q = 10;
  std::int64_t B = 100;
  std::int64_t b = 10;
  std::int64_t max_iter = 1000;
  double target_eps = 0.0;
  std::int64_t check_every = 100;
  bool projection_enabled = true;
  StationarityOptions stationarity;
  /// Set by derive_vragda_params when the theory batch size exceeded the cap.
  bool batch_capped = false;

  void validate() const {
    if (!(std::isfinite(alpha) && alpha > 0.0) || !(std::isfinite(beta) && beta > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "stepsizes alpha and beta must be finite and > 0");
    }
    smoothing.validate();
    if (q < 1 || B < 1 || b < 1) throw Error(ErrorKind::kInvalidArgument, "q, B and b must be >= 1");
    if (B < b) throw Error(ErrorKind::kInvalidArgument, "large batch B must be >= small batch b");
    if (max_iter < 1) throw Error(ErrorKind::kInvalidArgument, "max_iter must be >= 1");
    if (!(target_eps >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "target_eps must be >= 0");
    if (check_every < 1) throw Error(ErrorKind::kInvalidArgument, "check_every must be >= 1");
  }
};

struct VragdaState {
  std::int64_t t = 0;
  Vector x;
  Vector y;
  /// (x_{t-1}, y_{t-1}); meaningful only when has_history.
  Vector x_prev;
  Vector y_prev;
  /// m_{t-1}, n_{t-1}.
  Vector m;
  Vector n;
  bool has_history = false;

  /// ceil(t / q).
  std::int64_t epoch_index(std::int64_t q) const { return (t + q - 1) / q; }
};

/// Stochastic-setting schedule:
///   C = Lbar (1 + 30 d1 + 6 d2 + 36 d1 d2),  beta = 1/C,  alpha = beta / (16 kappa^2),
///   q = b = ceil(kappa/eps),  B = ceil((40 + 128 kappa^2) sigma^2 / eps^2),
///   mu1 = eps / sqrt(35 d1^2 Lbar^2 + 576 kappa^2 d1^2 d2 Lbar^2),
///   mu2 = eps / sqrt(112 kappa^2 d2^2 Lbar^2).
/// B is raised to at least b and capped at max_batch.
inline VragdaConfig derive_vragda_params(const ProblemConstants& constants, int d1, int d2, double eps,
                                         std::int64_t max_batch = 100000) {
  if (!(std::isfinite(eps) && eps > 0.0)) throw Error(ErrorKind::kInvalidArgument, "eps must be finite and > 0");
  if (d1 < 1 || d2 < 1) throw Error(ErrorKind::kInvalidArgument, "dimensions must be >= 1");
  if (!constants.sigma()) throw Error(ErrorKind::kInvalidArgument, "ZO-VRAGDA schedule needs sigma");
  if (max_batch < 1) throw Error(ErrorKind::kInvalidArgument, "max_batch must be >= 1");
  const double Lbar = constants.smoothness();
  const double kappa = constants.kappa();
  const double sigma = *constants.sigma();
  const double n1 = d1;
  const double n2 = d2;

  VragdaConfig cfg;
  const double C = Lbar * (1.0 + 30.0 * n1 + 6.0 * n2 + 36.0 * n1 * n2);
  cfg.beta = 1.0 / C;
  cfg.alpha = cfg.beta / (16.0 * kappa * kappa);
  const double qb = std::ceil(kappa / eps);
  cfg.q = std::max<std::int64_t>(1, static_cast<std::int64_t>(qb));
  cfg.b = cfg.q;
  const double big = std::ceil((40.0 + 128.0 * kappa * kappa) * sigma * sigma / (eps * eps));
  std::int64_t B = big >= static_cast<double>(max_batch) ? max_batch : static_cast<std::int64_t>(big);
  if (big > static_cast<double>(max_batch)) {
    cfg.batch_capped = true;
    std::cerr << "zominimax: theory batch size B=" << big << " exceeds max_batch, capped to " << max_batch << "\n";
  }
  cfg.B = std::max({B, cfg.b, std::int64_t{1}});
  cfg.smoothing.mu1 = eps / std::sqrt(35.0 * n1 * n1 * Lbar * Lbar + 576.0 * kappa * kappa * n1 * n1 * n2 * Lbar * Lbar);
  cfg.smoothing.mu2 = eps / std::sqrt(112.0 * kappa * kappa * n2 * n2 * Lbar * Lbar);
  cfg.target_eps = eps;
  return cfg;
}

struct XUpdate {
  Vector m;
  Vector x_next;
};

struct YUpdate {
  Vector n;
  Vector y_next;
};

namespace detail {

struct BatchDraw {
  std::vector<Sample> samples;
  DirectionBatch directions;
};

inline BatchDraw draw_batch(const StochasticMinimaxProblem& problem, int dim, std::int64_t size,
                            const RngStream& rng, std::uint64_t t, Role sample_role, Role dir_role) {
  RngStream sample_rng = rng.split({t, tag(sample_role)});
  RngStream dir_rng = rng.split({t, tag(dir_role)});
  BatchDraw draw;
  draw.samples = draw_samples(problem.sample, static_cast<std::size_t>(size), sample_rng);
  draw.directions = DirectionBatch::sample(dim, static_cast<std::size_t>(size), dir_rng);
  return draw;
}

inline void require_history(const VragdaState& state) {
  if (!state.has_history) {
    throw Error(ErrorKind::kInvalidArgument, "recursive estimator needs the previous iterate",
                "t=" + std::to_string(state.t));
  }
}

}  // namespace detail

/// x block: full-batch estimate at epoch boundaries, otherwise the recursive
/// difference on b shared (xi_i, u_i) plus m_{t-1}; then x_{t+1} = x_t - alpha m_t.
inline XUpdate vragda_x_update(const StochasticMinimaxProblem& problem, const VragdaState& state,
                               const VragdaConfig& config, const RngStream& rng, QueryMeter& meter) {
  const auto t = static_cast<std::uint64_t>(state.t);
  const double mu1 = config.smoothing.mu1;
  XUpdate out;
  if (state.t % config.q == 0) {
    const auto draw = detail::draw_batch(problem, problem.d1, config.B, rng, t, Role::kXSample, Role::kXDirection);
    out.m = unige_x_batch(problem.value_at, state.x, state.y, mu1, draw.samples, draw.directions, meter);
  } else {
    detail::require_history(state);
    const auto draw = detail::draw_batch(problem, problem.d1, config.b, rng, t, Role::kXSample, Role::kXDirection);
    const Vector now = unige_x_batch(problem.value_at, state.x, state.y, mu1, draw.samples, draw.directions, meter);
    const Vector before =
        unige_x_batch(problem.value_at, state.x_prev, state.y_prev, mu1, draw.samples, draw.directions, meter);
    out.m = now - before + state.m;
  }
  detail::check_iterate(out.m, "m", state.t);
  out.x_next = state.x - config.alpha * out.m;
  if (config.projection_enabled) out.x_next = problem.project_x(out.x_next);
  detail::check_iterate(out.x_next, "x", state.t + 1);
  return out;
}

/// y block, evaluated at the already-updated x_{t+1}. The recursion compares
/// (x_{t+1}, y_t) against (x_t, y_{t-1}) on shared samples and directions.
inline YUpdate vragda_y_update(const StochasticMinimaxProblem& problem, const VragdaState& state,
                               const Vector& x_next, const VragdaConfig& config, const RngStream& rng,
                               QueryMeter& meter) {
  require_dim(x_next, problem.d1, "vragda_y_update x_{t+1}");
  const auto t = static_cast<std::uint64_t>(state.t);
  const double mu2 = config.smoothing.mu2;
  YUpdate out;
  if (state.t % config.q == 0) {
    const auto draw = detail::draw_batch(problem, problem.d2, config.B, rng, t, Role::kYSample, Role::kYDirection);
    out.n = unige_y_batch(problem.value_at, x_next, state.y, mu2, draw.samples, draw.directions, meter);
  } else {
    detail::require_history(state);
    const auto draw = detail::draw_batch(problem, problem.d2, config.b, rng, t, Role::kYSample, Role::kYDirection);
    const Vector now = unige_y_batch(problem.value_at, x_next, state.y, mu2, draw.samples, draw.directions, meter);
    const Vector before =
        unige_y_batch(problem.value_at, state.x, state.y_prev, mu2, draw.samples, draw.directions, meter);
    out.n = now - before + state.n;
  }
  detail::check_iterate(out.n, "n", state.t);
  out.y_next = state.y + config.beta * out.n;
  if (config.projection_enabled) out.y_next = problem.project_y(out.y_next);
  detail::check_iterate(out.y_next, "y", state.t + 1);
  return out;
}

inline VragdaState vragda_step(const StochasticMinimaxProblem& problem, const VragdaState& state,
                               const VragdaConfig& config, const RngStream& rng, QueryMeter& meter) {
  const XUpdate xu = vragda_x_update(problem, state, config, rng, meter);
  const YUpdate yu = vragda_y_update(problem, state, xu.x_next, config, rng, meter);
  VragdaState next;
  next.t = state.t + 1;
  next.x_prev = state.x;
  next.y_prev = state.y;
  next.x = xu.x_next;
  next.y = yu.y_next;
  next.m = xu.m;
  next.n = yu.n;
  next.has_history = true;
  return next;
}

inline VragdaState vragda_initial_state(const StochasticMinimaxProblem& problem,
                                        const std::optional<StartPoint>& start, bool project) {
  const AgdaState s = detail::initial_state(problem, start, project);
  VragdaState out;
  out.x = s.x;
  out.y = s.y;
  out.m = Vector::Zero(problem.d1);
  out.n = Vector::Zero(problem.d2);
  return out;
}

/// ZO-VRAGDA loop with the same trace and stopping contract as run_agda.
inline RunTrace run_vragda(const StochasticMinimaxProblem& problem, const VragdaConfig& config,
                           const RngStream& rng, const Recorder& recorder,
                           const std::optional<StartPoint>& start = std::nullopt) {
  problem.validate();
  config.validate();
  RunTrace trace(recorder.names());
  trace.problem_id = problem.id;
  trace.algorithm = "zo-vragda";
  trace.seed = rng.seed();
  trace.config = {{"alpha", detail::fmt_double(config.alpha)},
                  {"beta", detail::fmt_double(config.beta)},
                  {"mu1", detail::fmt_double(config.smoothing.mu1)},
                  {"mu2", detail::fmt_double(config.smoothing.mu2)},
                  {"q", std::to_string(config.q)},
                  {"B", std::to_string(config.B)},
                  {"b", std::to_string(config.b)},
                  {"max_iter", std::to_string(config.max_iter)},
                  {"target_eps", detail::fmt_double(config.target_eps)}};

  QueryMeter meter;
  QueryMeter aux;
  VragdaState state = vragda_initial_state(problem, start, config.projection_enabled);
  try {
    trace.append(recorder.row(0, state.x, state.y, meter.value(), aux));
    while (state.t < config.max_iter) {
      if (config.target_eps > 0.0 && state.t % config.check_every == 0) {
        const auto report = stationarity(problem, state.x, state.y, config.stationarity, aux);
        if (report.grad_phi_norm <= config.target_eps) {
          trace.converged_at = state.t;
          break;
        }
      }
      state = vragda_step(problem, state, config, rng, meter);
      if (recorder.due(state.t, config.max_iter)) {
        trace.append(recorder.row(state.t, state.x, state.y, meter.value(), aux));
      }
    }
    if (!trace.converged_at && config.target_eps > 0.0 && state.t == config.max_iter) {
      const auto report = stationarity(problem, state.x, state.y, config.stationarity, aux);
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

}  // namespace zominimax
