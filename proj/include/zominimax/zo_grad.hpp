#pragma once

#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "zominimax/error.hpp"
#include "zominimax/problem.hpp"
#include "zominimax/rng.hpp"
#include "zominimax/vector.hpp"

namespace zominimax {

/// Smoothing radii for the x block (mu1) and the y block (mu2).
struct SmoothingParams {
  double mu1 = 1e-3;
  double mu2 = 1e-3;

  void validate() const {
    if (!(std::isfinite(mu1) && mu1 > 0.0) || !(std::isfinite(mu2) && mu2 > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "smoothing radii must be finite and > 0");
    }
  }
};

/// Uniform draw from the unit sphere in R^dim (normalized Gaussian).
inline Vector sample_unit_sphere(int dim, RngStream& rng) {
  if (dim < 1) throw Error(ErrorKind::kInvalidArgument, "sample_unit_sphere: dim must be >= 1");
  Vector v(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
    norm = v.norm();
  } while (!(norm > 0.0));
  return v / norm;
}

/// Unit directions u_1..u_r sharing one dimension.
class DirectionBatch {
 public:
  DirectionBatch() = default;

  DirectionBatch(int dim, std::vector<Vector> directions) : dim_(dim), directions_(std::move(directions)) {
    for (const Vector& u : directions_) {
      require_dim(u, dim_, "direction");
      if (std::abs(u.norm() - 1.0) > 1e-12) {
        throw Error(ErrorKind::kInvalidArgument, "direction is not a unit vector", to_string(u));
      }
    }
  }

  static DirectionBatch sample(int dim, std::size_t count, RngStream& rng) {
    std::vector<Vector> dirs;
    dirs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) dirs.push_back(sample_unit_sphere(dim, rng));
    return DirectionBatch(dim, std::move(dirs));
  }

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return directions_.size(); }
  const Vector& operator[](std::size_t i) const { return directions_[i]; }
  const std::vector<Vector>& directions() const noexcept { return directions_; }

 private:
  int dim_ = 0;
  std::vector<Vector> directions_;
};

namespace detail {

inline double checked(double value, const Vector& x, const Vector& y) {
  if (!std::isfinite(value)) {
    throw Error(ErrorKind::kNonFinite, "oracle returned a non-finite value",
                "x=" + to_string(x) + " y=" + to_string(y));
  }
  return value;
}

inline void check_unit(const Vector& u) {
  if (std::abs(u.norm() - 1.0) > 1e-12) {
    throw Error(ErrorKind::kInvalidArgument, "direction is not a unit vector", to_string(u));
  }
}

inline void check_radius(double mu) {
  if (!(std::isfinite(mu) && mu > 0.0)) throw Error(ErrorKind::kInvalidArgument, "smoothing radius must be > 0");
}

}  // namespace detail

/// d1 (f(x + mu1 u, y) - f(x, y)) / mu1 * u. Two queries.
inline Vector unige_x(const ValueOracle& value, const Vector& x, const Vector& y, double mu1,
                      const Vector& u, QueryMeter& meter) {
  detail::check_radius(mu1);
  require_dim(u, x.size(), "unige_x direction");
  detail::check_unit(u);
  const Vector shifted = x + mu1 * u;
  const double hi = detail::checked(value(shifted, y), shifted, y);
  const double lo = detail::checked(value(x, y), x, y);
  meter.add(2);
  return (static_cast<double>(x.size()) * (hi - lo) / mu1) * u;
}

/// d2 (f(x, y + mu2 v) - f(x, y)) / mu2 * v. Two queries.
inline Vector unige_y(const ValueOracle& value, const Vector& x, const Vector& y, double mu2,
                      const Vector& v, QueryMeter& meter) {
  detail::check_radius(mu2);
  require_dim(v, y.size(), "unige_y direction");
  detail::check_unit(v);
  const Vector shifted = y + mu2 * v;
  const double hi = detail::checked(value(x, shifted), x, shifted);
  const double lo = detail::checked(value(x, y), x, y);
  meter.add(2);
  return (static_cast<double>(y.size()) * (hi - lo) / mu2) * v;
}

/// Minibatch estimate (1/r) sum_i d1 (G(x + mu1 u_i, y; xi_i) - G(x, y; xi_i)) / mu1 u_i.
/// Directions are caller-supplied so the same (xi_i, u_i) can be evaluated at
/// two points. 2r queries.
inline Vector unige_x_batch(const SampledValueOracle& value_at, const Vector& x, const Vector& y,
                            double mu1, std::span<const Sample> samples, const DirectionBatch& directions,
                            QueryMeter& meter) {
  detail::check_radius(mu1);
  if (samples.empty() || samples.size() != directions.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "unige_x_batch: need |samples| == |directions| >= 1");
  }
  require_dim(x, directions.dim(), "unige_x_batch point");
  const double d = static_cast<double>(x.size());
  Vector sum = Vector::Zero(x.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vector& u = directions[i];
    const Vector shifted = x + mu1 * u;
    const double hi = detail::checked(value_at(shifted, y, samples[i]), shifted, y);
    const double lo = detail::checked(value_at(x, y, samples[i]), x, y);
    sum += (d * (hi - lo) / mu1) * u;
  }
  meter.add(2 * samples.size());
  return sum / static_cast<double>(samples.size());
}

/// y-block mirror of unige_x_batch.
inline Vector unige_y_batch(const SampledValueOracle& value_at, const Vector& x, const Vector& y,
                            double mu2, std::span<const Sample> samples, const DirectionBatch& directions,
                            QueryMeter& meter) {
  detail::check_radius(mu2);
  if (samples.empty() || samples.size() != directions.size()) {
    throw Error(ErrorKind::kDimensionMismatch, "unige_y_batch: need |samples| == |directions| >= 1");
  }
  require_dim(y, directions.dim(), "unige_y_batch point");
  const double d = static_cast<double>(y.size());
  Vector sum = Vector::Zero(y.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vector& v = directions[i];
    const Vector shifted = y + mu2 * v;
    const double hi = detail::checked(value_at(x, shifted, samples[i]), x, shifted);
    const double lo = detail::checked(value_at(x, y, samples[i]), x, y);
    sum += (d * (hi - lo) / mu2) * v;
  }
  meter.add(2 * samples.size());
  return sum / static_cast<double>(samples.size());
}

/// Draws `count` samples from the problem's sampler.
inline std::vector<Sample> draw_samples(const Sampler& sampler, std::size_t count, RngStream& rng) {
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sampler(rng));
  return out;
}

}  // namespace zominimax
