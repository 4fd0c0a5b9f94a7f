#include <gtest/gtest.h>

#include "test_util.hpp"
#include "zominimax/diagnostics.hpp"
#include "zominimax/problems.hpp"
#include "zominimax/zo_grad.hpp"

using namespace zominimax;

namespace {

const ValueOracle kConstant = [](const Vector&, const Vector&) { return 3.25; };

double log_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double a = std::log(xs[i]), b = std::log(ys[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST(SampleUnitSphere, OneDimensionIsSign) {
  RngStream rng(1);
  for (int i = 0; i < 50; ++i) {
    const Vector u = sample_unit_sphere(1, rng);
    EXPECT_TRUE(u[0] == 1.0 || u[0] == -1.0);
  }
}

TEST(SampleUnitSphere, UnitNorm) {
  RngStream rng(2);
  for (int i = 0; i < 100; ++i) EXPECT_NEAR(sample_unit_sphere(7, rng).norm(), 1.0, 1e-12);
}

TEST(SampleUnitSphere, RejectsZeroDim) {
  RngStream rng(3);
  EXPECT_ERROR_KIND(sample_unit_sphere(0, rng), ErrorKind::kInvalidArgument);
}

TEST(SampleUnitSphere, MomentsOfUniformDistribution) {
  RngStream rng(4);
  const int n = 100000;
  Vector mean = Vector::Zero(3);
  Matrix cov = Matrix::Zero(3, 3);
  for (int i = 0; i < n; ++i) {
    const Vector u = sample_unit_sphere(3, rng);
    mean += u;
    cov += u * u.transpose();
  }
  mean /= n;
  cov /= n;
  for (int k = 0; k < 3; ++k) {
    EXPECT_LE(std::abs(mean[k]), 3.0 / std::sqrt(3.0 * n));
    EXPECT_NEAR(cov(k, k), 1.0 / 3.0, 0.05 / 3.0);
    for (int j = 0; j < 3; ++j) {
      if (j != k) EXPECT_LE(std::abs(cov(k, j)), 0.05 / 3.0);
    }
  }
}

TEST(DirectionBatch, RejectsNonUnit) {
  EXPECT_ERROR_KIND(DirectionBatch(2, {vec({1.0, 1.0})}), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(DirectionBatch(2, {vec({1.0})}), ErrorKind::kDimensionMismatch);
}

TEST(UnigeX, ConstantOracleGivesZero) {
  QueryMeter m;
  const Vector g = unige_x(kConstant, vec({0.1, 0.2}), vec({0.3}), 0.01, vec({0.6, 0.8}), m);
  EXPECT_EQ(g, Vector::Zero(2));
  EXPECT_EQ(m.value(), 2u);
}

TEST(UnigeX, SquaredNormAtOrigin) {
  const ValueOracle sq = [](const Vector& x, const Vector&) { return x.squaredNorm(); };
  QueryMeter m;
  const Vector u = vec({0.6, -0.8});
  const Vector g = unige_x(sq, Vector::Zero(2), vec({1.0}), 0.1, u, m);
  EXPECT_NEAR((g - 0.2 * u).norm(), 0.0, 1e-15);
}

TEST(UnigeX, LinearOracleIsUnbiased) {
  const Vector a = vec({1.5, -0.5, 2.0});
  const ValueOracle lin = [a](const Vector& x, const Vector&) { return a.dot(x); };
  RngStream rng(5);
  const MonteCarloEstimate est =
      smoothed_grad_reference(lin, vec({0.2, 0.1, -0.3}), vec({0.0}), 1e-2, Block::kX, 1000000, rng);
  for (int k = 0; k < 3; ++k) EXPECT_LE(std::abs(est.mean[k] - a[k]), 3.0 * est.stderr_[k] + 1e-12);
}

TEST(UnigeX, NonFiniteValueCarriesPoint) {
  const ValueOracle bad = [](const Vector& x, const Vector&) { return x[0] > 0.05 ? std::nan("") : 0.0; };
  QueryMeter m;
  try {
    unige_x(bad, vec({0.0}), vec({0.0}), 0.1, vec({1.0}), m);
    FAIL() << "expected error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonFinite);
    EXPECT_NE(e.context().find("x=(0.1"), std::string::npos) << e.context();
  }
}

TEST(UnigeY, ConstantAndSquaredNorm) {
  QueryMeter m;
  EXPECT_EQ(unige_y(kConstant, vec({0.0}), vec({0.1, 0.2, 0.3}), 0.05, vec({0.0, 0.6, 0.8}), m), Vector::Zero(3));
  const ValueOracle sq = [](const Vector&, const Vector& y) { return y.squaredNorm(); };
  const Vector v = vec({0.0, 0.6, 0.8});
  const Vector g = unige_y(sq, vec({0.0}), Vector::Zero(3), 0.05, v, m);
  EXPECT_NEAR((g - 0.15 * v).norm(), 0.0, 1e-15);
  EXPECT_EQ(m.value(), 4u);
}

TEST(UnigeY, QuadraticIsUnbiased) {
  const MinimaxProblem p = make_pl_quadratic(
      PlQuadraticSpec{(Matrix(2, 2) << 1, 0.2, 0.2, 0.5).finished(), (Matrix(2, 2) << 1, 0, 0.5, -1).finished(),
                      (Matrix(2, 2) << 2, 0.3, 0.3, 1).finished()});
  const Vector x = vec({0.4, -0.2});
  const Vector y = vec({0.1, 0.3});
  RngStream rng(6);
  const MonteCarloEstimate est = smoothed_grad_reference(p.value, x, y, 0.05, Block::kY, 1000000, rng);
  const Vector g = p.grad_y(x, y);
  for (int k = 0; k < 2; ++k) EXPECT_LE(std::abs(est.mean[k] - g[k]), 3.0 * est.stderr_[k]);
}

TEST(UnigeBatch, SingletonReducesExactly) {
  const StochasticMinimaxProblem w = make_wgan();
  RngStream rng(8);
  const Sample xi = w.sample(rng);
  const Vector x = vec({0.2, 0.3});
  const Vector y = vec({0.5, -0.4});
  const Vector u = sample_unit_sphere(2, rng);
  const ValueOracle fixed = [&](const Vector& a, const Vector& b) { return w.value_at(a, b, xi); };
  QueryMeter m;
  const std::vector<Sample> s{xi};
  EXPECT_EQ(unige_x_batch(w.value_at, x, y, 1e-3, s, DirectionBatch(2, {u}), m), unige_x(fixed, x, y, 1e-3, u, m));
  EXPECT_EQ(unige_y_batch(w.value_at, x, y, 1e-3, s, DirectionBatch(2, {u}), m), unige_y(fixed, x, y, 1e-3, u, m));
}

TEST(UnigeBatch, IdenticalSamplesAverageSingles) {
  const MinimaxProblem p = make_robust_polynomial();
  const StochasticMinimaxProblem s = as_stochastic(p);
  RngStream rng(9);
  const DirectionBatch dirs = DirectionBatch::sample(2, 5, rng);
  const std::vector<Sample> samples(5, Sample{0.0});
  const Vector x = vec({0.3, 0.1});
  const Vector y = vec({0.05, 0.02});
  QueryMeter m;
  Vector ref = Vector::Zero(2);
  Vector ref_y = Vector::Zero(2);
  for (std::size_t i = 0; i < 5; ++i) {
    ref += unige_x(p.value, x, y, 1e-3, dirs[i], m);
    ref_y += unige_y(p.value, x, y, 1e-3, dirs[i], m);
  }
  EXPECT_LE((unige_x_batch(s.value_at, x, y, 1e-3, samples, dirs, m) - ref / 5.0).norm(), 1e-12);
  EXPECT_LE((unige_y_batch(s.value_at, x, y, 1e-3, samples, dirs, m) - ref_y / 5.0).norm(), 1e-12);
}

TEST(UnigeBatch, LengthMismatch) {
  const StochasticMinimaxProblem w = make_wgan();
  RngStream rng(10);
  const DirectionBatch dirs = DirectionBatch::sample(2, 3, rng);
  const std::vector<Sample> samples(2, Sample{0.0, 0.0});
  QueryMeter m;
  EXPECT_ERROR_KIND(unige_x_batch(w.value_at, vec({0, 0}), vec({0, 0}), 1e-3, samples, dirs, m),
                    ErrorKind::kDimensionMismatch);
  EXPECT_ERROR_KIND(unige_y_batch(w.value_at, vec({0, 0}), vec({0, 0}), 1e-3, samples, dirs, m),
                    ErrorKind::kDimensionMismatch);
  EXPECT_EQ(m.value(), 0u);
}

TEST(UnigeBatch, QueryAccountingIsTwoPerTerm) {
  const StochasticMinimaxProblem w = make_wgan();
  RngStream rng(11);
  for (std::size_t r : {1u, 3u, 17u}) {
    QueryMeter m;
    const auto samples = draw_samples(w.sample, r, rng);
    const DirectionBatch dirs = DirectionBatch::sample(2, r, rng);
    unige_x_batch(w.value_at, vec({0.2, 0.3}), vec({0, 0}), 1e-3, samples, dirs, m);
    EXPECT_EQ(m.value(), 2 * r);
    unige_y_batch(w.value_at, vec({0.2, 0.3}), vec({0, 0}), 1e-3, samples, dirs, m);
    EXPECT_EQ(m.value(), 4 * r);
  }
}

// Variance of the minibatch estimate falls as 1/r.
TEST(UnigeBatch, VarianceScalesInverselyWithBatch) {
  const StochasticMinimaxProblem w = make_wgan();
  const Vector x = vec({0.2, 0.3});
  const Vector y = vec({0.5, 0.5});
  const std::vector<double> rs{1, 4, 16, 64};
  for (Block block : {Block::kX, Block::kY}) {
    std::vector<double> vars;
    for (double r : rs) {
      const auto est = [&](RngStream& rng) {
        QueryMeter m;
        const auto samples = draw_samples(w.sample, static_cast<std::size_t>(r), rng);
        const DirectionBatch dirs = DirectionBatch::sample(2, static_cast<std::size_t>(r), rng);
        return block == Block::kX ? unige_x_batch(w.value_at, x, y, 1e-3, samples, dirs, m)
                                  : unige_y_batch(w.value_at, x, y, 1e-3, samples, dirs, m);
      };
      vars.push_back(estimator_stats(est, 4000, RngStream(12, {static_cast<std::uint64_t>(r)})).covariance_trace);
    }
    const double slope = log_slope(rs, vars);
    EXPECT_NEAR(slope, -1.0, 0.15) << "block " << (block == Block::kX ? "x" : "y");
  }
}

TEST(SmoothingParams, Validate) {
  EXPECT_ERROR_KIND((SmoothingParams{0.0, 1.0}.validate()), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND((SmoothingParams{1.0, std::nan("")}.validate()), ErrorKind::kInvalidArgument);
  EXPECT_NO_THROW((SmoothingParams{1e-3, 1e-3}.validate()));
}
