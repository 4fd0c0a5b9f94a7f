#include <gtest/gtest.h>

#include <set>

#include "test_util.hpp"
#include "zominimax/problem.hpp"
#include "zominimax/problems.hpp"
#include "zominimax/rng.hpp"

using namespace zominimax;

TEST(ProblemConstants, RejectsInvalid) {
  EXPECT_ERROR_KIND(ProblemConstants(0.0, 1.0), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(ProblemConstants(1.0, -1.0), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(ProblemConstants(1.0, 2.0), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(ProblemConstants(1.0, 1.0, -0.5), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(ProblemConstants(std::nan(""), 1.0), ErrorKind::kInvalidArgument);
}

TEST(ProblemConstants, DerivedQuantities) {
  const ProblemConstants c(2.0, 0.5, 1.0);
  EXPECT_DOUBLE_EQ(c.kappa(), 4.0);
  EXPECT_DOUBLE_EQ(c.smoothness(), 2.0 + 4.0 / 1.0);
}

TEST(ProjectBox, Examples) {
  const Box unit{vec({-1.0}), vec({1.0})};
  EXPECT_EQ(project_box(vec({5.0}), unit), vec({1.0}));
  EXPECT_EQ(project_box(vec({0.3}), unit), vec({0.3}));
  const Box c{vec({-0.95, -0.45}), vec({3.2, 4.4})};
  EXPECT_EQ(project_box(vec({4.0, -1.0}), c), vec({3.2, -0.45}));
}

TEST(ProjectBox, Errors) {
  const Box unit{vec({-1.0}), vec({1.0})};
  EXPECT_ERROR_KIND(project_box(vec({1.0, 2.0}), unit), ErrorKind::kDimensionMismatch);
  const Box inverted{vec({1.0}), vec({-1.0})};
  EXPECT_ERROR_KIND(project_box(vec({0.0}), inverted), ErrorKind::kInvalidArgument);
}

TEST(ProjectBall, Examples) {
  const Vector zero = Vector::Zero(2);
  EXPECT_EQ(project_ball(vec({0.3, 0.0}), zero, 0.5), vec({0.3, 0.0}));
  EXPECT_EQ(project_ball(vec({1.0, 0.0}), zero, 0.5), vec({0.5, 0.0}));
  const Vector p = project_ball(vec({3.0, 4.0}), zero, 0.5);
  EXPECT_NEAR(p[0], 0.3, 1e-15);
  EXPECT_NEAR(p[1], 0.4, 1e-15);
  EXPECT_NEAR(p.norm(), 0.5, 1e-15);
}

TEST(ProjectBall, Errors) {
  EXPECT_ERROR_KIND(project_ball(vec({1.0}), Vector::Zero(2), 0.5), ErrorKind::kDimensionMismatch);
  EXPECT_ERROR_KIND(project_ball(vec({1.0}), Vector::Zero(1), 0.0), ErrorKind::kInvalidArgument);
}

TEST(Projections, Idempotent) {
  RngStream rng(7);
  const Box c{vec({-0.95, -0.45}), vec({3.2, 4.4})};
  const Ball ball{vec({0.1, -0.2}), 0.5};
  for (int i = 0; i < 1000; ++i) {
    const Vector v = vec({rng.normal(0.0, 3.0), rng.normal(0.0, 3.0)});
    const Vector b = project_box(v, c);
    EXPECT_EQ(project_box(b, c), b);
    const Vector p = project_ball(v, ball);
    EXPECT_EQ(project_ball(p, ball), p);
    EXPECT_LE((p - ball.center).norm(), ball.radius * (1.0 + 1e-15));
  }
}

TEST(QueryMeter, Counts) {
  QueryMeter m;
  m.add(2);
  m.add(3);
  EXPECT_EQ(m.value(), 5u);
  m.reset();
  EXPECT_EQ(m.value(), 0u);
}

TEST(RngStream, SameSeedAndPathReproduce) {
  RngStream a(42, {1, 2});
  RngStream b(42, {1, 2});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, SplitsDiffer) {
  const RngStream root(42);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t t = 0; t < 50; ++t) {
    for (std::uint64_t role = 1; role <= 4; ++role) {
      RngStream s = root.split({t, role});
      firsts.insert(s.next_u64());
    }
  }
  EXPECT_EQ(firsts.size(), 200u);
  RngStream a = root.split({1, 2});
  RngStream b = root.split({2, 1});
  EXPECT_NE(a.next_u64(), b.next_u64());
  RngStream c = RngStream(43).split({1, 2});
  RngStream d = root.split({1, 2});
  EXPECT_NE(c.next_u64(), d.next_u64());
}

TEST(RngStream, SplitDoesNotAdvanceParent) {
  RngStream a(5);
  RngStream b(5);
  (void)a.split({3});
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(WithValueNoise, ZeroVarianceIsExact) {
  const MinimaxProblem p = make_pl_quadratic(PlQuadraticSpec::scalar(1, 1, 1));
  const StochasticMinimaxProblem s = with_value_noise(p, 0.0);
  RngStream rng(1);
  for (int i = 0; i < 10; ++i) {
    const Vector x = vec({rng.normal()});
    const Vector y = vec({rng.normal()});
    EXPECT_EQ(s.value_at(x, y, s.sample(rng)), p.value(x, y));
  }
}

TEST(WithValueNoise, NoiseMeanAndDeterminism) {
  const MinimaxProblem p = make_pl_quadratic(PlQuadraticSpec::scalar(1, 1, 1));
  const StochasticMinimaxProblem s = with_value_noise(p, 0.5);
  const Vector x = vec({0.5});
  const Vector y = vec({0.2});
  const double clean = p.value(x, y);
  RngStream rng(11);
  std::vector<double> diff;
  const int n = 100000;
  for (int i = 0; i < n; ++i) diff.push_back(s.value_at(x, y, s.sample(rng)) - clean);
  EXPECT_LE(std::abs(zmtest::mean(diff)), 3.0 * std::sqrt(0.5 / n));
  EXPECT_NEAR(zmtest::sample_var(diff), 0.5, 0.05);

  RngStream r1(3), r2(3);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(s.sample(r1), s.sample(r2));
  ASSERT_TRUE(s.expected.has_value());
  EXPECT_EQ(s.expected->value(x, y), clean);
}

TEST(WithValueNoise, RejectsNegativeVariance) {
  const MinimaxProblem p = make_pl_quadratic(PlQuadraticSpec::scalar(1, 1, 1));
  EXPECT_ERROR_KIND(with_value_noise(p, -0.1), ErrorKind::kInvalidArgument);
}

TEST(MinimaxProblem, ValidateReportsMissingPieces) {
  MinimaxProblem p;
  p.id = "empty";
  p.d1 = 1;
  p.d2 = 1;
  p.x0 = vec({0.0});
  p.y0 = vec({0.0});
  EXPECT_ERROR_KIND(p.validate(), ErrorKind::kMissingOracle);
  p.value = [](const Vector&, const Vector&) { return 0.0; };
  p.x0 = vec({0.0, 1.0});
  EXPECT_ERROR_KIND(p.validate(), ErrorKind::kDimensionMismatch);
}

TEST(MinimaxProblem, OraclePurity) {
  const MinimaxProblem p = make_robust_polynomial();
  const Vector x = vec({0.3, 0.7});
  const Vector y = vec({0.1, -0.2});
  const double a = p.value(x, y);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(p.value(x, y), a);
}
