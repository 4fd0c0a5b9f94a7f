#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "zominimax/error.hpp"
#include "zominimax/problem.hpp"
#include "zominimax/rng.hpp"
#include "zominimax/vector.hpp"

namespace zominimax {

// ---------------------------------------------------------------------------
// PL-quadratic: f(x, y) = 1/2 x'Ax + x'By - 1/2 y'Cy with C symmetric positive
// definite. Closed forms: y*(x) = C^{-1}B'x, Phi(x) = 1/2 x'(A + B C^{-1} B')x.

struct PlQuadraticSpec {
  Matrix A;
  Matrix Bm;
  Matrix Cm;

  static PlQuadraticSpec scalar(double a, double b, double c) {
    PlQuadraticSpec s;
    s.A = Matrix::Constant(1, 1, a);
    s.Bm = Matrix::Constant(1, 1, b);
    s.Cm = Matrix::Constant(1, 1, c);
    return s;
  }
};

inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

inline MinimaxProblem make_pl_quadratic(const PlQuadraticSpec& spec) {
  const Eigen::Index d1 = spec.A.rows();
  const Eigen::Index d2 = spec.Cm.rows();
  if (d1 < 1 || d2 < 1 || spec.A.cols() != d1 || spec.Cm.cols() != d2 || spec.Bm.rows() != d1 ||
      spec.Bm.cols() != d2) {
    throw Error(ErrorKind::kDimensionMismatch, "PL-quadratic: A is d1 x d1, Bm is d1 x d2, Cm is d2 x d2");
  }
  if (!spec.A.allFinite() || !spec.Bm.allFinite() || !spec.Cm.allFinite()) {
    throw Error(ErrorKind::kNonFinite, "PL-quadratic matrices must be finite");
  }
  if (!spec.A.isApprox(spec.A.transpose()) || !spec.Cm.isApprox(spec.Cm.transpose())) {
    throw Error(ErrorKind::kInvalidArgument, "PL-quadratic: A and Cm must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(spec.Cm);
  const double lambda_min = eig.eigenvalues().minCoeff();
  if (!(lambda_min > 1e-12 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff()))) {
    throw Error(ErrorKind::kInvalidArgument, "PL-quadratic: Cm must be positive definite (singular or indefinite)");
  }

  const Matrix A = spec.A;
  const Matrix Bm = spec.Bm;
  const Matrix Cm = spec.Cm;
  const Matrix Cinv_Bt = Cm.ldlt().solve(Bm.transpose());
  const Matrix Hphi = A + Bm * Cinv_Bt;

  const double l = std::max({spectral_norm(A), spectral_norm(Bm), spectral_norm(Cm)});

  MinimaxProblem p;
  p.id = "pl-quadratic";
  p.d1 = static_cast<int>(d1);
  p.d2 = static_cast<int>(d2);
  Eigen::SelfAdjointEigenSolver<Matrix> phi_eig(Hphi);
  const bool phi_bounded = phi_eig.eigenvalues().minCoeff() > 0.0;
  p.constants = ProblemConstants(l, lambda_min, 0.0, phi_bounded ? std::optional<double>(0.0) : std::nullopt);
  if (phi_bounded) p.reference_x = Vector::Zero(d1);
  p.x0 = Vector::Ones(d1);
  p.y0 = Vector::Zero(d2);

  p.value = [A, Bm, Cm](const Vector& x, const Vector& y) {
    return 0.5 * x.dot(A * x) + x.dot(Bm * y) - 0.5 * y.dot(Cm * y);
  };
  p.grad_x = [A, Bm](const Vector& x, const Vector& y) -> Vector { return A * x + Bm * y; };
  p.grad_y = [Bm, Cm](const Vector& x, const Vector& y) -> Vector { return Bm.transpose() * x - Cm * y; };
  p.y_star = [Cinv_Bt](const Vector& x) -> Vector { return Cinv_Bt * x; };
  p.phi_value = [Hphi](const Vector& x) { return 0.5 * x.dot(Hphi * x); };
  p.phi_grad = [Hphi](const Vector& x) -> Vector { return Hphi * x; };
  return p;
}

// ---------------------------------------------------------------------------
// Toy WGAN. Generator G(z) = phi1 + phi2 z, discriminator D(w) = psi1 w + psi2 w^2,
// x = (phi1, phi2), y = (psi1, psi2), xi = (x_real, z):
//   G(x, y; xi) = D(x_real) - D(G(z)) - lambda ||psi||^2.

struct WganSpec {
  double lambda = 0.001;
  double real_mean = 0.0;
  /// Standard deviation of x_real, which is also the optimal phi2.
  double real_std = 0.1;

  /// Reads the second data parameter as a variance instead (phi2* = sqrt(0.1)).
  static WganSpec variance_convention(double variance = 0.1) {
    WganSpec s;
    s.real_std = std::sqrt(variance);
    return s;
  }
};

namespace detail {

/// l bound for the WGAN expectation: the largest block-Hessian norm over the
/// box ||(phi, psi)||_inf <= 2. Block norms are convex in the (affine)
/// entries, so it is attained at a vertex.
inline double wgan_lipschitz(double lambda, double box = 2.0) {
  double l = 2.0 * lambda;
  for (int mask = 0; mask < 8; ++mask) {
    const double p1 = (mask & 1) ? box : -box;
    const double p2 = (mask & 2) ? box : -box;
    const double s2 = (mask & 4) ? box : -box;
    Matrix hxx(2, 2);
    hxx << -2.0 * s2, 0.0, 0.0, -2.0 * s2;
    Matrix hxy(2, 2);
    hxy << -1.0, -2.0 * p1, 0.0, -2.0 * p2;
    l = std::max({l, spectral_norm(hxx), spectral_norm(hxy)});
  }
  return l;
}

}  // namespace detail

inline StochasticMinimaxProblem make_wgan(const WganSpec& spec = {}) {
  if (!(std::isfinite(spec.lambda) && spec.lambda > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "WGAN regularizer lambda must be > 0");
  }
  if (!(std::isfinite(spec.real_std) && spec.real_std >= 0.0) || !std::isfinite(spec.real_mean)) {
    throw Error(ErrorKind::kInvalidArgument, "WGAN data distribution parameters must be finite, std >= 0");
  }
  const double lam = spec.lambda;
  const double m = spec.real_mean;
  const double s = spec.real_std;
  const double second_moment = m * m + s * s;

  StochasticMinimaxProblem p;
  p.id = "wgan";
  p.d1 = 2;
  p.d2 = 2;
  const double l = detail::wgan_lipschitz(lam);
  // sigma: square root of the largest total per-sample gradient variance over
  // the same box (Monte-Carlo estimate 19.8 at the vertices, rounded up).
  p.constants = ProblemConstants(l, 2.0 * lam, 20.0);
  p.reference_x = vec({m, s});
  p.x0 = vec({0.2, 0.3});
  p.y0 = vec({0.0, 0.0});

  p.sample = [m, s](RngStream& rng) -> Sample {
    const double x_real = m + s * rng.normal();
    const double z = rng.normal();
    return Sample{x_real, z};
  };
  p.value_at = [lam](const Vector& x, const Vector& y, const Sample& xi) {
    const double xr = xi[0];
    const double g = x[0] + x[1] * xi[1];
    return y[0] * xr + y[1] * xr * xr - y[0] * g - y[1] * g * g - lam * y.squaredNorm();
  };
  p.grad_x_at = [](const Vector& x, const Vector& y, const Sample& xi) -> Vector {
    const double z = xi[1];
    const double g = x[0] + x[1] * z;
    const double dg = -y[0] - 2.0 * y[1] * g;
    return vec({dg, dg * z});
  };
  p.grad_y_at = [lam](const Vector& x, const Vector& y, const Sample& xi) -> Vector {
    const double xr = xi[0];
    const double g = x[0] + x[1] * xi[1];
    return vec({xr - g - 2.0 * lam * y[0], xr * xr - g * g - 2.0 * lam * y[1]});
  };

  // E[x_real] = m, E[x_real^2] = m^2 + s^2, E[G(z)] = phi1, E[G(z)^2] = phi1^2 + phi2^2.
  MinimaxProblem e;
  static_cast<ProblemInfo&>(e) = static_cast<const ProblemInfo&>(p);
  const auto coeff = [m, second_moment](const Vector& x) {
    return vec({m - x[0], second_moment - x[0] * x[0] - x[1] * x[1]});
  };
  e.value = [lam, coeff](const Vector& x, const Vector& y) { return y.dot(coeff(x)) - lam * y.squaredNorm(); };
  e.grad_x = [](const Vector& x, const Vector& y) -> Vector {
    return vec({-y[0] - 2.0 * y[1] * x[0], -2.0 * y[1] * x[1]});
  };
  e.grad_y = [lam, coeff](const Vector& x, const Vector& y) -> Vector { return coeff(x) - 2.0 * lam * y; };
  e.y_star = [lam, coeff](const Vector& x) -> Vector { return coeff(x) / (2.0 * lam); };
  e.phi_value = [lam, coeff](const Vector& x) { return coeff(x).squaredNorm() / (4.0 * lam); };
  e.phi_grad = [lam, coeff, gx = e.grad_x](const Vector& x) -> Vector { return gx(x, coeff(x) / (2.0 * lam)); };
  p.expected = std::move(e);
  return p;
}

// ---------------------------------------------------------------------------
// Robust polynomial: max_{x in C} min_{||y|| <= 0.5} P(x1 - y1, x2 - y2), stored
// negated as min_x max_y -P(x - y).

struct PolyTerm {
  double coeff;
  int pa;  // power of a = x1 - y1
  int pb;  // power of b = x2 - y2
};

inline constexpr std::array<PolyTerm, 16> kRobustPolyTerms = {{
    {-2.0, 6, 0},  {12.2, 5, 0},  {-21.2, 4, 0}, {-6.2, 1, 0},  {6.4, 3, 0},  {4.7, 2, 0},
    {-1.0, 0, 6},  {11.0, 0, 5},  {-43.3, 0, 4}, {10.0, 0, 1},  {74.8, 0, 3}, {-56.9, 0, 2},
    {4.1, 1, 1},   {0.1, 2, 2},   {-0.4, 1, 2},  {-0.4, 2, 1},
}};

/// P(a, b) summed from the coefficient table.
inline double robust_poly_value(double a, double b) {
  double sum = 0.0;
  for (const PolyTerm& t : kRobustPolyTerms) sum += t.coeff * std::pow(a, t.pa) * std::pow(b, t.pb);
  return sum;
}

/// (dP/da, dP/db), differentiated by hand rather than from the table.
inline std::array<double, 2> robust_poly_gradient(double a, double b) {
  const double a2 = a * a, a3 = a2 * a, a4 = a3 * a, a5 = a4 * a;
  const double b2 = b * b, b3 = b2 * b, b4 = b3 * b, b5 = b4 * b;
  const double da = -12.0 * a5 + 61.0 * a4 - 84.8 * a3 + 19.2 * a2 + 9.4 * a - 6.2 + 4.1 * b + 0.2 * a * b2 -
                    0.4 * b2 - 0.8 * a * b;
  const double db = -6.0 * b5 + 55.0 * b4 - 173.2 * b3 + 224.4 * b2 - 113.8 * b + 10.0 + 4.1 * a + 0.2 * a2 * b -
                    0.8 * a * b - 0.4 * a2;
  return {da, db};
}

/// Largest spectral norm of the Hessian of P over the square
/// [a0 - r, a0 + r] x [b0 - r, b0 + r], sampled on a grid.
inline double robust_poly_local_lipschitz(double a0, double b0, double r, int grid = 101) {
  double l = 0.0;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double a = a0 - r + 2.0 * r * i / (grid - 1);
      const double b = b0 - r + 2.0 * r * j / (grid - 1);
      const double a2 = a * a, a3 = a2 * a, a4 = a3 * a;
      const double b2 = b * b, b3 = b2 * b, b4 = b3 * b;
      Matrix h(2, 2);
      h(0, 0) = -60.0 * a4 + 244.0 * a3 - 254.4 * a2 + 38.4 * a + 9.4 + 0.2 * b2 - 0.8 * b;
      h(1, 1) = -30.0 * b4 + 220.0 * b3 - 519.6 * b2 + 448.8 * b - 113.8 + 0.2 * a2 - 0.8 * a;
      h(0, 1) = h(1, 0) = 4.1 + 0.4 * a * b - 0.8 * b - 0.8 * a;
      l = std::max(l, spectral_norm(h));
    }
  }
  return l;
}

/// Documented Lipschitz constant: max Hessian norm of P on |a|, |b| <= 1,
/// the region around the robust optimum (computed offline, rounded up).
inline constexpr double kRobustPolyLipschitz = 1333.0;

inline MinimaxProblem make_robust_polynomial() {
  MinimaxProblem p;
  p.id = "robust-poly";
  p.d1 = 2;
  p.d2 = 2;
  // The inner problem is not PL; mu_pl is nominal and only feeds the theory
  // schedules, which are not used on this problem.
  p.constants = ProblemConstants(kRobustPolyLipschitz, 1.0, 0.0);
  p.x_feasible = Box{vec({-0.95, -0.45}), vec({3.2, 4.4})};
  p.y_feasible = Ball{vec({0.0, 0.0}), 0.5};
  p.reference_x = vec({-0.195, 0.284});
  p.reference_value = -4.33;
  p.x0 = vec({0.0, 0.0});
  p.y0 = vec({0.0, 0.0});

  p.value = [](const Vector& x, const Vector& y) { return -robust_poly_value(x[0] - y[0], x[1] - y[1]); };
  p.grad_x = [](const Vector& x, const Vector& y) -> Vector {
    const auto g = robust_poly_gradient(x[0] - y[0], x[1] - y[1]);
    return vec({-g[0], -g[1]});
  };
  p.grad_y = [](const Vector& x, const Vector& y) -> Vector {
    const auto g = robust_poly_gradient(x[0] - y[0], x[1] - y[1]);
    return vec({g[0], g[1]});
  };
  return p;
}

/// Robust polynomial observed through values with N(0, variance) noise.
inline StochasticMinimaxProblem noisy_robust_polynomial(double variance = 0.5) {
  StochasticMinimaxProblem p = with_value_noise(make_robust_polynomial(), variance);
  p.id = "robust-poly-noisy";
  return p;
}

}  // namespace zominimax
