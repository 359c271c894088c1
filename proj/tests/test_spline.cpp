#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "kfbi/spline.hpp"

using namespace kfbi;

namespace {
constexpr double kTau = 2.0 * std::numbers::pi;
}

TEST_CASE("cyclic tridiagonal solve matches dense") {
  const int n = 17;
  const double a = 1.0 / 6.0, b = 2.0 / 3.0, c = 1.0 / 6.0;
  std::vector<double> rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = std::sin(3.1 * i) + 0.2 * i;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = b;
    A(i, (i + 1) % n) = c;
    A(i, (i + n - 1) % n) = a;
  }
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i) r[i] = rhs[i];
  Eigen::VectorXd ref = A.fullPivLu().solve(r);

  auto x = solve_cyclic_tridiagonal(a, b, c, rhs);
  for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(ref[i]).epsilon(1e-12));
}

TEST_CASE("spline interpolates nodal values") {
  const int m = 24;
  std::vector<double> y(m);
  for (int j = 0; j < m; ++j) y[j] = std::cos(kTau * j / m) + 0.3 * std::sin(2 * kTau * j / m);
  PeriodicSpline s(y);
  for (int j = 0; j < m; ++j) CHECK(s.eval(double(j) / m) == doctest::Approx(y[j]).epsilon(1e-14));
}

TEST_CASE("spline is periodic and C2") {
  const int m = 16;
  std::vector<double> y(m);
  for (int j = 0; j < m; ++j) y[j] = std::sin(kTau * j / m + 0.4);
  PeriodicSpline s(y);
  for (double t : {0.03, 0.77, 0.5}) {
    CHECK(s.eval(t + 1.0) == doctest::Approx(s.eval(t)).epsilon(1e-13));
    CHECK(s.eval(t - 1.0) == doctest::Approx(s.eval(t)).epsilon(1e-13));
  }
  // second derivative continuity across a node
  const double tn = 5.0 / m, eps = 1e-9;
  CHECK(s.deriv2(tn - eps) == doctest::Approx(s.deriv2(tn + eps)).epsilon(1e-5));
}

TEST_CASE("spline derivative matches difference quotient") {
  const int m = 32;
  std::vector<double> y(m);
  for (int j = 0; j < m; ++j) y[j] = std::exp(std::sin(kTau * j / m));
  PeriodicSpline s(y);
  for (double t : {0.11, 0.42, 0.9}) {
    const double d = 1e-6;
    const double fd1 = (s.eval(t + d) - s.eval(t - d)) / (2 * d);
    const double fd2 = (s.eval(t + d) - 2 * s.eval(t) + s.eval(t - d)) / (d * d);
    CHECK(s.deriv(t) == doctest::Approx(fd1).epsilon(1e-7));
    CHECK(s.deriv2(t) == doctest::Approx(fd2).epsilon(1e-3));
  }
}

TEST_CASE("spline converges at fourth order") {
  auto err = [](int m) {
    std::vector<double> y(m);
    for (int j = 0; j < m; ++j) y[j] = std::sin(kTau * j / m);
    PeriodicSpline s(y);
    double e = 0.0;
    for (int q = 0; q < 777; ++q) {
      const double t = q / 777.0;
      e = std::max(e, std::abs(s.eval(t) - std::sin(kTau * t)));
    }
    return e;
  };
  const double e1 = err(16), e2 = err(32);
  CHECK(e1 / e2 > 12.0);  // ~16 expected
}
