#include "kfbi/spline.hpp"

#include <cmath>

namespace kfbi {

std::vector<double> solve_cyclic_tridiagonal(double a, double b, double c, std::vector<double> rhs) {
  // Sherman-Morrison on top of the Thomas algorithm.
  const int n = static_cast<int>(rhs.size());
  require(n >= 3, "cyclic tridiagonal: need n >= 3");

  auto thomas = [&](std::vector<double> d, double b0, double bn) {
    std::vector<double> cp(n), x(n);
    double beta = b0;
    cp[0] = c / beta;
    x[0] = d[0] / beta;
    for (int i = 1; i < n; ++i) {
      double bi = (i == n - 1) ? bn : b;
      beta = bi - a * cp[i - 1];
      cp[i] = c / beta;
      x[i] = (d[i] - a * x[i - 1]) / beta;
    }
    for (int i = n - 2; i >= 0; --i) x[i] -= cp[i] * x[i + 1];
    return x;
  };

  // A_cyclic = A_mod + u v^T with u = (gamma,0,...,a), v = (1,0,...,c/gamma)
  const double gamma = -b;
  const double b0 = b - gamma;
  const double bn = b - a * c / gamma;
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = a;

  std::vector<double> x = thomas(rhs, b0, bn);
  std::vector<double> z = thomas(u, b0, bn);
  const double vx = x[0] + (c / gamma) * x[n - 1];
  const double vz = 1.0 + z[0] + (c / gamma) * z[n - 1];
  require(std::abs(vz) > 1e-300, "cyclic tridiagonal: singular system");
  const double f = vx / vz;
  for (int i = 0; i < n; ++i) x[i] -= f * z[i];
  return x;
}

PeriodicSpline::PeriodicSpline(std::vector<double> values) : y_(std::move(values)) {
  const int n = static_cast<int>(y_.size());
  require(n >= 3, "periodic spline: need at least 3 nodes");
  h_ = 1.0 / n;

  // (1/6) m_{j-1} + (2/3) m_j + (1/6) m_{j+1} = (y_{j+1} - 2 y_j + y_{j-1}) / h^2
  std::vector<double> rhs(n);
  for (int j = 0; j < n; ++j) {
    const double yl = y_[(j + n - 1) % n], yc = y_[j], yr = y_[(j + 1) % n];
    rhs[j] = (yr - 2.0 * yc + yl) / (h_ * h_);
  }
  m_ = solve_cyclic_tridiagonal(1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, std::move(rhs));
}

void PeriodicSpline::locate(double t, int& j, double& u) const {
  const int n = size();
  double w = t - std::floor(t);  // wrap into [0,1)
  double s = w * n;
  j = static_cast<int>(s);
  if (j >= n) j = n - 1;
  u = s - j;
}

double PeriodicSpline::eval(double t) const {
  int j;
  double u;
  locate(t, j, u);
  const int n = size();
  const double ya = y_[j], yb = y_[(j + 1) % n];
  const double ma = m_[j], mb = m_[(j + 1) % n];
  const double a = 1.0 - u;
  return a * ya + u * yb + (h_ * h_ / 6.0) * ((a * a * a - a) * ma + (u * u * u - u) * mb);
}

double PeriodicSpline::deriv(double t) const {
  int j;
  double u;
  locate(t, j, u);
  const int n = size();
  const double ya = y_[j], yb = y_[(j + 1) % n];
  const double ma = m_[j], mb = m_[(j + 1) % n];
  const double a = 1.0 - u;
  // d/dt = (1/h) d/du
  return (yb - ya) / h_ + (h_ / 6.0) * ((3.0 * u * u - 1.0) * mb - (3.0 * a * a - 1.0) * ma);
}

double PeriodicSpline::deriv2(double t) const {
  int j;
  double u;
  locate(t, j, u);
  const int n = size();
  return (1.0 - u) * m_[j] + u * m_[(j + 1) % n];
}

}  // namespace kfbi
