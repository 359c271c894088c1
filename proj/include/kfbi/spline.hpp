#pragma once

#include <vector>

#include "kfbi/core.hpp"

namespace kfbi {

// C2 periodic cubic spline over the uniform parameter grid t_j = j/M, period 1.
class PeriodicSpline {
 public:
  PeriodicSpline() = default;
  explicit PeriodicSpline(std::vector<double> values);

  double eval(double t) const;
  double deriv(double t) const;
  double deriv2(double t) const;

  int size() const { return static_cast<int>(y_.size()); }

 private:
  // span index and local offset u in [0,1) for wrapped parameter t
  void locate(double t, int& j, double& u) const;

  std::vector<double> y_;   // nodal values
  std::vector<double> m_;   // nodal second derivatives w.r.t. t
  double h_ = 0.0;          // parameter spacing 1/M
};

// Solves a cyclic tridiagonal system with constant bands (a: sub, b: diag, c: super).
std::vector<double> solve_cyclic_tridiagonal(double a, double b, double c, std::vector<double> rhs);

}  // namespace kfbi
