#pragma once

#include "kfbi/grid.hpp"

namespace kfbi {

// Coefficients of the coupled modified-Helmholtz operator
//   L_i u = div(D_i grad u_i) - kappa (u_i - u_e)
//   L_e u = div(D_e grad u_e) + kappa (u_i - u_e)
// with diagonal, per-axis constant conductivities.
struct DiffusionParams {
  Vec3 intra{};  // D_i diagonal
  Vec3 extra{};  // D_e diagonal
  double kappa = 0.0;

  bool operator==(const DiffusionParams& o) const {
    return intra == o.intra && extra == o.extra && kappa == o.kappa;
  }
};

// Second-order centered stencil of the operator at interior nodes; rows on
// box-boundary nodes are zero. Neighbor values are taken from the field as
// given (the solver's homogeneous Dirichlet data corresponds to zeros there).
FieldPair apply_diffusion_operator(const FieldPair& u, const DiffusionParams& p,
                                   const CartesianGrid& grid);

// Direct solver: sine transform (DST-I) per axis diagonalizes the stencil into
// independent 2x2 component blocks per mode. Homogeneous Dirichlet data on the
// box faces; the right-hand side is read at interior nodes only.
class FftEllipticSolver {
 public:
  explicit FftEllipticSolver(const CartesianGrid& grid);
  ~FftEllipticSolver();
  FftEllipticSolver(const FftEllipticSolver&) = delete;
  FftEllipticSolver& operator=(const FftEllipticSolver&) = delete;

  const CartesianGrid& grid() const { return grid_; }
  FieldPair solve(const FieldPair& rhs, const DiffusionParams& p);

 private:
  CartesianGrid grid_;
  int n_ = 0;  // interior nodes per axis
  long size_ = 0;
  double* buf_i_ = nullptr;
  double* buf_e_ = nullptr;
  void* plan_ = nullptr;  // fftw_plan, in-place DST-I over all axes
  std::vector<double> lambda_;  // Dirichlet eigenvalues of -d^2/dx^2
};

}  // namespace kfbi
