#include "kfbi/fft_elliptic.hpp"

#include <fftw3.h>

#include <cmath>

namespace kfbi {

FieldPair apply_diffusion_operator(const FieldPair& u, const DiffusionParams& p,
                                   const CartesianGrid& grid) {
  require(u.size() == grid.num_nodes(), "apply_diffusion_operator: field size mismatch");
  FieldPair out(grid.num_nodes());
  const double inv_h2 = 1.0 / (grid.h * grid.h);
  const int I = grid.cells;
  const int mz_lo = (grid.dim == 3) ? 1 : 0;
  const int mz_hi = (grid.dim == 3) ? I - 1 : 0;
  long strides[3] = {1, grid.nodes_per_axis(),
                     static_cast<long>(grid.nodes_per_axis()) * grid.nodes_per_axis()};
  for (int m = mz_lo; m <= mz_hi; ++m) {
    for (int l = 1; l <= I - 1; ++l) {
      for (int k = 1; k <= I - 1; ++k) {
        const long id = grid.index(k, l, m);
        double acc_i = 0.0, acc_e = 0.0;
        for (int d = 0; d < grid.dim; ++d) {
          const long s = strides[d];
          acc_i += p.intra[d] * (u.i[id + s] + u.i[id - s] - 2.0 * u.i[id]);
          acc_e += p.extra[d] * (u.e[id + s] + u.e[id - s] - 2.0 * u.e[id]);
        }
        const double couple = p.kappa * (u.i[id] - u.e[id]);
        out.i[id] = acc_i * inv_h2 - couple;
        out.e[id] = acc_e * inv_h2 + couple;
      }
    }
  }
  return out;
}

FftEllipticSolver::FftEllipticSolver(const CartesianGrid& grid) : grid_(grid) {
  n_ = grid.cells - 1;
  size_ = 1;
  for (int d = 0; d < grid.dim; ++d) size_ *= n_;
  buf_i_ = fftw_alloc_real(size_);
  buf_e_ = fftw_alloc_real(size_);
  require(buf_i_ && buf_e_, "fft solver: allocation failed");

  int dims[3] = {n_, n_, n_};
  fftw_r2r_kind kinds[3] = {FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00};
  plan_ = fftw_plan_r2r(grid.dim, dims, buf_i_, buf_i_, kinds, FFTW_MEASURE);
  require(plan_ != nullptr, "fft solver: planning failed");
  require(fftw_alignment_of(buf_i_) == fftw_alignment_of(buf_e_),
          "fft solver: buffer alignment mismatch");

  lambda_.resize(n_);
  for (int m = 0; m < n_; ++m)
    lambda_[m] = (2.0 - 2.0 * std::cos((m + 1) * M_PI / grid.cells)) / (grid.h * grid.h);
}

FftEllipticSolver::~FftEllipticSolver() {
  if (plan_) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  if (buf_i_) fftw_free(buf_i_);
  if (buf_e_) fftw_free(buf_e_);
}

FieldPair FftEllipticSolver::solve(const FieldPair& rhs, const DiffusionParams& p) {
  require(rhs.size() == grid_.num_nodes(), "fft solve: rhs size mismatch");
  const int I = grid_.cells;
  const int mz_hi = (grid_.dim == 3) ? I - 1 : 1;

  // gather interior nodes
  long q = 0;
  for (int m = 1; m <= mz_hi; ++m) {
    if (grid_.dim == 2 && m > 1) break;
    for (int l = 1; l <= I - 1; ++l) {
      for (int k = 1; k <= I - 1; ++k) {
        const long id = grid_.index(k, l, grid_.dim == 3 ? m : 0);
        buf_i_[q] = rhs.i[id];
        buf_e_[q] = rhs.e[id];
        ++q;
      }
    }
  }

  fftw_execute_r2r(static_cast<fftw_plan>(plan_), buf_i_, buf_i_);
  fftw_execute_r2r(static_cast<fftw_plan>(plan_), buf_e_, buf_e_);

  // per-mode 2x2 block solve
  q = 0;
  const int mz_n = (grid_.dim == 3) ? n_ : 1;
  for (int mz = 0; mz < mz_n; ++mz) {
    const double lz = (grid_.dim == 3) ? lambda_[mz] : 0.0;
    for (int my = 0; my < n_; ++my) {
      const double ly = lambda_[my];
      for (int mx = 0; mx < n_; ++mx) {
        const double lx = lambda_[mx];
        double di = p.intra[0] * lx + p.intra[1] * ly;
        double de = p.extra[0] * lx + p.extra[1] * ly;
        if (grid_.dim == 3) {
          di += p.intra[2] * lz;
          de += p.extra[2] * lz;
        }
        const double ai = -di - p.kappa;
        const double ae = -de - p.kappa;
        const double det = ai * ae - p.kappa * p.kappa;
        const double fi = buf_i_[q], fe = buf_e_[q];
        buf_i_[q] = (ae * fi - p.kappa * fe) / det;
        buf_e_[q] = (ai * fe - p.kappa * fi) / det;
        ++q;
      }
    }
  }

  fftw_execute_r2r(static_cast<fftw_plan>(plan_), buf_i_, buf_i_);
  fftw_execute_r2r(static_cast<fftw_plan>(plan_), buf_e_, buf_e_);

  // scatter with DST-I round-trip normalization (2I per axis)
  double scale = 1.0;
  for (int d = 0; d < grid_.dim; ++d) scale *= 2.0 * I;
  FieldPair out(grid_.num_nodes());
  q = 0;
  for (int m = 1; m <= mz_hi; ++m) {
    if (grid_.dim == 2 && m > 1) break;
    for (int l = 1; l <= I - 1; ++l) {
      for (int k = 1; k <= I - 1; ++k) {
        const long id = grid_.index(k, l, grid_.dim == 3 ? m : 0);
        out.i[id] = buf_i_[q] / scale;
        out.e[id] = buf_e_[q] / scale;
        ++q;
      }
    }
  }
  return out;
}

}  // namespace kfbi
