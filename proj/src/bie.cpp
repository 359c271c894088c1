#include "kfbi/bie.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <utility>

namespace kfbi {

namespace {

Eigen::VectorXd stack(const Density& d) {
  const int m = d.size();
  Eigen::VectorXd v(2 * m);
  for (int j = 0; j < m; ++j) {
    v(j) = d.i[j];
    v(m + j) = d.e[j];
  }
  return v;
}

Density unstack(const Eigen::VectorXd& v) {
  const int m = static_cast<int>(v.size()) / 2;
  Density d(m);
  for (int j = 0; j < m; ++j) {
    d.i[j] = v(j);
    d.e[j] = v(m + j);
  }
  return d;
}

}  // namespace

double density_norm(const Density& d) {
  double s = 0.0;
  for (double x : d.i) s += x * x;
  for (double x : d.e) s += x * x;
  return std::sqrt(s / (2.0 * d.size()));
}

BieSolver::BieSolver(const BoundaryGeometry& geo, const CartesianGrid& grid,
                     const DiffusionParams& params)
    : geo_(geo),
      grid_(grid),
      params_(params),
      emb_(build_embedding(geo_, grid_)),
      plan_(build_extraction_plan(geo_, grid_, emb_)),
      fft_(grid_) {
  zero_jumps_.i.resize(geo_.num_nodes());
  zero_jumps_.e.resize(geo_.num_nodes());
}

Density BieSolver::extract_conormal(const FieldPair& field,
                                    const JumpTable& node_jumps) {
  const int m = nodes();
  Density out(m);
  for (int j = 0; j < m; ++j) {
    const PairLimits lim = extract_limits(plan_, j, field, node_jumps, params_);
    out.i[j] = lim.i.conormal;
    out.e[j] = lim.e.conormal;
  }
  return out;
}

BieSolver::Volume BieSolver::volume_potential(const FieldPair& f) {
  Volume v{fft_.solve(f, params_), Density(nodes())};
  v.conormal = extract_conormal(v.field, zero_jumps_);
  return v;
}

BieSolver::Applied BieSolver::apply_A(const Density& psi) {
  require(psi.size() == nodes(), "bie: density size does not match geometry");
  const JumpTable cut_jumps = jumps_from_density(psi, geo_, emb_, params_);
  const CorrectionSet corr = correction_set(cut_jumps, emb_, params_);
  FieldPair rhs(grid_.num_nodes());
  corr.add_to(rhs);
  Applied out{Density(nodes()), fft_.solve(rhs, params_)};
  const JumpTable node_jumps = boundary_node_jumps(psi, geo_, params_);
  out.a_psi = extract_conormal(out.field, node_jumps);
  return out;
}

Density BieSolver::assemble_g(const Density& gn, const Density& volume_conormal) {
  require(gn.size() == volume_conormal.size(),
          "bie: boundary data and volume conormal sizes differ");
  Density g(gn.size());
  for (int j = 0; j < gn.size(); ++j) {
    g.i[j] = gn.i[j] - volume_conormal.i[j];
    g.e[j] = gn.e[j] - volume_conormal.e[j];
  }
  return g;
}

BieSolver::Iterate BieSolver::richardson_solve(const Density& g, double gamma,
                                               double tol, int max_iter) {
  require(g.size() == nodes(), "bie: rhs size does not match geometry");
  require(gamma > 0.0 && gamma < 1.0, "bie: richardson damping must lie in (0,1)");
  require(tol > 0.0 && max_iter > 0, "bie: invalid iteration controls");

  Iterate it{Density(nodes()), FieldPair(grid_.num_nodes()), {}};
  it.report.method = BieMethod::richardson;
  const double gnorm = density_norm(g);
  if (gnorm == 0.0) return it;

  Density r = g;  // A(0) = 0
  for (int iter = 1; iter <= max_iter; ++iter) {
    for (int j = 0; j < nodes(); ++j) {
      it.psi.i[j] += 2.0 * gamma * r.i[j];
      it.psi.e[j] += 2.0 * gamma * r.e[j];
    }
    Applied ap = apply_A(it.psi);
    for (int j = 0; j < nodes(); ++j) {
      r.i[j] = g.i[j] - ap.a_psi.i[j];
      r.e[j] = g.e[j] - ap.a_psi.e[j];
    }
    const double rel = density_norm(r) / gnorm;
    it.report.iterations = iter;
    it.report.history.push_back(rel);
    if (rel <= tol) {
      it.report.final_residual = rel;
      it.field = std::move(ap.field);
      return it;
    }
  }
  it.report.final_residual = it.report.history.back();
  std::ostringstream msg;
  msg << "bie: richardson did not reach tolerance " << tol << " within "
      << max_iter << " iterations (residual " << it.report.final_residual << ")";
  throw BieDivergence(msg.str(), it.report);
}

BieSolver::Iterate BieSolver::gmres_solve(const Density& g, double tol,
                                          int max_iter) {
  require(g.size() == nodes(), "bie: rhs size does not match geometry");
  require(tol > 0.0 && max_iter > 0, "bie: invalid iteration controls");

  Iterate it{Density(nodes()), FieldPair(grid_.num_nodes()), {}};
  it.report.method = BieMethod::gmres;
  const Eigen::VectorXd b = stack(g);
  const double beta = b.norm();
  if (beta == 0.0) return it;

  const int n = static_cast<int>(b.size());
  const int kmax = std::min(max_iter, n);
  Eigen::MatrixXd basis(n, kmax + 1);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(kmax + 1, kmax);
  Eigen::VectorXd cs(kmax), sn(kmax);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(kmax + 1);
  s(0) = beta;
  basis.col(0) = b / beta;

  int k = 0;
  bool exact = false;
  for (; k < kmax; ++k) {
    Eigen::VectorXd w = stack(apply_A(unstack(basis.col(k))).a_psi);
    for (int i = 0; i <= k; ++i) {
      hess(i, k) = w.dot(basis.col(i));
      w -= hess(i, k) * basis.col(i);
    }
    hess(k + 1, k) = w.norm();
    const bool breakdown = hess(k + 1, k) <= 1e-14 * beta;
    if (!breakdown) basis.col(k + 1) = w / hess(k + 1, k);

    for (int i = 0; i < k; ++i) {
      const double t = cs(i) * hess(i, k) + sn(i) * hess(i + 1, k);
      hess(i + 1, k) = -sn(i) * hess(i, k) + cs(i) * hess(i + 1, k);
      hess(i, k) = t;
    }
    const double denom = std::hypot(hess(k, k), hess(k + 1, k));
    cs(k) = hess(k, k) / denom;
    sn(k) = hess(k + 1, k) / denom;
    hess(k, k) = denom;
    hess(k + 1, k) = 0.0;
    s(k + 1) = -sn(k) * s(k);
    s(k) *= cs(k);

    const double rel = std::abs(s(k + 1)) / beta;
    it.report.iterations = k + 1;
    it.report.history.push_back(rel);
    if (rel <= tol || breakdown) {
      exact = breakdown;
      ++k;
      break;
    }
  }

  if (it.report.history.empty() || (it.report.history.back() > tol && !exact)) {
    it.report.final_residual =
        it.report.history.empty() ? 1.0 : it.report.history.back();
    std::ostringstream msg;
    msg << "bie: gmres did not reach tolerance " << tol << " within " << kmax
        << " iterations (residual " << it.report.final_residual << ")";
    throw BieDivergence(msg.str(), it.report);
  }

  const Eigen::VectorXd y = hess.topLeftCorner(k, k)
                                .triangularView<Eigen::Upper>()
                                .solve(s.head(k));
  it.psi = unstack(basis.leftCols(k) * y);

  // One more operator application recovers the layer field of the converged
  // density and replaces the rotation-based residual estimate by the real one.
  Applied ap = apply_A(it.psi);
  Density r(nodes());
  for (int j = 0; j < nodes(); ++j) {
    r.i[j] = g.i[j] - ap.a_psi.i[j];
    r.e[j] = g.e[j] - ap.a_psi.e[j];
  }
  it.report.final_residual = density_norm(r) / density_norm(g);
  it.field = std::move(ap.field);
  require(it.report.final_residual <= 10.0 * tol,
          "bie: gmres residual estimate disagrees with the recomputed residual");
  return it;
}

BieSolver::Solution BieSolver::solve_neumann_bvp(const FieldPair& f,
                                                 const Density& gn,
                                                 const BieOptions& opt) {
  // Split off the compatible constant pair: (c, 0) solves the interior
  // problem with f = (-kappa c, +kappa c) and zero flux exactly, so routing
  // it around the box solver avoids the wall layers that an f with nonzero
  // mean difference would excite (they otherwise leak a spurious density of
  // size ~|c| * decay(wall distance)).  Pure linearity, applied when the
  // coupling is present.
  double c = 0.0;
  FieldPair fr = f;
  if (params_.kappa > 0.0) {
    double mean = 0.0;
    for (long n = 0; n < grid_.num_nodes(); ++n) mean += f.e[n] - f.i[n];
    c = mean / (2.0 * params_.kappa * static_cast<double>(grid_.num_nodes()));
    for (long n = 0; n < grid_.num_nodes(); ++n) {
      fr.i[n] += params_.kappa * c;
      fr.e[n] -= params_.kappa * c;
    }
  }

  Volume vol = volume_potential(fr);
  const Density g = assemble_g(gn, vol.conormal);
  Iterate it = opt.method == BieMethod::richardson
                   ? richardson_solve(g, opt.gamma, opt.tol, opt.max_iter)
                   : gmres_solve(g, opt.tol, opt.max_iter);

  Solution sol{std::move(vol.field), std::move(it.psi), std::move(it.report)};
  sol.u += it.field;
  if (c != 0.0)
    for (long n = 0; n < grid_.num_nodes(); ++n) sol.u.i[n] += c;
  return sol;
}

}  // namespace kfbi
