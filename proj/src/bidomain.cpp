#include "kfbi/bidomain.hpp"

#include <cmath>
#include <sstream>

namespace kfbi {

namespace {

// cubic part V (V - theta)(1 - V) and its derivative
double cubic(double v, double theta) { return v * (v - theta) * (1.0 - v); }
double cubic_d(double v, double theta) {
  return -3.0 * v * v + 2.0 * (1.0 + theta) * v - theta;
}

[[noreturn]] void blow_up(const char* where, long node, double t) {
  std::ostringstream msg;
  msg << "reaction: non-finite state in " << where << " at node " << node
      << ", t = " << t;
  throw Error(msg.str());
}

}  // namespace

Currents fhn_currents(double v, double q, const FhnParams& p) {
  return {p.H * (q - cubic(v, p.theta)), p.alpha * v - p.zeta * q};
}

void reaction_forward(BidomainState& st, double dt_half, const FhnParams& p) {
  require(dt_half > 0.0, "reaction: step size must be positive");
  const long n = static_cast<long>(st.vm.size());
  for (long k = 0; k < n; ++k) {
    const Currents c = fhn_currents(st.vm[k], st.q[k], p);
    st.vm[k] -= dt_half / p.Cm * c.ion;
    st.q[k] += dt_half * c.dq;
    if (!std::isfinite(st.vm[k]) || !std::isfinite(st.q[k]))
      blow_up("the forward half step", k, st.t);
  }
}

void reaction_backward(BidomainState& st, double dt_half, const FhnParams& p,
                       const ReactionControls& rc) {
  require(dt_half > 0.0, "reaction: step size must be positive");
  // q = (q* + dt alpha V) / (1 + dt zeta) turns the nodal system into one
  // scalar equation F(V) = V - V* + (dt/Cm) I_ion(V, q(V)) = 0.
  const double qden = 1.0 + dt_half * p.zeta;
  const double dq_dv = dt_half * p.alpha / qden;
  const long n = static_cast<long>(st.vm.size());
  for (long k = 0; k < n; ++k) {
    const double vs = st.vm[k], qs = st.q[k];
    const auto q_of = [&](double v) { return (qs + dt_half * p.alpha * v) / qden; };
    const auto f_of = [&](double v) {
      return v - vs + dt_half / p.Cm * p.H * (q_of(v) - cubic(v, p.theta));
    };

    double v = vs;
    double f = f_of(v);
    bool done = std::abs(f) <= rc.newton_tol;
    for (int it = 0; !done && it < rc.newton_max; ++it) {
      const double df =
          1.0 + dt_half / p.Cm * p.H * (dq_dv - cubic_d(v, p.theta));
      if (std::abs(df) < 1e-12) break;  // degenerate slope: bisect instead
      v -= f / df;
      if (!std::isfinite(v)) break;
      f = f_of(v);
      done = std::abs(f) <= rc.newton_tol;
    }
    if (!done) {
      double lo = vs - 2.0, hi = vs + 2.0;
      double flo = f_of(lo);
      if (flo * f_of(hi) > 0.0) {
        std::ostringstream msg;
        msg << "reaction: implicit solve failed at node " << k << ", t = "
            << st.t << " (no bracket around V* = " << vs << ")";
        throw Error(msg.str());
      }
      for (int it = 0; it < 200 && !done; ++it) {
        v = 0.5 * (lo + hi);
        f = f_of(v);
        done = std::abs(f) <= rc.newton_tol;
        (flo * f <= 0.0 ? hi : lo) = v;
        if (flo * f > 0.0) flo = f;
      }
      if (!done) {
        std::ostringstream msg;
        msg << "reaction: implicit solve failed at node " << k << ", t = " << st.t;
        throw Error(msg.str());
      }
    }

    st.vm[k] = v;
    st.q[k] = q_of(v);
    if (!std::isfinite(st.vm[k]) || !std::isfinite(st.q[k]))
      blow_up("the backward half step", k, st.t);
  }
}

double bidomain_kappa(double dt, const FhnParams& p) {
  require(dt > 0.0, "diffusion: step size must be positive");
  return p.Cm * p.beta / (0.5 * dt);
}

FieldPair bidomain_forcing(const std::vector<double>& vm, double kappa, const FhnParams& p,
                           const std::vector<double>& stim_current) {
  const long n = static_cast<long>(vm.size());
  require(stim_current.empty() || static_cast<long>(stim_current.size()) == n,
          "diffusion: stimulus does not match the state");
  FieldPair f(n);
  for (long k = 0; k < n; ++k) {
    f.i[k] = -kappa * vm[k];
    f.e[k] = kappa * vm[k];
  }
  if (!stim_current.empty())
    for (long k = 0; k < n; ++k) f.e[k] -= p.beta * stim_current[k];
  return f;
}

BieReport diffusion_step(BidomainState& st, double dt, BieSolver& solver,
                         const FhnParams& p,
                         const std::vector<double>& stim_current,
                         const BieOptions& opt) {
  const long n = solver.grid().num_nodes();
  require(static_cast<long>(st.vm.size()) == n,
          "diffusion: state does not match the solver grid");
  const double kappa = bidomain_kappa(dt, p);
  require(std::abs(solver.params().kappa - kappa) <= 1e-9 * kappa,
          "diffusion: solver was built for a different step size");

  FieldPair f = bidomain_forcing(st.vm, kappa, p, stim_current);
  auto sol = solver.solve_neumann_bvp(f, Density(solver.nodes()), opt);
  for (long k = 0; k < n; ++k)
    st.vm[k] = 2.0 * (sol.u.i[k] - sol.u.e[k]) - st.vm[k];
  st.t += dt;
  return std::move(sol.report);
}

BieReport strang_step(BidomainState& st, double dt, BieSolver& solver,
                      const FhnParams& p,
                      const std::vector<double>& stim_current,
                      const BieOptions& opt, const ReactionControls& rc) {
  reaction_forward(st, 0.5 * dt, p);
  BieReport rep = diffusion_step(st, dt, solver, p, stim_current, opt);
  reaction_backward(st, 0.5 * dt, p, rc);
  return rep;
}

std::vector<double> build_stimulus(const StimulusConfig& cfg,
                                   const CartesianGrid& grid) {
  require(cfg.radius > 0.0, "stimulus: electrode radius must be positive");
  require(norm(cfg.anode - cfg.cathode) > 2.0 * cfg.radius,
          "stimulus: anode and cathode balls overlap");
  std::vector<double> f(grid.num_nodes(), 0.0);
  for (long k = 0; k < grid.num_nodes(); ++k) {
    const Vec3 x = grid.node(grid.unindex(k));
    if (norm(x - cfg.anode) < cfg.radius) f[k] = cfg.amplitude;
    else if (norm(x - cfg.cathode) < cfg.radius) f[k] = -cfg.amplitude;
  }
  return f;
}

void paint_ball(std::vector<double>& field, const CartesianGrid& grid,
                const StimulusConfig::Ball& ball, bool additive) {
  require(static_cast<long>(field.size()) == grid.num_nodes(),
          "stimulus: field does not match the grid");
  if (ball.radius <= 0.0) return;
  for (long k = 0; k < grid.num_nodes(); ++k) {
    const Vec3 x = grid.node(grid.unindex(k));
    if (norm(x - ball.center) < ball.radius)
      field[k] = additive ? field[k] + ball.value : ball.value;
  }
}

}  // namespace kfbi
