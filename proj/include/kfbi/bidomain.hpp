#pragma once

#include <vector>

#include "kfbi/bie.hpp"
#include "kfbi/core.hpp"
#include "kfbi/grid.hpp"

namespace kfbi {

// FitzHugh-Nagumo membrane model and tissue constants.
//   I_ion(V,q) = H (q - V (V - theta)(1 - V)),   dq/dt = alpha V - zeta q
struct FhnParams {
  double H = 100.0;
  double theta = 0.25;
  double alpha = 0.25;
  double zeta = 1.0;
  double Cm = 1.0;      // membrane capacitance per unit area
  double beta = 1000.0;  // membrane surface per unit volume
};

struct Currents {
  double ion = 0.0;  // I_ion
  double dq = 0.0;   // recovery rate
};
Currents fhn_currents(double v, double q, const FhnParams& p);

// Transmembrane potential and recovery variable on ALL grid nodes of the box
// (the exterior values carry the smooth extension the diffusion solve needs).
struct BidomainState {
  std::vector<double> vm, q;
  double t = 0.0;

  BidomainState() = default;
  explicit BidomainState(long n) : vm(n, 0.0), q(n, 0.0) {}
};

struct ReactionControls {
  double newton_tol = 1e-10;  // absolute, on the nodal residual
  int newton_max = 50;
};

// Half-step reaction, forward Euler on every node.
void reaction_forward(BidomainState& st, double dt_half, const FhnParams& p);

// Half-step reaction, backward Euler: q is linear in the implicit equations
// and eliminated analytically, leaving one scalar Newton solve per node
// (bisection fallback on [V*-2, V*+2] if the derivative degenerates).
void reaction_backward(BidomainState& st, double dt_half, const FhnParams& p,
                       const ReactionControls& rc = {});

// Coupling coefficient of the half-step backward-Euler diffusion solve.
double bidomain_kappa(double dt, const FhnParams& p);

// Right-hand side of the half-step diffusion solve for a given V field:
// (-kappa V, kappa V - beta I_stim) on every node.
FieldPair bidomain_forcing(const std::vector<double>& vm, double kappa, const FhnParams& p,
                           const std::vector<double>& stim_current);

// Full-step diffusion via the implicit midpoint rewrite: one backward-Euler
// half-solve w of the coupled system, then V <- 2 (w_i - w_e) - V.
// stim_current is the static I_stim field (empty means zero); the solver must
// have been built with kappa = bidomain_kappa(dt, p).
BieReport diffusion_step(BidomainState& st, double dt, BieSolver& solver,
                         const FhnParams& p,
                         const std::vector<double>& stim_current,
                         const BieOptions& opt = {});

// Strang composition: reaction half step, diffusion full step, reaction half
// step.  Returns the diffusion solve's report.
BieReport strang_step(BidomainState& st, double dt, BieSolver& solver,
                      const FhnParams& p,
                      const std::vector<double>& stim_current,
                      const BieOptions& opt = {},
                      const ReactionControls& rc = {});

// Virtual electrode pair plus the optional initial and timed V-balls.
struct StimulusConfig {
  struct Ball {
    Vec3 center{};
    double radius = 0.0;
    double value = 0.0;
  };

  Vec3 anode{0.3, 0.0, 0.0};     // I_stim = +amplitude inside
  Vec3 cathode{-0.3, 0.0, 0.0};  // I_stim = -amplitude inside
  double radius = 0.25;
  double amplitude = 10.0;

  Ball initial;            // painted onto V at t = 0 when radius > 0
  Ball timed;              // added to V once, at the first step with t >= timed_at
  double timed_at = -1.0;  // negative: no timed bump
};

// Static I_stim sampled at the grid nodes; fails on overlapping electrodes.
std::vector<double> build_stimulus(const StimulusConfig& cfg,
                                   const CartesianGrid& grid);

// Writes value into (additive=false) or adds it to (additive=true) the field
// at all nodes strictly inside the ball.
void paint_ball(std::vector<double>& field, const CartesianGrid& grid,
                const StimulusConfig::Ball& ball, bool additive);

}  // namespace kfbi
