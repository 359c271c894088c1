#pragma once

#include <string>
#include <vector>

#include "kfbi/core.hpp"
#include "kfbi/embedding.hpp"
#include "kfbi/extraction.hpp"
#include "kfbi/fft_elliptic.hpp"
#include "kfbi/geometry.hpp"
#include "kfbi/grid.hpp"
#include "kfbi/jumps.hpp"

namespace kfbi {

enum class BieMethod { richardson, gmres };

struct BieReport {
  BieMethod method = BieMethod::richardson;
  int iterations = 0;
  double final_residual = 0.0;   // relative, scaled l2, recomputed from the held density
  std::vector<double> history;   // relative residual after each iteration
};

// Non-convergence carries the full iteration history.
class BieDivergence : public Error {
 public:
  BieDivergence(const std::string& what, BieReport r)
      : Error(what), report(std::move(r)) {}
  BieReport report;
};

// Scaled l2 over the stacked (psi_i, psi_e) components.
double density_norm(const Density& d);

struct BieOptions {
  BieMethod method = BieMethod::gmres;
  double gamma = 0.8;  // richardson damping; iteration is psi += 2*gamma*(g - A psi)
  double tol = 1e-8;   // relative residual
  int max_iter = 200;
};

// Boundary-integral solver for the coupled Neumann problem on one
// (geometry, grid, coefficients) triple: owns the embedding, the extraction
// plan and the grid solver, and evaluates the boundary operator A by solving
// interface problems on the grid -- no Green's function is ever formed.
class BieSolver {
 public:
  BieSolver(const BoundaryGeometry& geo, const CartesianGrid& grid,
            const DiffusionParams& params);

  const BoundaryGeometry& geometry() const { return geo_; }
  const CartesianGrid& grid() const { return grid_; }
  const Embedding& embedding() const { return emb_; }
  const ExtractionPlan& plan() const { return plan_; }
  const DiffusionParams& params() const { return params_; }
  int nodes() const { return geo_.num_nodes(); }

  struct Volume {
    FieldPair field;
    Density conormal;
  };
  // Grid solve of the continuously extended f (no interface, no corrections)
  // plus its interior conormal derivative at the boundary nodes.
  Volume volume_potential(const FieldPair& f);

  struct Applied {
    Density a_psi;
    FieldPair field;
  };
  // Single-layer action: density -> derivative jumps -> corrected homogeneous
  // grid solve -> interior conormal limits.  a_psi is the boundary operator
  // applied to psi; field is the layer potential itself.
  Applied apply_A(const Density& psi);

  static Density assemble_g(const Density& gn, const Density& volume_conormal);

  struct Iterate {
    Density psi;
    FieldPair field;  // layer potential of the converged density
    BieReport report;
  };
  Iterate richardson_solve(const Density& g, double gamma = 0.8, double tol = 1e-8,
                           int max_iter = 200);
  Iterate gmres_solve(const Density& g, double tol = 1e-8, int max_iter = 200);

  struct Solution {
    FieldPair u;  // volume + layer field on all grid nodes
    Density psi;
    BieReport report;
  };
  // Interior Neumann problem L u = f in Omega, n.D grad u = gn on the
  // boundary.  Exterior nodes of u hold the smooth extension.
  Solution solve_neumann_bvp(const FieldPair& f, const Density& gn,
                             const BieOptions& opt = {});

 private:
  BoundaryGeometry geo_;
  CartesianGrid grid_;
  DiffusionParams params_;
  Embedding emb_;
  ExtractionPlan plan_;
  FftEllipticSolver fft_;
  JumpTable zero_jumps_;

  Density extract_conormal(const FieldPair& field, const JumpTable& node_jumps);
};

}  // namespace kfbi
