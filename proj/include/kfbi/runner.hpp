#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kfbi/bidomain.hpp"
#include "kfbi/config.hpp"

namespace kfbi {

// Root-mean-square norm: sqrt(mean of squares). The grid-independent scaling
// used for all reported errors.
double scaled_l2_norm(const std::vector<double>& v);

// Observed order from two errors on grids with spacings h1 > h2:
//   log(e1/e2) / log(h1/h2)
double convergence_order(double e1, double e2, double h1, double h2);

// Boundary node count paired with an I-cell grid: the configured count when
// set, otherwise I in 2D and the sphere subdivision with roughly I^2 vertices
// in 3D (so the boundary resolution tracks the grid on refinement).
int boundary_nodes_for(const RunConfig& cfg, int cells);

BoundaryGeometry make_geometry(const RunConfig& cfg, int cells);

struct StepRecord {
  int step = 0;       // 1-based
  double t = 0.0;     // time after the step
  int iterations = 0;
  double residual = 0.0;
};

struct RunResult {
  BidomainState state;  // final
  std::vector<StepRecord> steps;
  double mean_iterations = 0.0;
  double wall_seconds = 0.0;
  int cells = 0;
  int boundary_nodes = 0;
  long inside_count = 0;
  std::vector<uint8_t> inside;  // per-node mask of the run's grid
};

// Full time integration per the config. With a nonempty output_dir writes
// probes.csv, iterations.csv and snapshot_<k>.vtk there; with an empty one
// produces no files. A failure mid-run serializes the current state next to
// the other outputs and rethrows with the step index attached.
RunResult run_simulation(const RunConfig& cfg);

struct ConvergenceRow {
  int boundary_nodes = 0;
  int cells = 0;
  double e_l2 = 0.0;
  double rho_l2 = 0.0;  // NaN when there is no coarser row or e is at floor
  double e_inf = 0.0;
  double rho_inf = 0.0;
  double mean_iterations = 0.0;
  double cpu_seconds = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  int reference_cells = 0;
  std::string csv;  // table layout: M,I,e_l2,rho_l2,e_inf,rho_inf,iterations,cpu_s
};

// Runs every grid plus the reference with dt = h and compares transmembrane
// potentials at the coarse grid's inside nodes against the nested reference
// nodes. Grids must divide the reference. Probes, snapshots and the output
// directory of the base config are ignored: the study never writes files.
ConvergenceStudy convergence_study(const RunConfig& base, const std::vector<int>& grids,
                                   int reference_cells);

}  // namespace kfbi
