#include "kfbi/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <sstream>

#include "kfbi/io.hpp"

namespace kfbi {

namespace {

constexpr double kErrorFloor = 1e-14;  // below this an error is roundoff, not signal

// KFBI_THREADS caps the worker count. Every kernel here is sequential, so any
// valid value is honored; the parse still rejects garbage early.
int thread_cap() {
  const char* env = std::getenv("KFBI_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  require(end != env && *end == '\0' && v >= 1,
          "KFBI_THREADS must be a positive integer");
  return 1;
}

double wall_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

double scaled_l2_norm(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += x * x;
  return std::sqrt(ss / static_cast<double>(v.size()));
}

double convergence_order(double e1, double e2, double h1, double h2) {
  require(e1 > 0.0 && e2 > 0.0, "order: errors must be positive");
  require(h1 > h2 && h2 > 0.0, "order: spacings must satisfy h1 > h2 > 0");
  return std::log(e1 / e2) / std::log(h1 / h2);
}

int boundary_nodes_for(const RunConfig& cfg, int cells) {
  if (cfg.shape == "off") return 0;  // fixed by the mesh file
  if (cfg.boundary_nodes > 0) return cfg.boundary_nodes;
  if (cfg.dimension == 2) return cells;
  // sphere subdivisions hold 16 * 4^l + 2 vertices; pick the first with at
  // least cells^2 so the surface resolution tracks the grid
  long m = 18;
  const long want = static_cast<long>(cells) * cells;
  while (m < want) m = (m - 2) * 4 + 2;
  return static_cast<int>(m);
}

BoundaryGeometry make_geometry(const RunConfig& cfg, int cells) {
  if (cfg.shape == "off") return BoundaryGeometry(read_off(cfg.mesh_path));
  return preset_shape(cfg.shape, boundary_nodes_for(cfg, cells));
}

RunResult run_simulation(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  thread_cap();

  const CartesianGrid grid(cfg.dimension, cfg.cells, cfg.box_low, cfg.box_high);
  const BoundaryGeometry geometry = make_geometry(cfg, cfg.cells);
  require(geometry.dim() == cfg.dimension, "run: mesh dimension does not match the config");

  const double dt = cfg.step_size();
  const int steps = cfg.step_count();
  const DiffusionParams params{cfg.intra, cfg.extra, bidomain_kappa(dt, cfg.fhn)};
  BieSolver solver(geometry, grid, params);
  const BieOptions opt{cfg.method == "gmres" ? BieMethod::gmres : BieMethod::richardson,
                       cfg.gamma, cfg.bie_tol, cfg.bie_max_iter};
  const ReactionControls rc{cfg.newton_tol, cfg.newton_max};

  const std::vector<double> stim =
      cfg.stimulate ? build_stimulus(cfg.stimulus, grid) : std::vector<double>();

  for (size_t p = 0; p < cfg.probes.size(); ++p) {
    std::ostringstream msg;
    msg << "run: probe " << p + 1 << " lies outside the domain";
    require(geometry.contains(cfg.probes[p]), msg.str());
  }
  std::vector<double> snaps = cfg.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  for (double s : snaps)
    require(s >= 0.0 && s <= cfg.t_end + 1e-12, "run: snapshot times must lie in [0, t_end]");

  const bool writing = !cfg.output_dir.empty();
  if (writing) std::filesystem::create_directories(cfg.output_dir);
  const auto out_path = [&](const std::string& name) {
    return (std::filesystem::path(cfg.output_dir) / name).string();
  };

  BidomainState st(grid.num_nodes());
  if (cfg.stimulus.initial.radius > 0.0)
    paint_ball(st.vm, grid, cfg.stimulus.initial, /*additive=*/false);

  // potentials consistent with the current V: the pair the half-step
  // diffusion system produces for it (what the scheme itself works with)
  const auto potentials = [&](const BidomainState& s) {
    const FieldPair f = bidomain_forcing(s.vm, params.kappa, cfg.fhn, stim);
    return solver.solve_neumann_bvp(f, Density(solver.nodes()), opt).u;
  };
  size_t next_snap = 0;
  const auto flush_snapshots = [&]() {
    while (writing && next_snap < snaps.size() &&
           snaps[next_snap] <= st.t + 1e-9 * std::max(1.0, st.t)) {
      std::ostringstream name;
      name << "snapshot_" << next_snap << ".vtk";
      write_snapshot(out_path(name.str()), grid, solver.embedding().inside, st, potentials(st),
                     cfg.pin_extracellular_mean);
      ++next_snap;
    }
  };

  std::vector<std::vector<double>> probe_rows;
  const auto record_probes = [&]() {
    if (cfg.probes.empty()) return;
    std::vector<double> row{st.t};
    for (const Vec3& p : cfg.probes) row.push_back(sample_linear(grid, st.vm, p));
    probe_rows.push_back(std::move(row));
  };

  record_probes();
  flush_snapshots();

  RunResult res;
  res.cells = cfg.cells;
  res.boundary_nodes = geometry.num_nodes();
  res.inside = solver.embedding().inside;
  res.inside_count = solver.embedding().inside_count;

  bool timed_done = cfg.stimulus.timed_at < 0.0;
  long iter_sum = 0;
  for (int s = 1; s <= steps; ++s) {
    try {
      if (!timed_done && st.t >= cfg.stimulus.timed_at - 1e-12) {
        paint_ball(st.vm, grid, cfg.stimulus.timed, /*additive=*/true);
        timed_done = true;
      }
      const BieReport rep = strang_step(st, dt, solver, cfg.fhn, stim, opt, rc);
      res.steps.push_back({s, st.t, rep.iterations, rep.final_residual});
      iter_sum += rep.iterations;
    } catch (const std::exception& ex) {
      std::ostringstream msg;
      msg << "run: step " << s << " (t = " << st.t << ") failed: " << ex.what();
      if (writing) {
        write_snapshot(out_path("abort_state.vtk"), grid, solver.embedding().inside, st,
                       FieldPair(grid.num_nodes()), false);
        msg << " [state written to " << out_path("abort_state.vtk") << "]";
      }
      throw Error(msg.str());
    }
    record_probes();
    flush_snapshots();
  }

  if (writing) {
    if (!cfg.probes.empty()) {
      std::vector<std::string> header{"t"};
      for (size_t p = 0; p < cfg.probes.size(); ++p) header.push_back("p" + std::to_string(p + 1));
      write_csv(out_path("probes.csv"), header, probe_rows);
    }
    std::vector<std::vector<double>> iter_rows;
    for (const StepRecord& r : res.steps)
      iter_rows.push_back({double(r.step), r.t, double(r.iterations), r.residual});
    write_csv(out_path("iterations.csv"), {"step", "t", "iterations", "residual"}, iter_rows);
  }

  res.state = std::move(st);
  res.mean_iterations = steps > 0 ? double(iter_sum) / steps : 0.0;
  res.wall_seconds = wall_since(t0);
  return res;
}

ConvergenceStudy convergence_study(const RunConfig& base, const std::vector<int>& grids,
                                   int reference_cells) {
  require(!grids.empty(), "study: need at least one grid");
  for (size_t k = 0; k < grids.size(); ++k) {
    require(grids[k] >= 8, "study: grids must have at least 8 cells");
    require(k == 0 || grids[k] > grids[k - 1], "study: grids must be strictly increasing");
    require(reference_cells >= grids[k] && reference_cells % grids[k] == 0,
            "study: every grid must divide the reference grid");
  }

  RunConfig cfg = base;
  cfg.dt = 0.0;  // dt = h on every grid, reference included
  cfg.boundary_nodes = 0;
  cfg.probes.clear();
  cfg.snapshot_times.clear();
  cfg.output_dir.clear();

  cfg.cells = reference_cells;
  const RunResult ref = run_simulation(cfg);
  const CartesianGrid ref_grid(cfg.dimension, reference_cells, cfg.box_low, cfg.box_high);

  ConvergenceStudy study;
  study.reference_cells = reference_cells;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (int g : grids) {
    cfg.cells = g;
    const RunResult run = g == reference_cells ? ref : run_simulation(cfg);
    const CartesianGrid grid(cfg.dimension, g, cfg.box_low, cfg.box_high);
    const int ratio = reference_cells / g;

    std::vector<double> err;
    const int npa = grid.nodes_per_axis();
    const int mz = cfg.dimension == 3 ? npa : 1;
    for (int m = 0; m < mz; ++m)
      for (int l = 0; l < npa; ++l)
        for (int k = 0; k < npa; ++k) {
          const long id = grid.index(k, l, m);
          if (!run.inside[id]) continue;
          err.push_back(run.state.vm[id] -
                        ref.state.vm[ref_grid.index(ratio * k, ratio * l, ratio * m)]);
        }
    require(!err.empty(), "study: no inside nodes on the coarse grid");

    ConvergenceRow row;
    row.boundary_nodes = run.boundary_nodes;
    row.cells = g;
    row.e_l2 = scaled_l2_norm(err);
    row.e_inf = 0.0;
    for (double e : err) row.e_inf = std::max(row.e_inf, std::abs(e));
    row.rho_l2 = row.rho_inf = nan;
    if (!study.rows.empty()) {
      const ConvergenceRow& prev = study.rows.back();
      const double h1 = (cfg.box_high[0] - cfg.box_low[0]) / prev.cells;
      const double h2 = (cfg.box_high[0] - cfg.box_low[0]) / g;
      // a comparison against an identical run is exact; report no order then
      if (prev.e_l2 > kErrorFloor && row.e_l2 > kErrorFloor)
        row.rho_l2 = convergence_order(prev.e_l2, row.e_l2, h1, h2);
      if (prev.e_inf > kErrorFloor && row.e_inf > kErrorFloor)
        row.rho_inf = convergence_order(prev.e_inf, row.e_inf, h1, h2);
    }
    row.mean_iterations = run.mean_iterations;
    row.cpu_seconds = run.wall_seconds;
    study.rows.push_back(row);
  }

  std::string csv =
      csv_line({"M", "I", "e_l2", "rho_l2", "e_inf", "rho_inf", "iterations", "cpu_s"});
  for (const ConvergenceRow& r : study.rows) {
    csv += csv_line({format_number(r.boundary_nodes), format_number(r.cells),
                     format_number(r.e_l2), format_number(r.rho_l2), format_number(r.e_inf),
                     format_number(r.rho_inf), format_number(r.mean_iterations),
                     format_number(r.cpu_seconds)});
  }
  study.csv = csv;
  return study;
}

}  // namespace kfbi
