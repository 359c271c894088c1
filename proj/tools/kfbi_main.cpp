#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kfbi/io.hpp"
#include "kfbi/runner.hpp"

namespace {

int do_run(const kfbi::RunConfig& cfg) {
  const kfbi::RunResult res = kfbi::run_simulation(cfg);
  std::cout << "domain nodes      " << res.boundary_nodes << "\n";
  std::cout << "inside grid nodes " << res.inside_count << "\n";
  std::cout << "steps             " << res.steps.size() << " (t = " << res.state.t << ")\n";
  std::cout << "mean iterations   " << res.mean_iterations << "\n";
  std::cout << "wall seconds      " << res.wall_seconds << "\n";
  if (!cfg.output_dir.empty()) std::cout << "output            " << cfg.output_dir << "\n";
  return 0;
}

int do_converge(const kfbi::RunConfig& cfg, const std::vector<int>& grids, int reference) {
  const kfbi::ConvergenceStudy study = kfbi::convergence_study(cfg, grids, reference);
  std::cout << study.csv;
  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    const auto path = std::filesystem::path(cfg.output_dir) / "convergence.csv";
    std::ofstream out(path, std::ios::binary);
    out << study.csv;
    kfbi::require(out.good(), "converge: cannot write " + path.string());
    std::cerr << "wrote " << path.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bidomain cardiac tissue simulation on a Cartesian grid"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<int> grids{64, 128, 256};
  int reference = 512;

  CLI::App* run = app.add_subcommand("run", "integrate the model defined by a config");
  run->add_option("--config", config_path, "JSON config file")->required();

  CLI::App* conv = app.add_subcommand("converge", "grid refinement study against a fine reference");
  conv->add_option("--config", config_path, "JSON config file")->required();
  conv->add_option("--grids", grids, "comma separated cell counts")->delimiter(',');
  conv->add_option("--reference", reference, "reference cell count");

  CLI::App* info = app.add_subcommand("info", "print the resolved configuration");
  info->add_option("--config", config_path, "JSON config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const kfbi::RunConfig cfg = kfbi::load_config(config_path);
    if (run->parsed()) return do_run(cfg);
    if (conv->parsed()) return do_converge(cfg, grids, reference);
    std::cout << kfbi::describe_config(cfg);
    return 0;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
