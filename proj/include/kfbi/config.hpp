#pragma once

#include <string>
#include <vector>

#include "kfbi/bidomain.hpp"
#include "kfbi/core.hpp"

namespace kfbi {

// Everything a run needs, with the reference parameter set as defaults.
// Parsed from JSON; every key is optional.
struct RunConfig {
  int dimension = 2;
  std::string shape = "circle";  // circle | heart | sphere | off
  std::string mesh_path;         // OFF file when shape == "off"
  int boundary_nodes = 0;        // preset node count; 0 picks one to match the grid

  Vec3 box_low{-1.0, -1.0, -1.0};
  Vec3 box_high{1.0, 1.0, 1.0};
  int cells = 64;

  double dt = 0.0;  // 0: use the grid spacing
  double t_end = 0.5;

  std::string method = "gmres";  // gmres | richardson
  double gamma = 0.8;
  double bie_tol = 1e-8;
  int bie_max_iter = 200;
  double newton_tol = 1e-10;
  int newton_max = 50;

  Vec3 intra{30.0, 5.0, 5.0};
  Vec3 extra{20.0, 10.0, 10.0};
  FhnParams fhn;

  bool stimulate = true;
  StimulusConfig stimulus;

  std::vector<Vec3> probes;
  std::vector<double> snapshot_times;
  std::string output_dir = "out";
  bool pin_extracellular_mean = false;

  double step_size() const;  // dt, defaulted to the grid spacing
  int step_count() const;    // t_end / dt, validated to be whole
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

// Resolved-parameter dump for the `info` command.
std::string describe_config(const RunConfig& cfg);

}  // namespace kfbi
