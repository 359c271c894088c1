#include "kfbi/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace kfbi {
namespace {

using nlohmann::json;

Vec3 parse_point(const json& j, int dim, const std::string& key) {
  require(j.is_array() && (j.size() == static_cast<size_t>(dim) || j.size() == 3),
          "config: " + key + " must be an array of " + std::to_string(dim) + " numbers");
  Vec3 p{0.0, 0.0, 0.0};
  for (size_t d = 0; d < j.size(); ++d) {
    require(j[d].is_number(), "config: " + key + " must contain numbers");
    p[d] = j[d].get<double>();
  }
  if (dim == 2) require(p[2] == 0.0, "config: " + key + " has a nonzero third entry in 2D");
  return p;
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    require(known.count(it.key()) > 0, "config: unknown key \"" + it.key() + "\" in " + where);
}

double number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  require(j[key].is_number(), "config: " + key + " must be a number");
  return j[key].get<double>();
}

int integer(const json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  require(j[key].is_number_integer(), "config: " + key + " must be an integer");
  return j[key].get<int>();
}

StimulusConfig::Ball parse_ball(const json& j, int dim, const std::string& where) {
  reject_unknown(j, {"center", "radius", "value", "time"}, where);
  StimulusConfig::Ball b;
  require(j.contains("center") && j.contains("radius"), "config: " + where + " needs center and radius");
  b.center = parse_point(j["center"], dim, where + ".center");
  b.radius = number(j, "radius", 0.0);
  b.value = number(j, "value", 1.0);
  require(b.radius > 0.0, "config: " + where + ".radius must be positive");
  return b;
}

}  // namespace

double RunConfig::step_size() const {
  if (dt > 0.0) return dt;
  return (box_high[0] - box_low[0]) / cells;
}

int RunConfig::step_count() const {
  const double d = step_size();
  const long n = std::lround(t_end / d);
  require(n >= 1 && std::abs(n * d - t_end) <= 1e-9 * std::max(1.0, t_end),
          "config: t_end must be a whole number of steps of size dt");
  return static_cast<int>(n);
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& ex) {
    throw Error(std::string("config: not valid JSON: ") + ex.what());
  }
  require(j.is_object(), "config: top level must be an object");
  reject_unknown(j,
                 {"dimension", "shape", "mesh", "boundary_nodes", "box", "cells", "dt", "t_end",
                  "method", "gamma", "bie_tol", "bie_max_iter", "newton_tol", "newton_max",
                  "conductivity", "fhn", "stimulus", "probes", "snapshots", "output_dir",
                  "pin_extracellular_mean"},
                 "config");

  RunConfig cfg;
  cfg.dimension = integer(j, "dimension", 2);
  require(cfg.dimension == 2 || cfg.dimension == 3, "config: dimension must be 2 or 3");
  const int dim = cfg.dimension;

  if (j.contains("shape")) cfg.shape = j["shape"].get<std::string>();
  if (dim == 2) {
    require(cfg.shape == "circle" || cfg.shape == "heart", "config: 2D shape must be circle or heart");
  } else {
    cfg.shape = j.contains("shape") ? cfg.shape : "sphere";
    require(cfg.shape == "sphere" || cfg.shape == "off", "config: 3D shape must be sphere or off");
  }
  if (j.contains("mesh")) cfg.mesh_path = j["mesh"].get<std::string>();
  if (cfg.shape == "off")
    require(!cfg.mesh_path.empty(), "config: shape \"off\" needs a mesh path");
  cfg.boundary_nodes = integer(j, "boundary_nodes", 0);

  if (j.contains("box")) {
    const json& b = j["box"];
    reject_unknown(b, {"low", "high"}, "box");
    require(b.contains("low") && b.contains("high"), "config: box needs low and high");
    cfg.box_low = parse_point(b["low"], dim, "box.low");
    cfg.box_high = parse_point(b["high"], dim, "box.high");
  } else if (dim == 2) {
    cfg.box_low[2] = cfg.box_high[2] = 0.0;
  }
  for (int d = 0; d < dim; ++d)
    require(cfg.box_high[d] > cfg.box_low[d], "config: box must have positive extent");

  cfg.cells = integer(j, "cells", 64);
  cfg.dt = number(j, "dt", 0.0);
  require(cfg.dt >= 0.0, "config: dt must be nonnegative");
  cfg.t_end = number(j, "t_end", 0.5);
  require(cfg.t_end > 0.0, "config: t_end must be positive");

  if (j.contains("method")) cfg.method = j["method"].get<std::string>();
  require(cfg.method == "gmres" || cfg.method == "richardson",
          "config: method must be gmres or richardson");
  cfg.gamma = number(j, "gamma", 0.8);
  require(cfg.gamma > 0.0 && cfg.gamma < 1.0, "config: gamma must lie in (0,1)");
  cfg.bie_tol = number(j, "bie_tol", 1e-8);
  cfg.bie_max_iter = integer(j, "bie_max_iter", 200);
  cfg.newton_tol = number(j, "newton_tol", 1e-10);
  cfg.newton_max = integer(j, "newton_max", 50);
  require(cfg.bie_tol > 0.0 && cfg.newton_tol > 0.0, "config: tolerances must be positive");
  require(cfg.bie_max_iter >= 1 && cfg.newton_max >= 1, "config: iteration caps must be positive");

  if (dim == 2) {
    cfg.intra = {30.0, 5.0, 0.0};
    cfg.extra = {20.0, 10.0, 0.0};
  }
  if (j.contains("conductivity")) {
    const json& c = j["conductivity"];
    reject_unknown(c, {"intra", "extra"}, "conductivity");
    if (c.contains("intra")) cfg.intra = parse_point(c["intra"], dim, "conductivity.intra");
    if (c.contains("extra")) cfg.extra = parse_point(c["extra"], dim, "conductivity.extra");
    for (int d = 0; d < dim; ++d)
      require(cfg.intra[d] > 0.0 && cfg.extra[d] > 0.0, "config: conductivities must be positive");
  }

  if (j.contains("fhn")) {
    const json& f = j["fhn"];
    reject_unknown(f, {"H", "theta", "alpha", "zeta", "Cm", "beta"}, "fhn");
    cfg.fhn.H = number(f, "H", cfg.fhn.H);
    cfg.fhn.theta = number(f, "theta", cfg.fhn.theta);
    cfg.fhn.alpha = number(f, "alpha", cfg.fhn.alpha);
    cfg.fhn.zeta = number(f, "zeta", cfg.fhn.zeta);
    cfg.fhn.Cm = number(f, "Cm", cfg.fhn.Cm);
    cfg.fhn.beta = number(f, "beta", cfg.fhn.beta);
    require(cfg.fhn.Cm > 0.0 && cfg.fhn.beta > 0.0, "config: Cm and beta must be positive");
  }

  if (j.contains("stimulus")) {
    const json& s = j["stimulus"];
    reject_unknown(s, {"enabled", "anode", "cathode", "radius", "amplitude", "initial", "timed"},
                   "stimulus");
    if (s.contains("enabled")) {
      require(s["enabled"].is_boolean(), "config: stimulus.enabled must be a boolean");
      cfg.stimulate = s["enabled"].get<bool>();
    }
    if (s.contains("anode")) cfg.stimulus.anode = parse_point(s["anode"], dim, "stimulus.anode");
    if (s.contains("cathode"))
      cfg.stimulus.cathode = parse_point(s["cathode"], dim, "stimulus.cathode");
    cfg.stimulus.radius = number(s, "radius", cfg.stimulus.radius);
    cfg.stimulus.amplitude = number(s, "amplitude", cfg.stimulus.amplitude);
    if (s.contains("initial")) cfg.stimulus.initial = parse_ball(s["initial"], dim, "stimulus.initial");
    if (s.contains("timed")) {
      cfg.stimulus.timed = parse_ball(s["timed"], dim, "stimulus.timed");
      require(s["timed"].contains("time"), "config: stimulus.timed needs a time");
      cfg.stimulus.timed_at = number(s["timed"], "time", -1.0);
      require(cfg.stimulus.timed_at >= 0.0, "config: stimulus.timed time must be nonnegative");
    }
  }

  if (j.contains("probes")) {
    require(j["probes"].is_array(), "config: probes must be an array of points");
    for (size_t p = 0; p < j["probes"].size(); ++p)
      cfg.probes.push_back(parse_point(j["probes"][p], dim, "probes[" + std::to_string(p) + "]"));
  }
  if (j.contains("snapshots")) {
    require(j["snapshots"].is_array(), "config: snapshots must be an array of times");
    for (const auto& t : j["snapshots"]) {
      require(t.is_number(), "config: snapshot times must be numbers");
      cfg.snapshot_times.push_back(t.get<double>());
    }
  }
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("pin_extracellular_mean")) {
    require(j["pin_extracellular_mean"].is_boolean(),
            "config: pin_extracellular_mean must be a boolean");
    cfg.pin_extracellular_mean = j["pin_extracellular_mean"].get<bool>();
  }

  // Exercise the step arithmetic so bad dt/t_end pairs fail at load time.
  cfg.step_count();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string describe_config(const RunConfig& cfg) {
  std::ostringstream out;
  const int dim = cfg.dimension;
  auto point = [&](const Vec3& p) {
    std::ostringstream s;
    s << "(" << p[0] << ", " << p[1];
    if (dim == 3) s << ", " << p[2];
    s << ")";
    return s.str();
  };
  out << "dimension            " << dim << "\n";
  out << "domain               " << cfg.shape;
  if (cfg.shape == "off") out << " [" << cfg.mesh_path << "]";
  if (cfg.boundary_nodes > 0) out << ", " << cfg.boundary_nodes << " boundary nodes";
  out << "\n";
  out << "box                  " << point(cfg.box_low) << " to " << point(cfg.box_high) << "\n";
  out << "grid                 " << cfg.cells << " cells per axis, h = "
      << (cfg.box_high[0] - cfg.box_low[0]) / cfg.cells << "\n";
  out << "dt                   " << cfg.step_size() << (cfg.dt > 0.0 ? "" : " (grid spacing)") << "\n";
  out << "t_end                " << cfg.t_end << " (" << cfg.step_count() << " steps)\n";
  out << "method               " << cfg.method;
  if (cfg.method == "richardson") out << ", gamma = " << cfg.gamma;
  out << "\n";
  out << "bie tolerance        " << cfg.bie_tol << " (max " << cfg.bie_max_iter << " iterations)\n";
  out << "newton tolerance     " << cfg.newton_tol << " (max " << cfg.newton_max << ")\n";
  out << "conductivity intra   " << point(cfg.intra) << "\n";
  out << "conductivity extra   " << point(cfg.extra) << "\n";
  out << "fhn                  H = " << cfg.fhn.H << ", theta = " << cfg.fhn.theta
      << ", alpha = " << cfg.fhn.alpha << ", zeta = " << cfg.fhn.zeta << ", Cm = " << cfg.fhn.Cm
      << ", beta = " << cfg.fhn.beta << "\n";
  if (cfg.stimulate)
    out << "electrodes           anode " << point(cfg.stimulus.anode) << ", cathode "
        << point(cfg.stimulus.cathode) << ", radius " << cfg.stimulus.radius << ", amplitude "
        << cfg.stimulus.amplitude << "\n";
  else
    out << "electrodes           off\n";
  if (cfg.stimulus.initial.radius > 0.0)
    out << "initial bump         ball at " << point(cfg.stimulus.initial.center) << ", radius "
        << cfg.stimulus.initial.radius << ", value " << cfg.stimulus.initial.value << "\n";
  if (cfg.stimulus.timed_at >= 0.0)
    out << "timed bump           t = " << cfg.stimulus.timed_at << ", ball at "
        << point(cfg.stimulus.timed.center) << ", radius " << cfg.stimulus.timed.radius
        << ", value " << cfg.stimulus.timed.value << "\n";
  out << "probes               " << cfg.probes.size() << "\n";
  out << "snapshots            " << cfg.snapshot_times.size() << "\n";
  out << "output               " << cfg.output_dir << "\n";
  if (cfg.pin_extracellular_mean) out << "output shift         extracellular mean pinned to zero\n";
  return out.str();
}

}  // namespace kfbi
