#pragma once

#include <unordered_map>
#include <vector>

#include "kfbi/geometry.hpp"
#include "kfbi/grid.hpp"

namespace kfbi {

// One transversal crossing of the boundary with a grid arm (the segment
// between two axis-adjacent nodes). offset = crossing position minus base-node
// position along the axis, in [0, h); the value h occurs only in the
// degenerate case of a boundary passing through a grid node, where the
// crossing attaches to whichever adjacent arm has its far end on the other
// side. Tangential touches of a grid line have even contact order and
// register no crossing at all.
struct Intersection {
  int axis = 0;
  Index3 base{};        // lower node of the arm
  double offset = 0.0;
  Vec3 position{};
  BoundaryFrame frame;
  double curve_param = 0.0;          // 2D interpolation handle
  int triangle = -1;                 // 3D interpolation handle ...
  double b1 = 0.0, b2 = 0.0;         // ... with barycentric coordinates
};

// Grid-embedded boundary: inside/irregular node masks plus the intersection
// registry, mutually consistent by construction (an arm crosses the boundary
// exactly once if and only if its end nodes lie on opposite sides).
struct Embedding {
  CartesianGrid grid;
  std::vector<uint8_t> inside;     // per node
  std::vector<uint8_t> irregular;  // per node: at least one arm is crossed
  std::vector<Intersection> cuts;
  long inside_count = 0;
  // grazing slivers thinner than one arm (both endpoints on the same side):
  // registered nowhere, counted for diagnostics
  long dropped_slivers = 0;

  explicit Embedding(const CartesianGrid& g) : grid(g) {}

  // index into cuts for the arm with the given lower node, or -1
  int cut_on_arm(int axis, long base_linear) const {
    auto it = arm_map_.find(axis * grid.num_nodes() + base_linear);
    return it == arm_map_.end() ? -1 : it->second;
  }

  std::unordered_map<long, int> arm_map_;
};

// Requires a boundary clearance of at least 2h from the box faces so that
// correction and extraction stencils never leave the grid.
Embedding build_embedding(const BoundaryGeometry& geometry, const CartesianGrid& grid);

// Curve parameters of all crossings with the line {coordinate[coord] == value},
// each refined by bisection on the spline to ~1e-13 of the local scale.
std::vector<double> curve_line_roots(const BoundaryCurve& curve, int coord, double value);

}  // namespace kfbi
