#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "kfbi/curve2d.hpp"
#include "kfbi/trimesh.hpp"

namespace kfbi {

// Domain boundary: a spline curve in 2D or a triangle mesh in 3D. Boundary
// unknowns (layer densities, extracted limits) live on the discretization
// nodes: curve nodes respectively mesh vertices.
class BoundaryGeometry {
 public:
  explicit BoundaryGeometry(BoundaryCurve curve) : rep_(std::move(curve)) {}
  explicit BoundaryGeometry(TriMesh mesh) : rep_(std::move(mesh)) {}

  int dim() const { return std::holds_alternative<BoundaryCurve>(rep_) ? 2 : 3; }
  const BoundaryCurve& curve() const { return std::get<BoundaryCurve>(rep_); }
  const TriMesh& mesh() const { return std::get<TriMesh>(rep_); }

  int num_nodes() const;
  Vec3 node(int j) const;
  BoundaryFrame node_frame(int j) const;
  bool contains(const Vec3& p) const;

 private:
  std::variant<BoundaryCurve, TriMesh> rep_;
};

// Presets. The circle has M nodes at uniform angles with exactly mirrored
// y-coordinates; the heart places equal-arclength nodes pinned at its two
// cusps; the sphere is a subdivided octahedron projected to radius 0.8 and
// rotated by a fixed generic rotation so that no mesh edge lies in a grid
// plane. Valid sphere node counts follow the subdivision sequence
// 18, 66, 258, 1026, 4098, ...
BoundaryCurve preset_circle(int m, double radius = 0.8);
BoundaryCurve preset_heart(int m);
TriMesh preset_sphere(int m, double radius = 0.8);

// name in {"circle", "heart", "sphere"}
BoundaryGeometry preset_shape(const std::string& name, int m);

}  // namespace kfbi
