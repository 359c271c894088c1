#pragma once

#include <map>

#include "kfbi/embedding.hpp"
#include "kfbi/fft_elliptic.hpp"
#include "kfbi/geometry.hpp"

namespace kfbi {

// Two-component value (intracellular, extracellular) per boundary node,
// ordered like the geometry's node sequence.
struct Density {
  std::vector<double> i, e;

  Density() = default;
  explicit Density(int m) : i(m, 0.0), e(m, 0.0) {}

  int size() const { return static_cast<int>(i.size()); }
};

// Jumps of one solution component across the boundary at one site, always as
// interior minus exterior. value holds [u]; it is identically zero for the
// fields produced here (volume and single-layer pieces are both continuous)
// but is kept explicit so the jump polynomial below reads literally.
struct ComponentJumps {
  double value = 0.0;
  Vec3 grad{};                    // [u_x], [u_y], [u_z]
  std::array<double, 6> hess{};   // [u_xx], [u_yy], [u_zz], [u_xy], [u_xz], [u_yz]
};

// J(delta) = [u] + [grad u]·delta + ½ delta·[hess u]·delta
double jump_polynomial(const ComponentJumps& j, const Vec3& delta);
// the same restricted to a single axis direction
double axis_jump_polynomial(const ComponentJumps& j, int axis, double delta);

struct JumpTable {
  std::vector<ComponentJumps> i, e;   // one record per site

  int size() const { return static_cast<int>(i.size()); }
};

// Ambient tangential-gradient vector of a nodal boundary field, one per node:
// 2D differentiates the periodic spline with respect to arclength and scales
// the unit tangent; 3D fits a linear function over each vertex neighborhood
// in the local frame.
std::vector<Vec3> density_surface_derivative(const std::vector<double>& values,
                                             const BoundaryGeometry& geometry);

// Derivative jumps of the single-layer field with density psi: the field is
// continuous across the boundary and its conormal derivative jumps by psi.
// Per component, first derivatives solve the frame system
//   n·D[grad u] = psi,  tau·[grad u] = 0 (each tangent),
// and second derivatives combine the operator identity
//   sigma [u_xx] + eta [u_yy] (+ zeta [u_zz]) = 0
// with tangential derivatives of the nodal first-jump fields (exact square
// system in 2D; least squares with the identity row weighted up in 3D).
// Evaluated either at the embedding's intersections (cut order) or at the
// geometry's own nodes.
JumpTable jumps_from_density(const Density& psi, const BoundaryGeometry& geometry,
                             const Embedding& embedding, const DiffusionParams& params);
JumpTable boundary_node_jumps(const Density& psi, const BoundaryGeometry& geometry,
                              const DiffusionParams& params);

// Right-hand-side increments that make the regular stencil consistent across
// the boundary: the arm through a cut at z contributes to both end nodes; the
// node on the interior side gains -(coef_axis/h²)·J(x' - z) with x' its
// neighbor beyond the cut, the node on the exterior side gains the same term
// with a plus sign (signed offsets, J restricted to the arm's axis).
struct CorrectionSet {
  std::map<long, std::array<double, 2>> rhs;   // node -> (i, e) increment

  void add_to(FieldPair& f) const;
};

CorrectionSet correction_set(const JumpTable& jumps_at_cuts, const Embedding& embedding,
                             const DiffusionParams& params);

}  // namespace kfbi
