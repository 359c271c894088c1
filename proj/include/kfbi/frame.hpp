#pragma once

#include "kfbi/core.hpp"

namespace kfbi {

// Local orthonormal frame on the domain boundary. In 2D tangent2 is unused
// and curvature2 mirrors curvature1. Curvature is signed positive where the
// surface bends toward the interior (circle/sphere of radius R: +1/R).
struct BoundaryFrame {
  Vec3 position{};
  Vec3 normal{};    // unit, outward
  Vec3 tangent1{};  // unit
  Vec3 tangent2{};  // unit, 3D only
  double curvature1 = 0.0;
  double curvature2 = 0.0;
  bool degenerate = false;  // set when a smooth local fit was not available

  double mean_curvature() const { return 0.5 * (curvature1 + curvature2); }
};

}  // namespace kfbi
