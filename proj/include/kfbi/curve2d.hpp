#pragma once

#include <vector>

#include "kfbi/frame.hpp"
#include "kfbi/spline.hpp"

namespace kfbi {

// Closed C2 boundary curve: periodic cubic spline through quasi-uniform nodes,
// parametrized by t in [0,1) with node j at t_j = j/M. Orientation is
// normalized to counter-clockwise on construction.
class BoundaryCurve {
 public:
  // nodes: >= 8 distinct points of a simple closed polygon.
  explicit BoundaryCurve(std::vector<std::array<double, 2>> nodes);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  double node_param(int j) const { return static_cast<double>(j) / num_nodes(); }
  std::array<double, 2> node(int j) const { return nodes_[j]; }

  std::array<double, 2> point(double t) const { return {sx_.eval(t), sy_.eval(t)}; }
  std::array<double, 2> velocity(double t) const { return {sx_.deriv(t), sy_.deriv(t)}; }
  double speed(double t) const;

  // Unit tangent along increasing t, outward unit normal (tangent rotated -90
  // degrees), signed curvature (+1/R for a CCW circle).
  BoundaryFrame frame(double t) const;

  double total_arclength() const { return arclen_.back(); }
  // cumulative spline arclength at node j (arclength_at(0) == 0)
  double arclength_at(int j) const { return arclen_[j]; }

  // winding-number test against the refined polyline (8 segments per span)
  bool contains(const std::array<double, 2>& p) const;

  const std::vector<std::array<double, 2>>& refined_polyline() const { return poly_; }
  static constexpr int kRefinePerSpan = 8;

 private:
  void validate_polygon() const;
  void build_arclength_table();

  std::vector<std::array<double, 2>> nodes_;
  PeriodicSpline sx_, sy_;
  std::vector<double> arclen_;               // size M+1, adaptive quadrature of speed
  std::vector<std::array<double, 2>> poly_;  // refined polyline, 8*M points on the spline
};

}  // namespace kfbi
