#include "kfbi/curve2d.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace kfbi {

namespace {

double shoelace_area(const std::vector<std::array<double, 2>>& p) {
  double a = 0.0;
  const int n = static_cast<int>(p.size());
  for (int i = 0; i < n; ++i) {
    const auto& u = p[i];
    const auto& v = p[(i + 1) % n];
    a += u[0] * v[1] - v[0] * u[1];
  }
  return 0.5 * a;
}

double cross2(const std::array<double, 2>& o, const std::array<double, 2>& a,
              const std::array<double, 2>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

bool segments_intersect(const std::array<double, 2>& a, const std::array<double, 2>& b,
                        const std::array<double, 2>& c, const std::array<double, 2>& d) {
  const double d1 = cross2(c, d, a), d2 = cross2(c, d, b);
  const double d3 = cross2(a, b, c), d4 = cross2(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto on = [](const std::array<double, 2>& p, const std::array<double, 2>& q,
               const std::array<double, 2>& r) {
    return std::min(p[0], r[0]) <= q[0] && q[0] <= std::max(p[0], r[0]) &&
           std::min(p[1], r[1]) <= q[1] && q[1] <= std::max(p[1], r[1]);
  };
  if (d1 == 0 && on(c, a, d)) return true;
  if (d2 == 0 && on(c, b, d)) return true;
  if (d3 == 0 && on(a, c, b)) return true;
  if (d4 == 0 && on(a, d, b)) return true;
  return false;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

BoundaryCurve::BoundaryCurve(std::vector<std::array<double, 2>> nodes) : nodes_(std::move(nodes)) {
  validate_polygon();
  if (shoelace_area(nodes_) < 0.0)
    std::reverse(nodes_.begin() + 1, nodes_.end());  // normalize to CCW, node 0 stays first

  const int m = num_nodes();
  std::vector<double> xs(m), ys(m);
  for (int j = 0; j < m; ++j) {
    xs[j] = nodes_[j][0];
    ys[j] = nodes_[j][1];
  }
  sx_ = PeriodicSpline(std::move(xs));
  sy_ = PeriodicSpline(std::move(ys));

  poly_.resize(static_cast<size_t>(kRefinePerSpan) * m);
  for (int i = 0; i < kRefinePerSpan * m; ++i)
    poly_[i] = point(static_cast<double>(i) / (kRefinePerSpan * m));

  build_arclength_table();

  double smin = arclen_[1] - arclen_[0], smax = smin;
  for (int j = 1; j < m; ++j) {
    const double s = arclen_[j + 1] - arclen_[j];
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }
  require(smin > 0.0 && smax / smin <= 2.0,
          "boundary curve: node spacing not quasi-uniform (max/min arclength ratio "
          "exceeds 2)");
}

void BoundaryCurve::validate_polygon() const {
  const int m = num_nodes();
  require(m >= 8, "boundary curve: need at least 8 nodes");

  double diam = 0.0;
  for (const auto& p : nodes_)
    for (const auto& q : nodes_)
      diam = std::max(diam, std::hypot(p[0] - q[0], p[1] - q[1]));
  require(diam > 0.0, "boundary curve: all nodes coincide");
  const double tol = 1e-12 * diam;

  for (int j = 0; j < m; ++j) {
    const auto& p = nodes_[j];
    const auto& q = nodes_[(j + 1) % m];
    require(std::hypot(p[0] - q[0], p[1] - q[1]) > tol,
            "boundary curve: duplicate consecutive nodes at index " + std::to_string(j));
  }

  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if (j == i + 1 || (i == 0 && j == m - 1)) continue;  // adjacent edges share a vertex
      if (segments_intersect(nodes_[i], nodes_[(i + 1) % m], nodes_[j], nodes_[(j + 1) % m]))
        throw Error("boundary curve: input polygon self-intersects (edges " + std::to_string(i) +
                    " and " + std::to_string(j) + ")");
    }
  }
}

void BoundaryCurve::build_arclength_table() {
  const int m = num_nodes();
  arclen_.assign(m + 1, 0.0);
  auto spd = [this](double t) { return speed(t); };
  for (int j = 0; j < m; ++j) {
    const double a = node_param(j);
    const double b = a + 1.0 / m;
    arclen_[j + 1] = arclen_[j] + integrate(spd, a, b, 1e-12);
  }
}

double BoundaryCurve::speed(double t) const {
  const auto v = velocity(t);
  return std::hypot(v[0], v[1]);
}

BoundaryFrame BoundaryCurve::frame(double t) const {
  const auto p = point(t);
  const auto v = velocity(t);
  const double s = std::hypot(v[0], v[1]);
  BoundaryFrame f;
  f.position = {p[0], p[1], 0.0};
  if (s < 1e-14) {
    f.normal = {1.0, 0.0, 0.0};
    f.tangent1 = {0.0, 1.0, 0.0};
    f.degenerate = true;
    return f;
  }
  const double tx = v[0] / s, ty = v[1] / s;
  f.tangent1 = {tx, ty, 0.0};
  f.normal = {ty, -tx, 0.0};  // tangent rotated -90 deg: outward for CCW orientation
  const double ax = sx_.deriv2(t), ay = sy_.deriv2(t);
  f.curvature1 = (v[0] * ay - v[1] * ax) / (s * s * s);
  f.curvature2 = f.curvature1;
  return f;
}

bool BoundaryCurve::contains(const std::array<double, 2>& p) const {
  // winding number over the refined polyline
  int wn = 0;
  const int n = static_cast<int>(poly_.size());
  for (int i = 0; i < n; ++i) {
    const auto& a = poly_[i];
    const auto& b = poly_[(i + 1) % n];
    if (a[1] <= p[1]) {
      if (b[1] > p[1] && cross2(a, b, p) > 0) ++wn;
    } else {
      if (b[1] <= p[1] && cross2(a, b, p) < 0) --wn;
    }
  }
  return wn != 0;
}

}  // namespace kfbi
