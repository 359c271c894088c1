#include "kfbi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace kfbi {

int BoundaryGeometry::num_nodes() const {
  return dim() == 2 ? curve().num_nodes() : mesh().num_vertices();
}

Vec3 BoundaryGeometry::node(int j) const {
  if (dim() == 2) {
    const auto p = curve().node(j);
    return {p[0], p[1], 0.0};
  }
  return mesh().vertex(j);
}

BoundaryFrame BoundaryGeometry::node_frame(int j) const {
  return dim() == 2 ? curve().frame(curve().node_param(j)) : mesh().vertex_frame(j);
}

bool BoundaryGeometry::contains(const Vec3& p) const {
  return dim() == 2 ? curve().contains({p[0], p[1]}) : mesh().contains(p);
}

BoundaryCurve preset_circle(int m, double radius) {
  require(m >= 8, "circle preset: need at least 8 nodes");
  std::vector<std::array<double, 2>> pts(m);
  // Mirror the upper half exactly so the node set is symmetric under y -> -y.
  for (int j = 0; j <= m / 2; ++j) {
    const double th = 2.0 * M_PI * j / m;
    pts[j] = {radius * std::cos(th), radius * std::sin(th)};
  }
  pts[0][1] = 0.0;
  if (m % 2 == 0) pts[m / 2][1] = 0.0;
  for (int j = m / 2 + 1; j < m; ++j) pts[j] = {pts[m - j][0], -pts[m - j][1]};
  return BoundaryCurve(std::move(pts));
}

namespace {

std::array<double, 2> heart_point(double t) {
  return {0.8 * std::pow(std::sin(t), 3),
          (13.0 * std::cos(t) - 5.0 * std::cos(2.0 * t) - 2.0 * std::cos(3.0 * t) -
           std::cos(4.0 * t)) /
              20.0};
}

double heart_speed(double t) {
  const double xp = 2.4 * std::sin(t) * std::sin(t) * std::cos(t);
  const double yp = (-13.0 * std::sin(t) + 10.0 * std::sin(2.0 * t) + 6.0 * std::sin(3.0 * t) +
                     4.0 * std::sin(4.0 * t)) /
                    20.0;
  return std::hypot(xp, yp);
}

// cumulative arclength of the right half (t in [0, pi]) on a fine Simpson table
class HeartArclengthTable {
 public:
  HeartArclengthTable() : cum_(kN + 1, 0.0) {
    const double dh = M_PI / kN;
    for (int i = 0; i < kN; ++i) {
      const double t0 = i * dh;
      cum_[i + 1] = cum_[i] + dh / 6.0 *
                                  (heart_speed(t0) + 4.0 * heart_speed(t0 + 0.5 * dh) +
                                   heart_speed(t0 + dh));
    }
  }
  double total() const { return cum_.back(); }
  double param_at(double s) const {
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    int i = std::max<int>(1, static_cast<int>(it - cum_.begin())) - 1;
    i = std::min(i, kN - 1);
    const double dh = M_PI / kN;
    const double a = i * dh, s_lo = cum_[i];
    double lo = a, hi = a + dh;
    for (int k = 0; k < 60; ++k) {  // bisection within the table interval
      const double mid = 0.5 * (lo + hi);
      const double smid = s_lo + (mid - a) / 6.0 *
                                     (heart_speed(a) + 4.0 * heart_speed(0.5 * (a + mid)) +
                                      heart_speed(mid));
      if (smid < s)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  static constexpr int kN = 32768;
  std::vector<double> cum_;
};

}  // namespace

BoundaryCurve preset_heart(int m) {
  require(m >= 8, "heart preset: need at least 8 nodes");
  // The quartic heart curve has 3/2-power cusps at t = 0 (notch) and t = pi
  // (apex). Pinning one node on each cusp and spacing the rest by equal
  // arclength per half keeps the node spacing quasi-uniform across the folds.
  static const HeartArclengthTable table;
  const int n_right = (m + 1) / 2;  // spans on the t in [0, pi] half
  const int n_left = m - n_right;
  const double s_half = table.total();

  std::vector<std::array<double, 2>> pts(m);
  pts[0] = heart_point(0.0);
  pts[0][0] = 0.0;  // cusps lie exactly on the symmetry axis
  for (int j = 1; j < n_right; ++j)
    pts[j] = heart_point(table.param_at(s_half * j / n_right));
  pts[n_right] = heart_point(M_PI);
  pts[n_right][0] = 0.0;
  // mirror the right half exactly (the curve is symmetric under x -> -x);
  // walking back from the apex keeps the polygon order simple
  for (int j = 1; j < n_left; ++j) {
    const auto p = heart_point(table.param_at(s_half * (n_left - j) / n_left));
    pts[n_right + j] = {-p[0], p[1]};
  }
  return BoundaryCurve(std::move(pts));
}

namespace {

struct MeshBuilder {
  std::vector<Vec3> verts;
  std::vector<Index3> tris;
  std::map<std::pair<int, int>, int> midpoint;

  int mid(int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const Vec3 p = normalized(0.5 * (verts[a] + verts[b]));
    verts.push_back(p);
    const int id = static_cast<int>(verts.size()) - 1;
    midpoint[key] = id;
    return id;
  }
};

}  // namespace

TriMesh preset_sphere(int m, double radius) {
  int level = -1, v = 6;
  for (int k = 0; k <= 8; ++k) {
    if (v == m) {
      level = k;
      break;
    }
    v += 12 << (2 * k);  // edges added by the next subdivision
  }
  require(level >= 1, "sphere preset: node count must be one of 18, 66, 258, 1026, 4098, ...");

  MeshBuilder b;
  b.verts = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  b.tris = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4}, {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  for (int k = 0; k < level; ++k) {
    std::vector<Index3> next;
    next.reserve(b.tris.size() * 4);
    for (const auto& t : b.tris) {
      const int ab = b.mid(t[0], t[1]), bc = b.mid(t[1], t[2]), ca = b.mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    b.tris = std::move(next);
  }

  // Fixed generic rotation: a grid-aligned octahedron would put whole mesh
  // edges inside grid planes and make the grid-line intersection search
  // degenerate. The sphere itself is rotation invariant.
  const double ax = 0.41, ay = 0.29, az = 0.17;
  const double cx = std::cos(ax), sx = std::sin(ax);
  const double cy = std::cos(ay), sy = std::sin(ay);
  const double cz = std::cos(az), sz = std::sin(az);
  for (auto& p : b.verts) {
    Vec3 q = p;
    q = {q[0], cx * q[1] - sx * q[2], sx * q[1] + cx * q[2]};
    q = {cy * q[0] + sy * q[2], q[1], -sy * q[0] + cy * q[2]};
    q = {cz * q[0] - sz * q[1], sz * q[0] + cz * q[1], q[2]};
    p = radius * q;
  }
  return TriMesh(std::move(b.verts), std::move(b.tris));
}

BoundaryGeometry preset_shape(const std::string& name, int m) {
  if (name == "circle") return BoundaryGeometry(preset_circle(m));
  if (name == "heart") return BoundaryGeometry(preset_heart(m));
  if (name == "sphere") return BoundaryGeometry(preset_sphere(m));
  throw Error("unknown preset shape: " + name + " (expected circle, heart, or sphere)");
}

}  // namespace kfbi
