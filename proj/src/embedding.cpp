#include "kfbi/embedding.hpp"

#include <algorithm>
#include <cmath>

namespace kfbi {

namespace {

// One boundary crossing of a grid line before arm assignment.
struct RawCrossing {
  double s = 0.0;  // position along the line axis
  double t = 0.0;  // curve parameter (2D)
  int tri = -1;    // triangle (3D)
  double b1 = 0.0, b2 = 0.0;
};

// crossings indexed by the transverse linear index of the grid line
using LineMap = std::vector<std::vector<RawCrossing>>;

double bisect_coordinate(const BoundaryCurve& curve, int coord, double value, double ta, double tb,
                         double ga, double gb) {
  if (ga == 0.0) return ta;
  if (gb == 0.0) return tb;
  for (int it = 0; it < 64; ++it) {
    const double tm = 0.5 * (ta + tb);
    const double gm = (coord == 0 ? curve.point(tm)[0] : curve.point(tm)[1]) - value;
    if (gm == 0.0) return tm;
    if ((gm > 0.0) == (ga > 0.0)) {
      ta = tm;
      ga = gm;
    } else {
      tb = tm;
      gb = gm;
    }
  }
  return 0.5 * (ta + tb);
}

void collect_2d(const BoundaryCurve& curve, const CartesianGrid& grid, int axis, LineMap& lines) {
  const int n = grid.nodes_per_axis();
  const int coord = 1 - axis;  // arms along `axis` lie on lines of constant `coord`
  const double lo = grid.low[coord];
  lines.assign(n, {});

  const auto& poly = curve.refined_polyline();
  const int np = static_cast<int>(poly.size());
  for (int i = 0; i < np; ++i) {
    const double ta = static_cast<double>(i) / np;
    const double tb = static_cast<double>(i + 1) / np;
    const double ya = poly[i][coord];
    const double yb = poly[(i + 1) % np][coord];
    // widened by one line on each side: exact-on-line endpoints round unreliably,
    // and the sign tests below discard lines the segment does not actually cross
    const int l_min = static_cast<int>(std::ceil((std::min(ya, yb) - lo) / grid.h)) - 1;
    const int l_max = static_cast<int>(std::floor((std::max(ya, yb) - lo) / grid.h)) + 1;
    for (int l = std::max(0, l_min); l <= std::min(n - 1, l_max); ++l) {
      const double value = lo + l * grid.h;
      const double ga = ya - value, gb = yb - value;
      require(!(ga == 0.0 && gb == 0.0),
              "embedding: boundary runs along a grid line; refine the boundary resolution");
      if (gb == 0.0) continue;  // end-node zero is owned by the next segment
      if (ga == 0.0) {
        // polyline point exactly on the line: contact parity from the flanking
        // signs. A tangential touch enters and leaves, so it registers as a
        // coincident pair (net parity even); arm assignment sorts out whether
        // the pair straddles anything.
        const double gp = poly[(i + np - 1) % np][coord] - value;
        if ((gp > 0.0) == (gb > 0.0)) {
          RawCrossing c;
          c.t = ta;
          c.s = curve.point(ta)[axis];
          lines[l].push_back(c);
          lines[l].push_back(c);
          continue;
        }
      } else if ((ga > 0.0) == (gb > 0.0)) {
        continue;
      }
      const double t = bisect_coordinate(curve, coord, value, ta, tb, ga, gb);
      RawCrossing c;
      c.t = t;
      c.s = curve.point(t)[axis];
      lines[l].push_back(c);
    }
  }
  for (auto& v : lines)
    std::sort(v.begin(), v.end(), [](const RawCrossing& a, const RawCrossing& b) { return a.s < b.s; });
}

void collect_3d(const TriMesh& mesh, const CartesianGrid& grid, int axis, LineMap& lines) {
  const int n = grid.nodes_per_axis();
  const int t1 = (axis == 0) ? 1 : 0;
  const int t2 = (axis == 2) ? 1 : 2;
  lines.assign(static_cast<size_t>(n) * n, {});

  for (int f = 0; f < mesh.num_triangles(); ++f) {
    const auto& tr = mesh.triangle(f);
    const Vec3& p0 = mesh.vertex(tr[0]);
    const Vec3& p1 = mesh.vertex(tr[1]);
    const Vec3& p2 = mesh.vertex(tr[2]);
    const double u0 = p0[t1], v0 = p0[t2];
    const double u1 = p1[t1] - u0, v1 = p1[t2] - v0;
    const double u2 = p2[t1] - u0, v2 = p2[t2] - v0;
    const double det = u1 * v2 - u2 * v1;
    const double scale = std::max({std::abs(u1), std::abs(u2), std::abs(v1), std::abs(v2), 1e-30});
    if (std::abs(det) < 1e-14 * scale * scale) continue;  // edge-on to this axis

    const double umin = std::min({p0[t1], p1[t1], p2[t1]}), umax = std::max({p0[t1], p1[t1], p2[t1]});
    const double vmin = std::min({p0[t2], p1[t2], p2[t2]}), vmax = std::max({p0[t2], p1[t2], p2[t2]});
    // widened by one: the barycentric test filters lines outside the triangle
    const int i_lo = std::max(0, static_cast<int>(std::ceil((umin - grid.low[t1]) / grid.h)) - 1);
    const int i_hi = std::min(n - 1, static_cast<int>(std::floor((umax - grid.low[t1]) / grid.h)) + 1);
    const int j_lo = std::max(0, static_cast<int>(std::ceil((vmin - grid.low[t2]) / grid.h)) - 1);
    const int j_hi = std::min(n - 1, static_cast<int>(std::floor((vmax - grid.low[t2]) / grid.h)) + 1);
    for (int i = i_lo; i <= i_hi; ++i) {
      for (int j = j_lo; j <= j_hi; ++j) {
        const double du = grid.low[t1] + i * grid.h - u0;
        const double dv = grid.low[t2] + j * grid.h - v0;
        const double b1 = (du * v2 - dv * u2) / det;
        const double b2 = (dv * u1 - du * v1) / det;
        if (b1 < -1e-12 || b2 < -1e-12 || b1 + b2 > 1.0 + 1e-12) continue;
        RawCrossing c;
        c.tri = f;
        c.b1 = b1;
        c.b2 = b2;
        c.s = p0[axis] + b1 * (p1[axis] - p0[axis]) + b2 * (p2[axis] - p0[axis]);
        lines[static_cast<size_t>(j) * n + i].push_back(c);
      }
    }
  }

  const double merge_tol = 1e-9 * grid.h;
  for (auto& v : lines) {
    std::sort(v.begin(), v.end(),
              [](const RawCrossing& a, const RawCrossing& b) { return a.s < b.s; });
    // hits through a shared edge or vertex are reported by several triangles
    std::vector<RawCrossing> merged;
    for (const auto& c : v)
      if (merged.empty() || c.s - merged.back().s > merge_tol) merged.push_back(c);
    v = std::move(merged);
  }
}

std::vector<uint8_t> walk_line(const std::vector<RawCrossing>& cr, double lo, double h, int n,
                               double eps) {
  std::vector<uint8_t> inside(n, 0);
  bool state = false;
  size_t ptr = 0;
  for (int k = 0; k < n; ++k) {
    const double xk = lo + k * h;
    while (ptr < cr.size() && (cr[ptr].s < xk - eps || (cr[ptr].s <= xk + eps && !state))) {
      state = !state;
      ++ptr;
    }
    inside[k] = state ? 1 : 0;
  }
  while (ptr < cr.size()) {
    state = !state;
    ++ptr;
  }
  require(!state, "embedding: unbalanced boundary crossings on a grid line");
  return inside;
}

}  // namespace

std::vector<double> curve_line_roots(const BoundaryCurve& curve, int coord, double value) {
  const auto& poly = curve.refined_polyline();
  const int np = static_cast<int>(poly.size());
  std::vector<double> roots;
  for (int i = 0; i < np; ++i) {
    const double ga = poly[i][coord] - value;
    const double gb = poly[(i + 1) % np][coord] - value;
    require(!(ga == 0.0 && gb == 0.0), "curve_line_roots: curve runs along the line");
    if (gb == 0.0) continue;
    if (ga != 0.0 && (ga > 0.0) == (gb > 0.0)) continue;
    roots.push_back(bisect_coordinate(curve, coord, value, static_cast<double>(i) / np,
                                      static_cast<double>(i + 1) / np, ga, gb));
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

Embedding build_embedding(const BoundaryGeometry& geometry, const CartesianGrid& grid) {
  require(geometry.dim() == grid.dim, "embedding: geometry and grid dimension mismatch");
  const int n = grid.nodes_per_axis();
  const double eps = 1e-12 * grid.h;

  // boundary must keep 2h clearance from the box so stencils stay on the grid
  {
    const double need = 2.0 * grid.h;
    auto check = [&](const Vec3& p, const std::string& what) {
      for (int d = 0; d < grid.dim; ++d) {
        const double hi = grid.low[d] + grid.cells * grid.h;
        if (p[d] - grid.low[d] < need || hi - p[d] < need)
          throw Error("embedding: boundary point (" + std::to_string(p[0]) + ", " +
                      std::to_string(p[1]) + ", " + std::to_string(p[2]) + ") from " + what +
                      " violates the 2h clearance from the box");
      }
    };
    if (grid.dim == 2) {
      for (const auto& q : geometry.curve().refined_polyline()) check({q[0], q[1], 0.0}, "curve");
    } else {
      for (int v = 0; v < geometry.mesh().num_vertices(); ++v)
        check(geometry.mesh().vertex(v), "mesh vertex " + std::to_string(v));
    }
  }

  std::vector<LineMap> per_axis(grid.dim);
  for (int a = 0; a < grid.dim; ++a) {
    if (grid.dim == 2)
      collect_2d(geometry.curve(), grid, a, per_axis[a]);
    else
      collect_3d(geometry.mesh(), grid, a, per_axis[a]);
  }

  Embedding emb(grid);
  emb.inside.assign(grid.num_nodes(), 0);
  emb.irregular.assign(grid.num_nodes(), 0);

  // node masks from axis-0 line parities, cross-checked against the other axes
  const int m_hi = (grid.dim == 3) ? n : 1;
  for (int a = 0; a < grid.dim; ++a) {
    const int t1 = (a == 0) ? 1 : 0;
    const int t2 = (a == 2) ? 1 : 2;
    for (int j = 0; j < m_hi; ++j) {
      for (int i = 0; i < n; ++i) {
        const size_t key = (grid.dim == 2) ? i : static_cast<size_t>(j) * n + i;
        if (grid.dim == 2 && j > 0) continue;
        const auto& cr = per_axis[a][key];
        const auto line_inside = walk_line(cr, grid.low[a], grid.h, n, eps);
        for (int k = 0; k < n; ++k) {
          Index3 idx{};
          idx[a] = k;
          idx[t1] = i;
          if (grid.dim == 3) idx[t2] = j;
          const long node = grid.index(idx[0], idx[1], idx[2]);
          if (a == 0)
            emb.inside[node] = line_inside[k];
          else if (emb.inside[node] != line_inside[k])
            throw Error(
                "embedding: boundary under-resolved by the grid (crossing parity mismatch "
                "between axes at node " +
                std::to_string(idx[0]) + "," + std::to_string(idx[1]) + "," +
                std::to_string(idx[2]) + ")");
        }
      }
    }
  }

  // assign crossings to arms, consistent with the masks
  for (int a = 0; a < grid.dim; ++a) {
    const int t1 = (a == 0) ? 1 : 0;
    const int t2 = (a == 2) ? 1 : 2;
    for (int j = 0; j < m_hi; ++j) {
      if (grid.dim == 2 && j > 0) continue;
      for (int i = 0; i < n; ++i) {
        const size_t key = (grid.dim == 2) ? i : static_cast<size_t>(j) * n + i;
        const auto& cr = per_axis[a][key];
        if (cr.empty()) continue;

        auto node_of = [&](int k) {
          Index3 idx{};
          idx[a] = k;
          idx[t1] = i;
          if (grid.dim == 3) idx[t2] = j;
          return idx;
        };
        auto mask = [&](int k) {
          const Index3 idx = node_of(k);
          return emb.inside[grid.index(idx[0], idx[1], idx[2])];
        };

        std::vector<int> arm_taken(n - 1, 0);
        auto attach = [&](const RawCrossing& c, int arm, double offset) {
          require(!arm_taken[arm], "embedding: two boundary cuts assigned to one grid arm");
          arm_taken[arm] = 1;

          Intersection cut;
          cut.axis = a;
          cut.base = node_of(arm);
          cut.offset = offset;
          cut.curve_param = c.t;
          cut.triangle = c.tri;
          cut.b1 = c.b1;
          cut.b2 = c.b2;
          Vec3 pos{};
          pos[a] = c.s;
          pos[t1] = grid.low[t1] + i * grid.h;
          if (grid.dim == 3) pos[t2] = grid.low[t2] + j * grid.h;
          cut.position = pos;
          cut.frame = (grid.dim == 2) ? geometry.curve().frame(c.t)
                                      : geometry.mesh().triangle_frame(c.tri, pos);

          const long base_lin = grid.index(cut.base[0], cut.base[1], cut.base[2]);
          emb.arm_map_[a * grid.num_nodes() + base_lin] = static_cast<int>(emb.cuts.size());
          emb.cuts.push_back(std::move(cut));

          const Index3 upper = node_of(arm + 1);
          emb.irregular[base_lin] = 1;
          emb.irregular[grid.index(upper[0], upper[1], upper[2])] = 1;
        };

        // crossings are processed in coincident-location groups: a pair on one
        // arm is a grazed sliver thinner than the arm (dropped), a pair at a
        // node is a tangential touch (cuts whichever adjacent arms change side)
        struct Loc {
          bool at_node;
          int idx;
        };
        auto locate = [&](const RawCrossing& c) -> Loc {
          const double rel = (c.s - grid.low[a]) / grid.h;
          const int jn = static_cast<int>(std::lround(rel));
          if (jn >= 0 && jn < n && std::abs(c.s - (grid.low[a] + jn * grid.h)) <= eps)
            return {true, jn};
          const int arm = static_cast<int>(std::floor(rel));
          require(arm >= 0 && arm < n - 1, "embedding: crossing outside the grid");
          return {false, arm};
        };

        size_t idx = 0;
        while (idx < cr.size()) {
          const Loc loc = locate(cr[idx]);
          size_t jj = idx + 1;
          while (jj < cr.size()) {
            const Loc lj = locate(cr[jj]);
            if (lj.at_node != loc.at_node || lj.idx != loc.idx) break;
            ++jj;
          }
          const int count = static_cast<int>(jj - idx);
          if (loc.at_node) {
            const int jn = loc.idx;
            const bool left = jn > 0 && mask(jn - 1) != mask(jn);
            const bool right = jn + 1 < n && mask(jn) != mask(jn + 1);
            if (count == 1) {
              if (left)
                attach(cr[idx], jn - 1, grid.h);
              else if (right)
                attach(cr[idx], jn, 0.0);
              else
                throw Error("embedding: boundary crossing at a grid node matches no side change");
            } else if (count == 2) {
              if (left) attach(cr[idx], jn - 1, grid.h);
              if (right) attach(cr[idx + 1], jn, 0.0);
            } else {
              throw Error("embedding: more than two boundary contacts at one grid node");
            }
          } else {
            if (count == 1) {
              attach(cr[idx], loc.idx,
                     std::max(0.0, cr[idx].s - (grid.low[a] + loc.idx * grid.h)));
            } else if (count == 2 && mask(loc.idx) == mask(loc.idx + 1)) {
              emb.dropped_slivers += 1;
            } else {
              throw Error(
                  "embedding: multiple boundary crossings on one grid arm; the grid is too "
                  "coarse for this boundary");
            }
          }
          idx = jj;
        }

        for (int k = 0; k + 1 < n; ++k)
          if ((mask(k) != mask(k + 1)) != (arm_taken[k] != 0))
            throw Error(
                "embedding: crossing/mask inconsistency on a grid arm; the grid is too "
                "coarse for this boundary (axis " +
                std::to_string(a) + ", line " + std::to_string(i) + "," + std::to_string(j) +
                ", arm " + std::to_string(k) + ")");
      }
    }
  }

  for (long k = 0; k < grid.num_nodes(); ++k) emb.inside_count += emb.inside[k];
  require(emb.inside_count > 0, "embedding: no grid nodes inside the boundary");
  return emb;
}

}  // namespace kfbi
