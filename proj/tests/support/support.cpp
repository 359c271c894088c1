#include "support.hpp"

#include <map>
#include <utility>

#include "kfbi/geometry.hpp"

namespace kfbi::test {

long interior_count(const CartesianGrid& g) {
  long n = g.cells - 1;
  long c = 1;
  for (int d = 0; d < g.dim; ++d) c *= n;
  return c;
}

namespace {
long interior_index(const CartesianGrid& g, int k, int l, int m) {
  const long n = g.cells - 1;
  long q = (k - 1) + n * (l - 1);
  if (g.dim == 3) q += n * n * (m - 1);
  return q;
}
}  // namespace

Eigen::VectorXd gather_interior(const FieldPair& u, const CartesianGrid& g) {
  const long n = interior_count(g);
  Eigen::VectorXd v(2 * n);
  const int mh = (g.dim == 3) ? g.cells - 1 : 0;
  const int ml = (g.dim == 3) ? 1 : 0;
  for (int m = ml; m <= mh; ++m)
    for (int l = 1; l <= g.cells - 1; ++l)
      for (int k = 1; k <= g.cells - 1; ++k) {
        const long q = interior_index(g, k, l, m);
        v[q] = u.i[g.index(k, l, m)];
        v[n + q] = u.e[g.index(k, l, m)];
      }
  return v;
}

FieldPair scatter_interior(const Eigen::VectorXd& v, const CartesianGrid& g) {
  const long n = interior_count(g);
  FieldPair u(g.num_nodes());
  const int mh = (g.dim == 3) ? g.cells - 1 : 0;
  const int ml = (g.dim == 3) ? 1 : 0;
  for (int m = ml; m <= mh; ++m)
    for (int l = 1; l <= g.cells - 1; ++l)
      for (int k = 1; k <= g.cells - 1; ++k) {
        const long q = interior_index(g, k, l, m);
        u.i[g.index(k, l, m)] = v[q];
        u.e[g.index(k, l, m)] = v[n + q];
      }
  return u;
}

Eigen::MatrixXd dense_operator(const CartesianGrid& g, const DiffusionParams& p) {
  const long n = interior_count(g);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  const double inv_h2 = 1.0 / (g.h * g.h);
  const int mh = (g.dim == 3) ? g.cells - 1 : 0;
  const int ml = (g.dim == 3) ? 1 : 0;
  for (int m = ml; m <= mh; ++m)
    for (int l = 1; l <= g.cells - 1; ++l)
      for (int k = 1; k <= g.cells - 1; ++k) {
        const long q = interior_index(g, k, l, m);
        double diag_i = 0.0, diag_e = 0.0;
        const int kk[3] = {k, l, m};
        for (int d = 0; d < g.dim; ++d) {
          diag_i -= 2.0 * p.intra[d] * inv_h2;
          diag_e -= 2.0 * p.extra[d] * inv_h2;
          for (int s = -1; s <= 1; s += 2) {
            int nb[3] = {kk[0], kk[1], kk[2]};
            nb[d] += s;
            if (nb[d] < 1 || nb[d] > g.cells - 1) continue;  // Dirichlet closure
            const long qq = interior_index(g, nb[0], nb[1], nb[2]);
            A(q, qq) += p.intra[d] * inv_h2;
            A(n + q, n + qq) += p.extra[d] * inv_h2;
          }
        }
        A(q, q) = diag_i - p.kappa;
        A(q, n + q) = p.kappa;
        A(n + q, n + q) = diag_e - p.kappa;
        A(n + q, q) = p.kappa;
      }
  return A;
}

std::vector<double> random_values(long n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) x = dist(rng);
  return out;
}

TriMesh make_cube_mesh() {
  std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                         {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  std::vector<Index3> f = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7},
                           {0, 1, 5}, {0, 5, 4}, {2, 3, 7}, {2, 7, 6},
                           {0, 4, 7}, {0, 7, 3}, {1, 2, 6}, {1, 6, 5}};
  return TriMesh(std::move(v), std::move(f));
}

TriMesh make_slab_mesh(int nx, int ny, double lx, double ly, double thickness) {
  const int vpr = nx + 1;             // vertices per top row
  const int top_n = vpr * (ny + 1);   // top grid size; bottom mirrors it
  std::vector<Vec3> verts(2 * top_n);
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const double x = lx * i / nx, y = ly * j / ny;
      verts[j * vpr + i] = {x, y, thickness};
      verts[top_n + j * vpr + i] = {x, y, 0.0};
    }
  auto T = [&](int i, int j) { return j * vpr + i; };
  auto B = [&](int i, int j) { return top_n + j * vpr + i; };

  std::vector<Index3> faces;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      faces.push_back({T(i, j), T(i + 1, j), T(i + 1, j + 1)});
      faces.push_back({T(i, j), T(i + 1, j + 1), T(i, j + 1)});
      // bottom: same triangles with reversed orientation
      faces.push_back({B(i, j), B(i + 1, j + 1), B(i + 1, j)});
      faces.push_back({B(i, j), B(i, j + 1), B(i + 1, j + 1)});
    }
  // walls: for each directed boundary edge ta->tb of the top sheet, emit the
  // quad (tb, ta, ba, bb) so every directed edge pairs up with its reverse
  auto wall = [&](int ta, int tb) {
    const int ba = ta + top_n, bb = tb + top_n;
    faces.push_back({tb, ta, ba});
    faces.push_back({tb, ba, bb});
  };
  for (int i = 0; i < nx; ++i) wall(T(i, 0), T(i + 1, 0));         // y = 0 side
  for (int j = 0; j < ny; ++j) wall(T(nx, j), T(nx, j + 1));       // x = lx side
  for (int i = nx; i > 0; --i) wall(T(i, ny), T(i - 1, ny));       // y = ly side
  for (int j = ny; j > 0; --j) wall(T(0, j), T(0, j - 1));         // x = 0 side
  return TriMesh(std::move(verts), std::move(faces));
}

TriMesh make_lv_like_surface(int subdiv_level) {
  static const int counts[] = {6, 18, 66, 258, 1026, 4098};
  require(subdiv_level >= 1 && subdiv_level <= 5, "lv surface: level out of range");
  const TriMesh base = preset_sphere(counts[subdiv_level], 1.0);
  // shear + squash of the generic-rotated unit sphere: elongated tilted blob
  // whose long axis runs roughly from (x,z) ~ (-0.1,-0.25) up to (0.28,0.33)
  const double A[3][3] = {{0.20, 0.0, 0.20}, {0.0, 0.21, 0.0}, {-0.03, 0.0, 0.30}};
  const Vec3 c = {0.08, 0.05, 0.03};
  std::vector<Vec3> verts(base.num_vertices());
  for (int v = 0; v < base.num_vertices(); ++v) {
    const Vec3& p = base.vertex(v);
    for (int r = 0; r < 3; ++r)
      verts[v][r] = c[r] + A[r][0] * p[0] + A[r][1] * p[1] + A[r][2] * p[2];
  }
  std::vector<Index3> faces(base.num_triangles());
  for (int f = 0; f < base.num_triangles(); ++f) faces[f] = base.triangle(f);
  return TriMesh(std::move(verts), std::move(faces));
}

double correction_residual(const SmoothPiece& ui, const SmoothPiece& ue, const Embedding& emb,
                           const DiffusionParams& p) {
  const CartesianGrid& g = emb.grid;
  const long n = g.num_nodes();

  FieldPair u(n), f(n);
  for (long id = 0; id < n; ++id) {
    if (!emb.inside[id]) continue;  // exterior piece is identically zero
    const Vec3 x = g.node(g.unindex(id));
    u.i[id] = ui.u(x);
    u.e[id] = ue.u(x);
    const auto hi = ui.hess(x), he = ue.hess(x);
    const double lap_i = p.intra[0] * hi[0] + p.intra[1] * hi[1] + p.intra[2] * hi[2];
    const double lap_e = p.extra[0] * he[0] + p.extra[1] * he[1] + p.extra[2] * he[2];
    f.i[id] = lap_i - p.kappa * (u.i[id] - u.e[id]);
    f.e[id] = lap_e + p.kappa * (u.i[id] - u.e[id]);
  }

  JumpTable jumps;
  jumps.i.resize(emb.cuts.size());
  jumps.e.resize(emb.cuts.size());
  for (size_t c = 0; c < emb.cuts.size(); ++c) {
    const Vec3& z = emb.cuts[c].position;
    jumps.i[c] = ComponentJumps{ui.u(z), ui.grad(z), ui.hess(z)};
    jumps.e[c] = ComponentJumps{ue.u(z), ue.grad(z), ue.hess(z)};
  }
  const CorrectionSet corr = correction_set(jumps, emb, p);

  FieldPair r = apply_diffusion_operator(u, p, g);
  for (long id = 0; id < n; ++id) {
    r.i[id] -= f.i[id];
    r.e[id] -= f.e[id];
  }
  for (const auto& [node, inc] : corr.rhs) {
    r.i[node] -= inc[0];
    r.e[node] -= inc[1];
  }
  double worst = 0.0;
  for (long id = 0; id < n; ++id) {
    if (g.is_box_boundary(g.unindex(id))) continue;
    worst = std::max(worst, std::max(std::abs(r.i[id]), std::abs(r.e[id])));
  }
  return worst;
}

ManufacturedProblem plane_problem() {
  ManufacturedProblem mp;
  mp.ui.terms = {{1.0, 1, 1, 0}, {0.4, 2, 1, 0}};
  mp.ue.terms = {{0.7, 1, 2, 0}, {-0.5, 1, 1, 0}};
  return mp;
}

ManufacturedProblem space_problem() {
  ManufacturedProblem mp;
  mp.ui.terms = {{1.0, 1, 1, 1}, {0.3, 2, 1, 1}};
  mp.ue.terms = {{0.6, 1, 1, 2}, {-0.4, 1, 1, 1}};
  return mp;
}

InteriorError interior_error(const FieldPair& u, const ManufacturedProblem& mp,
                             const CartesianGrid& g, const Embedding& emb) {
  double shift = 0.0;
  long cnt = 0;
  for (long n = 0; n < g.num_nodes(); ++n) {
    if (!emb.inside[n]) continue;
    shift += u.i[n] - mp.ui.value(g.node(g.unindex(n)));
    ++cnt;
  }
  shift /= static_cast<double>(cnt);
  InteriorError e;
  for (long n = 0; n < g.num_nodes(); ++n) {
    if (!emb.inside[n]) continue;
    const Vec3 p = g.node(g.unindex(n));
    const double di = u.i[n] - mp.ui.value(p) - shift;
    const double de = u.e[n] - mp.ue.value(p) - shift;
    e.aligned_max = std::max({e.aligned_max, std::abs(di), std::abs(de)});
    e.vm_max = std::max(e.vm_max,
                        std::abs((u.i[n] - u.e[n]) -
                                 (mp.ui.value(p) - mp.ue.value(p))));
  }
  return e;
}

}  // namespace kfbi::test
