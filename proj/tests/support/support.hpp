#pragma once
// Shared helpers for the unit suites: a dense reference route for the
// transform solver, deterministic random fields, and small mesh builders.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "kfbi/embedding.hpp"
#include "kfbi/fft_elliptic.hpp"
#include "kfbi/geometry.hpp"
#include "kfbi/grid.hpp"
#include "kfbi/jumps.hpp"
#include "kfbi/trimesh.hpp"

namespace kfbi::test {

// Stacked interior vector layout: [u_i block; u_e block], x-fastest node order.
long interior_count(const CartesianGrid& g);
Eigen::VectorXd gather_interior(const FieldPair& u, const CartesianGrid& g);
FieldPair scatter_interior(const Eigen::VectorXd& v, const CartesianGrid& g);

// Dense assembly of the coupled anisotropic stencil on interior nodes with a
// homogeneous Dirichlet closure at the box faces. Deliberately written as a
// straight matrix, never via transforms, so it can referee the fast solver.
Eigen::MatrixXd dense_operator(const CartesianGrid& g, const DiffusionParams& p);

// Seeded uniform(-1,1) samples.
std::vector<double> random_values(long n, unsigned seed);

// Unit cube surface (8 vertices, 12 triangles), for corner/edge frame probes.
TriMesh make_cube_mesh();

// Closed flat-ish plate: thin rectangular slab tessellated fine on the top
// face so interior top vertices have a full planar neighborhood.
TriMesh make_slab_mesh(int nx, int ny, double lx, double ly, double thickness);

// Sheared-ellipsoid closed surface built from the subdivided octahedron ("LV
// like": elongated cavity-free blob with an apex). Used by the 3D physics
// suites; written to OFF and re-read so the file path gets exercised too.
TriMesh make_lv_like_surface(int subdiv_level);

// One smooth piece of a manufactured piecewise field: value, gradient and
// hessian (slot order xx, yy, zz, xy, xz, yz) as closed forms.
struct SmoothPiece {
  std::function<double(const Vec3&)> u;
  std::function<Vec3(const Vec3&)> grad;
  std::function<std::array<double, 6>(const Vec3&)> hess;
};

// Referee for the correction sign and order: sample u = (ui, ue) inside and
// zero outside, build the jump table at the cuts from the closed forms, and
// return max |stencil(u) - L u - corrections| over all non-face nodes. Exact
// (roundoff-scale) for quadratic pieces, O(h) for higher degree.
double correction_residual(const SmoothPiece& ui, const SmoothPiece& ue, const Embedding& emb,
                           const DiffusionParams& p);

// Sums of sin(a pi x)·sin(b pi y)[·sin(c pi z)] with integer frequencies:
// smooth, analytic derivatives, and exactly zero on the box walls so the
// volume solve carries no wall layers.
struct SineField {
  struct Term {
    double w;
    int a, b, c;
  };
  std::vector<Term> terms;

  double value(const Vec3& p) const {
    double s = 0.0;
    for (const auto& t : terms) s += t.w * parts(t, p)[0];
    return s;
  }
  Vec3 grad(const Vec3& p) const {
    Vec3 g{};
    for (const auto& t : terms) {
      const auto f = parts(t, p);
      g[0] += t.w * f[1];
      g[1] += t.w * f[2];
      g[2] += t.w * f[3];
    }
    return g;
  }
  // div(D grad u) for diagonal D
  double elliptic(const Vec3& d, const Vec3& p) const {
    constexpr double pi = 3.14159265358979323846;
    double s = 0.0;
    for (const auto& t : terms) {
      const double lam =
          pi * pi * (d[0] * t.a * t.a + d[1] * t.b * t.b + d[2] * t.c * t.c);
      s -= t.w * lam * parts(t, p)[0];
    }
    return s;
  }

 private:
  static std::array<double, 4> parts(const Term& t, const Vec3& p) {
    constexpr double pi = 3.14159265358979323846;
    const double sx = std::sin(t.a * pi * p[0]), cx = std::cos(t.a * pi * p[0]);
    const double sy = std::sin(t.b * pi * p[1]), cy = std::cos(t.b * pi * p[1]);
    const double sz = t.c == 0 ? 1.0 : std::sin(t.c * pi * p[2]);
    const double cz = t.c == 0 ? 0.0 : std::cos(t.c * pi * p[2]);
    return {sx * sy * sz, t.a * pi * cx * sy * sz, t.b * pi * sx * cy * sz,
            t.c * pi * sx * sy * cz};
  }
};

// Manufactured interior Neumann problem for the coupled pair: the source
// carries the kappa coupling, the flux is the one-sided conormal data.
struct ManufacturedProblem {
  SineField ui, ue;

  FieldPair source(const CartesianGrid& g, const DiffusionParams& prm) const {
    FieldPair f(g.num_nodes());
    for (long n = 0; n < g.num_nodes(); ++n) {
      const Vec3 p = g.node(g.unindex(n));
      const double v = ui.value(p) - ue.value(p);
      f.i[n] = ui.elliptic(prm.intra, p) - prm.kappa * v;
      f.e[n] = ue.elliptic(prm.extra, p) + prm.kappa * v;
    }
    return f;
  }
  Density flux(const BoundaryGeometry& geo, const DiffusionParams& prm) const {
    Density gn(geo.num_nodes());
    for (int j = 0; j < geo.num_nodes(); ++j) {
      const BoundaryFrame fr = geo.node_frame(j);
      const Vec3 gi = ui.grad(fr.position), ge = ue.grad(fr.position);
      for (int d = 0; d < 3; ++d) {
        gn.i[j] += fr.normal[d] * prm.intra[d] * gi[d];
        gn.e[j] += fr.normal[d] * prm.extra[d] * ge[d];
      }
    }
    return gn;
  }
};

ManufacturedProblem plane_problem();
ManufacturedProblem space_problem();

// Interior error of a two-component field against the manufactured pair,
// after aligning the one shared constant (fitted on the i-component only so
// a genuine mismatch in the e-component would still show).
struct InteriorError {
  double aligned_max = 0.0;  // both components, constant removed
  double vm_max = 0.0;       // difference field, no alignment at all
};
InteriorError interior_error(const FieldPair& u, const ManufacturedProblem& mp,
                             const CartesianGrid& g, const Embedding& emb);

}  // namespace kfbi::test
