#include "kfbi/jumps.hpp"

#include <Eigen/Dense>

#include "kfbi/spline.hpp"

namespace kfbi {

namespace {

// hess slot layout: xx, yy, zz, xy, xz, yz
constexpr int kXY = 3, kXZ = 4, kYZ = 5;

// Frame system for the first-derivative jumps: the conormal derivative jumps
// by psi, tangential derivatives of [u] = 0 vanish along the boundary.
Vec3 first_jumps_2d(const BoundaryFrame& fr, const Vec3& D, double psi, long site) {
  const double a = D[0] * fr.normal[0], b = D[1] * fr.normal[1];
  const double c = fr.tangent1[0], d = fr.tangent1[1];
  const double det = a * d - b * c;
  require(std::abs(det) > 1e-10 * (D[0] + D[1]),
          "jumps: singular frame system at site " + std::to_string(site));
  return {psi * d / det, -psi * c / det, 0.0};
}

Vec3 first_jumps_3d(const BoundaryFrame& fr, const Vec3& D, double psi, long site) {
  const Vec3 dn{D[0] * fr.normal[0], D[1] * fr.normal[1], D[2] * fr.normal[2]};
  const double det = dot(dn, cross(fr.tangent1, fr.tangent2));
  require(std::abs(det) > 1e-10 * (D[0] + D[1] + D[2]),
          "jumps: singular frame system at site " + std::to_string(site));
  Eigen::Matrix3d A;
  A << dn[0], dn[1], dn[2],
      fr.tangent1[0], fr.tangent1[1], fr.tangent1[2],
      fr.tangent2[0], fr.tangent2[1], fr.tangent2[2];
  const Eigen::Vector3d x = A.partialPivLu().solve(Eigen::Vector3d(psi, 0.0, 0.0));
  return {x(0), x(1), x(2)};
}

// Second-derivative jumps, 2D: operator identity row plus the arclength
// derivatives of the two first-jump fields, solved exactly.
std::array<double, 6> second_jumps_2d(const BoundaryFrame& fr, const Vec3& D, double ds_gx,
                                      double ds_gy, long site) {
  const double tx = fr.tangent1[0], ty = fr.tangent1[1];
  Eigen::Matrix3d A;   // unknowns (xx, xy, yy)
  A << D[0], 0.0, D[1],
      tx, ty, 0.0,
      0.0, tx, ty;
  require(std::abs(A.determinant()) > 1e-10 * (D[0] + D[1]),
          "jumps: singular tangential system at site " + std::to_string(site));
  const Eigen::Vector3d x = A.partialPivLu().solve(Eigen::Vector3d(0.0, ds_gx, ds_gy));
  return {x(0), x(2), 0.0, x(1), 0.0, 0.0};
}

// Second-derivative jumps, 3D: 7 equations (identity row, weighted up, plus
// the six tangential derivatives of the first-jump fields) for 6 unknowns.
std::array<double, 6> second_jumps_3d(const BoundaryFrame& fr, const Vec3& D,
                                      const std::array<Vec3, 3>& surf_grad) {
  Eigen::Matrix<double, 7, 6> A = Eigen::Matrix<double, 7, 6>::Zero();
  Eigen::Matrix<double, 7, 1> b = Eigen::Matrix<double, 7, 1>::Zero();
  const double w = 10.0 / norm(D);
  A(0, 0) = w * D[0];
  A(0, 1) = w * D[1];
  A(0, 2) = w * D[2];
  const std::array<Vec3, 2> taus{fr.tangent1, fr.tangent2};
  // row coefficients of tau·grad [u_w] in the slot layout, per component w
  const int slots[3][3] = {{0, kXY, kXZ}, {kXY, 1, kYZ}, {kXZ, kYZ, 2}};
  int row = 1;
  for (const Vec3& tau : taus)
    for (int wc = 0; wc < 3; ++wc, ++row) {
      for (int k = 0; k < 3; ++k) A(row, slots[wc][k]) = tau[k];
      b(row) = dot(tau, surf_grad[wc]);
    }
  const Eigen::Matrix<double, 6, 1> x = A.colPivHouseholderQr().solve(b);
  return {x(0), x(1), x(2), x(3), x(4), x(5)};
}

// Least-squares linear fit over a vertex neighborhood, reusable across fields.
struct VertexFit {
  BoundaryFrame frame;
  std::vector<int> pts;
  double radius = 1.0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;

  Vec3 gradient(const TriMesh&, const std::vector<double>& values) const {
    Eigen::VectorXd rhs(pts.size());
    for (size_t r = 0; r < pts.size(); ++r) rhs(static_cast<int>(r)) = values[pts[r]];
    const Eigen::VectorXd c = qr.solve(rhs);
    return (c(1) / radius) * frame.tangent1 + (c(2) / radius) * frame.tangent2;
  }
};

VertexFit make_vertex_fit(const TriMesh& mesh, int v) {
  VertexFit fit;
  fit.frame = mesh.vertex_frame(v);
  fit.pts = mesh.vertex_neighborhood(v);
  require(fit.pts.size() >= 3, "jumps: vertex neighborhood too small");
  fit.radius = 0.0;
  for (int id : fit.pts) fit.radius = std::max(fit.radius, norm(mesh.vertex(id) - mesh.vertex(v)));
  require(fit.radius > 0.0, "jumps: degenerate vertex neighborhood");
  Eigen::MatrixXd A(fit.pts.size(), 3);
  for (size_t r = 0; r < fit.pts.size(); ++r) {
    const Vec3 d = mesh.vertex(fit.pts[r]) - mesh.vertex(v);
    A.row(static_cast<int>(r)) << 1.0, dot(d, fit.frame.tangent1) / fit.radius,
        dot(d, fit.frame.tangent2) / fit.radius;
  }
  fit.qr.compute(A);
  return fit;
}

// Evaluation site: a registered intersection or a boundary node.
struct Site {
  const BoundaryFrame* frame = nullptr;
  double t = 0.0;               // 2D spline parameter
  int tri = -1;                 // 3D triangle ...
  double b1 = 0.0, b2 = 0.0;    // ... with barycentric coordinates
  int vertex = -1;              // >= 0 for node sites in 3D
};

void jumps_2d(const std::vector<double>& psi, const BoundaryCurve& curve, const Vec3& D,
              const std::vector<Site>& sites, std::vector<ComponentJumps>& out) {
  const int m = curve.num_nodes();
  const PeriodicSpline sp(psi);

  std::vector<double> gx(m), gy(m);
  for (int j = 0; j < m; ++j) {
    const Vec3 g = first_jumps_2d(curve.frame(curve.node_param(j)), D, psi[j], j);
    gx[j] = g[0];
    gy[j] = g[1];
  }
  const PeriodicSpline spx(gx), spy(gy);

  out.resize(sites.size());
  for (size_t s = 0; s < sites.size(); ++s) {
    const Site& site = sites[s];
    ComponentJumps rec;
    rec.grad = first_jumps_2d(*site.frame, D, sp.eval(site.t), static_cast<long>(s));
    const double speed = curve.speed(site.t);
    rec.hess = second_jumps_2d(*site.frame, D, spx.deriv(site.t) / speed,
                               spy.deriv(site.t) / speed, static_cast<long>(s));
    out[s] = rec;
  }
}

void jumps_3d(const std::vector<double>& psi, const TriMesh& mesh,
              const std::vector<VertexFit>& fits, const Vec3& D, const std::vector<Site>& sites,
              std::vector<ComponentJumps>& out) {
  const int m = mesh.num_vertices();

  std::array<std::vector<double>, 3> g;
  for (auto& v : g) v.resize(m);
  for (int j = 0; j < m; ++j) {
    const Vec3 fj = first_jumps_3d(fits[j].frame, D, psi[j], j);
    for (int k = 0; k < 3; ++k) g[k][j] = fj[k];
  }
  std::array<std::vector<Vec3>, 3> sg;
  for (int k = 0; k < 3; ++k) {
    sg[k].resize(m);
    for (int j = 0; j < m; ++j) sg[k][j] = fits[j].gradient(mesh, g[k]);
  }

  auto interp = [&](const auto& field, const Site& site) {
    if (site.vertex >= 0) return field[site.vertex];
    const Index3& t = mesh.triangle(site.tri);
    return (1.0 - site.b1 - site.b2) * field[t[0]] + site.b1 * field[t[1]] +
           site.b2 * field[t[2]];
  };

  out.resize(sites.size());
  for (size_t s = 0; s < sites.size(); ++s) {
    const Site& site = sites[s];
    const BoundaryFrame& fr = site.vertex >= 0 ? fits[site.vertex].frame : *site.frame;
    ComponentJumps rec;
    rec.grad = first_jumps_3d(fr, D, interp(psi, site), static_cast<long>(s));
    const std::array<Vec3, 3> sgs{interp(sg[0], site), interp(sg[1], site),
                                  interp(sg[2], site)};
    rec.hess = second_jumps_3d(fr, D, sgs);
    out[s] = rec;
  }
}

JumpTable jumps_at_sites(const Density& psi, const BoundaryGeometry& geo,
                         const DiffusionParams& params, const std::vector<Site>& sites) {
  require(psi.size() == geo.num_nodes(), "jumps: density length must match boundary nodes");
  JumpTable table;
  if (geo.dim() == 2) {
    jumps_2d(psi.i, geo.curve(), params.intra, sites, table.i);
    jumps_2d(psi.e, geo.curve(), params.extra, sites, table.e);
  } else {
    const TriMesh& mesh = geo.mesh();
    std::vector<VertexFit> fits;
    fits.reserve(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) fits.push_back(make_vertex_fit(mesh, v));
    jumps_3d(psi.i, mesh, fits, params.intra, sites, table.i);
    jumps_3d(psi.e, mesh, fits, params.extra, sites, table.e);
  }
  return table;
}

}  // namespace

double jump_polynomial(const ComponentJumps& j, const Vec3& d) {
  const double quad = j.hess[0] * d[0] * d[0] + j.hess[1] * d[1] * d[1] +
                      j.hess[2] * d[2] * d[2] +
                      2.0 * (j.hess[kXY] * d[0] * d[1] + j.hess[kXZ] * d[0] * d[2] +
                             j.hess[kYZ] * d[1] * d[2]);
  return j.value + dot(j.grad, d) + 0.5 * quad;
}

double axis_jump_polynomial(const ComponentJumps& j, int axis, double d) {
  return j.value + j.grad[axis] * d + 0.5 * j.hess[axis] * d * d;
}

std::vector<Vec3> density_surface_derivative(const std::vector<double>& values,
                                             const BoundaryGeometry& geometry) {
  require(static_cast<int>(values.size()) == geometry.num_nodes(),
          "surface derivative: value count must match boundary nodes");
  std::vector<Vec3> out(values.size());
  if (geometry.dim() == 2) {
    const BoundaryCurve& c = geometry.curve();
    const PeriodicSpline sp(values);
    for (int j = 0; j < c.num_nodes(); ++j) {
      const double t = c.node_param(j);
      out[j] = (sp.deriv(t) / c.speed(t)) * c.frame(t).tangent1;
    }
  } else {
    const TriMesh& mesh = geometry.mesh();
    for (int v = 0; v < mesh.num_vertices(); ++v)
      out[v] = make_vertex_fit(mesh, v).gradient(mesh, values);
  }
  return out;
}

JumpTable jumps_from_density(const Density& psi, const BoundaryGeometry& geometry,
                             const Embedding& embedding, const DiffusionParams& params) {
  std::vector<Site> sites(embedding.cuts.size());
  for (size_t c = 0; c < embedding.cuts.size(); ++c) {
    const Intersection& cut = embedding.cuts[c];
    sites[c].frame = &cut.frame;
    sites[c].t = cut.curve_param;
    sites[c].tri = cut.triangle;
    sites[c].b1 = cut.b1;
    sites[c].b2 = cut.b2;
  }
  return jumps_at_sites(psi, geometry, params, sites);
}

JumpTable boundary_node_jumps(const Density& psi, const BoundaryGeometry& geometry,
                              const DiffusionParams& params) {
  std::vector<Site> sites(geometry.num_nodes());
  std::vector<BoundaryFrame> frames;
  if (geometry.dim() == 2) {
    const BoundaryCurve& c = geometry.curve();
    frames.resize(c.num_nodes());
    for (int j = 0; j < c.num_nodes(); ++j) {
      frames[j] = c.frame(c.node_param(j));
      sites[j].frame = &frames[j];
      sites[j].t = c.node_param(j);
    }
  } else {
    for (int v = 0; v < geometry.num_nodes(); ++v) sites[v].vertex = v;
  }
  return jumps_at_sites(psi, geometry, params, sites);
}

void CorrectionSet::add_to(FieldPair& f) const {
  for (const auto& [node, inc] : rhs) {
    f.i[node] += inc[0];
    f.e[node] += inc[1];
  }
}

CorrectionSet correction_set(const JumpTable& jumps_at_cuts, const Embedding& embedding,
                             const DiffusionParams& params) {
  require(jumps_at_cuts.size() == static_cast<int>(embedding.cuts.size()),
          "corrections: need one jump record per intersection");
  const CartesianGrid& g = embedding.grid;
  const double inv_h2 = 1.0 / (g.h * g.h);
  const long n = g.nodes_per_axis();
  const long stride[3] = {1, n, n * n};

  CorrectionSet out;
  auto add = [&out](long node, int comp, double v) {
    if (v == 0.0) return;
    out.rhs[node][comp] += v;
  };
  for (size_t c = 0; c < embedding.cuts.size(); ++c) {
    const Intersection& cut = embedding.cuts[c];
    const long lo = g.index(cut.base[0], cut.base[1], cut.base[2]);
    const long hi = lo + stride[cut.axis];
    const double d_lo = -cut.offset;          // signed offsets from the cut
    const double d_hi = g.h - cut.offset;     // to the two end nodes
    for (int comp = 0; comp < 2; ++comp) {
      const double coef = (comp == 0 ? params.intra : params.extra)[cut.axis];
      const ComponentJumps& rec = comp == 0 ? jumps_at_cuts.i[c] : jumps_at_cuts.e[c];
      const double at_hi = coef * inv_h2 * axis_jump_polynomial(rec, cut.axis, d_hi);
      const double at_lo = coef * inv_h2 * axis_jump_polynomial(rec, cut.axis, d_lo);
      add(lo, comp, embedding.inside[lo] ? -at_hi : at_hi);
      add(hi, comp, embedding.inside[hi] ? -at_lo : at_lo);
    }
  }
  return out;
}

}  // namespace kfbi
