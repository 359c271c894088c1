#include "kfbi/trimesh.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace kfbi {

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Index3> triangles)
    : verts_(std::move(vertices)), tris_(std::move(triangles)) {
  validate_and_orient();
  build_adjacency();
}

Vec3 TriMesh::face_normal(int f) const {
  const auto& t = tris_[f];
  return normalized(cross(verts_[t[1]] - verts_[t[0]], verts_[t[2]] - verts_[t[0]]));
}

double TriMesh::enclosed_volume() const {
  double vol = 0.0;
  for (const auto& t : tris_) vol += dot(verts_[t[0]], cross(verts_[t[1]], verts_[t[2]])) / 6.0;
  return vol;
}

void TriMesh::validate_and_orient() {
  const int nv = num_vertices(), nt = num_triangles();
  require(nv >= 4 && nt >= 4, "mesh: too few vertices or triangles");
  for (const auto& t : tris_) {
    for (int i = 0; i < 3; ++i)
      require(t[i] >= 0 && t[i] < nv, "mesh: triangle vertex index out of range");
    require(t[0] != t[1] && t[1] != t[2] && t[0] != t[2], "mesh: degenerate triangle");
  }

  // Closed manifold with consistent orientation: every directed edge appears
  // exactly once, and its reverse exactly once.
  std::set<std::pair<int, int>> directed;
  for (const auto& t : tris_) {
    for (int i = 0; i < 3; ++i) {
      const auto e = std::make_pair(t[i], t[(i + 1) % 3]);
      require(directed.insert(e).second, "mesh: inconsistent orientation or non-manifold edge");
    }
  }
  for (const auto& e : directed)
    require(directed.count({e.second, e.first}) == 1, "mesh: open surface (unmatched edge)");

  if (enclosed_volume() < 0.0)
    for (auto& t : tris_) std::swap(t[1], t[2]);  // normalize normals to point outward
}

void TriMesh::build_adjacency() {
  const int nv = num_vertices(), nt = num_triangles();
  std::map<std::pair<int, int>, std::pair<int, int>> edge_tris;  // undirected edge -> (tri, tri)
  for (int f = 0; f < nt; ++f) {
    const auto& t = tris_[f];
    for (int i = 0; i < 3; ++i) {
      auto key = std::minmax(t[(i + 1) % 3], t[(i + 2) % 3]);
      auto it = edge_tris.find(key);
      if (it == edge_tris.end())
        edge_tris[key] = {f, -1};
      else
        it->second.second = f;
    }
  }
  tri_neighbor_.assign(nt, {-1, -1, -1});
  for (int f = 0; f < nt; ++f) {
    const auto& t = tris_[f];
    for (int i = 0; i < 3; ++i) {
      auto key = std::minmax(t[(i + 1) % 3], t[(i + 2) % 3]);
      const auto& pr = edge_tris.at(key);
      tri_neighbor_[f][i] = (pr.first == f) ? pr.second : pr.first;
    }
  }

  vert_ring_.assign(nv, {});
  std::vector<std::set<int>> ring(nv);
  for (const auto& t : tris_)
    for (int i = 0; i < 3; ++i) {
      ring[t[i]].insert(t[(i + 1) % 3]);
      ring[t[i]].insert(t[(i + 2) % 3]);
    }
  for (int v = 0; v < nv; ++v) vert_ring_[v].assign(ring[v].begin(), ring[v].end());

  vert_nbhd_.assign(nv, {});
  for (int v = 0; v < nv; ++v) {
    std::set<int> nb(ring[v].begin(), ring[v].end());
    nb.insert(v);
    if (nb.size() < 6)  // extend by the second ring until the fit is determined
      for (int w : ring[v]) nb.insert(ring[w].begin(), ring[w].end());
    vert_nbhd_[v].assign(nb.begin(), nb.end());
  }
}

std::vector<int> TriMesh::triangle_neighborhood(int f) const {
  // The triangle's own vertices plus the opposite vertex of each edge neighbor.
  std::vector<int> pts(tris_[f].begin(), tris_[f].end());
  for (int i = 0; i < 3; ++i) {
    const int g = tri_neighbor_[f][i];
    if (g < 0) continue;
    for (int k = 0; k < 3; ++k) {
      const int v = tris_[g][k];
      if (std::find(pts.begin(), pts.end(), v) == pts.end()) pts.push_back(v);
    }
  }
  return pts;
}

BoundaryFrame TriMesh::fit_frame(const Vec3& origin, const Vec3& n0, const std::vector<int>& pts,
                                 const Vec3& query) const {
  BoundaryFrame fr;
  fr.position = query;

  // provisional in-plane basis
  Vec3 a = (std::abs(n0[0]) < 0.9) ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 e1 = normalized(a - dot(a, n0) * n0);
  Vec3 e2 = cross(n0, e1);

  auto fallback = [&]() {
    fr.normal = n0;
    fr.tangent1 = e1;
    fr.tangent2 = e2;
    fr.curvature1 = fr.curvature2 = 0.0;
    fr.degenerate = true;
    return fr;
  };

  const int n = static_cast<int>(pts.size());
  if (n < 6) return fallback();

  double radius = 0.0;
  for (int id : pts) radius = std::max(radius, norm(verts_[id] - origin));
  if (radius == 0.0) return fallback();

  Eigen::MatrixXd A(n, 6);
  Eigen::VectorXd z(n);
  for (int r = 0; r < n; ++r) {
    const Vec3 d = verts_[pts[r]] - origin;
    const double xi = dot(d, e1) / radius, eta = dot(d, e2) / radius;
    A.row(r) << 1.0, xi, eta, 0.5 * xi * xi, xi * eta, 0.5 * eta * eta;
    z(r) = dot(d, n0) / radius;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues()(5) < 1e-8 * svd.singularValues()(0)) return fallback();
  Eigen::VectorXd c = svd.solve(z);
  if ((A * c - z).cwiseAbs().maxCoeff() > 0.05) return fallback();  // non-smooth neighborhood

  const Vec3 dq = query - origin;
  const double xq = dot(dq, e1) / radius, yq = dot(dq, e2) / radius;
  const double zx = (c(1) + c(3) * xq + c(4) * yq);                 // dz/dxi at query (scaled)
  const double zy = (c(2) + c(4) * xq + c(5) * yq);
  const double zxx = c(3) / radius, zxy = c(4) / radius, zyy = c(5) / radius;

  Vec3 sx = e1 + zx * n0;  // d(surface)/dxi, unscaled lengths
  Vec3 sy = e2 + zy * n0;
  Vec3 nrm = normalized(cross(sx, sy));
  if (dot(nrm, n0) < 0.0) nrm = -1.0 * nrm;
  fr.normal = nrm;
  fr.tangent1 = normalized(sx);
  fr.tangent2 = normalized(cross(nrm, fr.tangent1));

  // shape operator of the height fit; sign so a sphere with outward normal is positive
  const double E = 1.0 + zx * zx, F = zx * zy, G = 1.0 + zy * zy;
  const double w = std::sqrt(1.0 + zx * zx + zy * zy);
  const double L = zxx / w, M = zxy / w, N = zyy / w;
  const double det1 = E * G - F * F;
  const double s11 = (G * L - F * M) / det1, s12 = (G * M - F * N) / det1;
  const double s21 = (E * M - F * L) / det1, s22 = (E * N - F * M) / det1;
  const double tr = s11 + s22, dt = s11 * s22 - s12 * s21;
  const double disc = std::max(0.0, tr * tr - 4.0 * dt);
  fr.curvature1 = -(tr + std::sqrt(disc)) / 2.0;
  fr.curvature2 = -(tr - std::sqrt(disc)) / 2.0;
  return fr;
}

namespace {
// A 6-point neighborhood is interpolated exactly by the quadratic, so fit
// residuals cannot expose corners/creases; check face-normal agreement first.
constexpr double kCreaseCos = 0.75;
}

BoundaryFrame TriMesh::vertex_frame(int v) const {
  Vec3 n{0, 0, 0};
  std::vector<int> incident;
  for (int f = 0; f < num_triangles(); ++f) {
    const auto& t = tris_[f];
    if (t[0] == v || t[1] == v || t[2] == v) {
      const Vec3 fn = cross(verts_[t[1]] - verts_[t[0]], verts_[t[2]] - verts_[t[0]]);
      n = n + fn;  // area weighting
      incident.push_back(f);
    }
  }
  const Vec3 nbar = normalized(n);
  bool crease = false;
  for (int f : incident)
    if (dot(face_normal(f), nbar) < kCreaseCos) crease = true;
  BoundaryFrame fr = fit_frame(verts_[v], nbar, crease ? std::vector<int>{} : vert_nbhd_[v],
                               verts_[v]);
  return fr;
}

BoundaryFrame TriMesh::triangle_frame(int f, const Vec3& p) const {
  const Vec3 n0 = face_normal(f);
  bool crease = false;
  for (int i = 0; i < 3; ++i) {
    const int g = tri_neighbor_[f][i];
    if (g >= 0 && dot(face_normal(g), n0) < kCreaseCos) crease = true;
  }
  return fit_frame(verts_[tris_[f][0]], n0, crease ? std::vector<int>{} : triangle_neighborhood(f), p);
}

bool TriMesh::contains(const Vec3& p) const {
  // Parity of ray crossings; deterministic direction retries on grazing hits.
  static const double tilts[][3] = {
      {1.0, 0.0, 0.0}, {0.9631, 0.2236, 0.1492}, {0.8127, -0.4921, 0.3118}, {0.5443, 0.3361, -0.7687}};
  for (const auto& d : tilts) {
    const Vec3 dir{d[0], d[1], d[2]};
    int crossings = 0;
    bool degenerate = false;
    for (int f = 0; f < num_triangles() && !degenerate; ++f) {
      const auto& t = tris_[f];
      const Vec3 v0 = verts_[t[0]], e1 = verts_[t[1]] - v0, e2 = verts_[t[2]] - v0;
      const Vec3 pv = cross(dir, e2);
      const double det = dot(e1, pv);
      if (std::abs(det) < 1e-300) continue;
      const Vec3 tv = p - v0;
      const double u = dot(tv, pv) / det;
      const Vec3 qv = cross(tv, e1);
      const double v = dot(dir, qv) / det;
      const double s = dot(e2, qv) / det;
      if (u < -1e-12 || v < -1e-12 || u + v > 1.0 + 1e-12 || s <= 0.0) continue;
      if (u < 1e-12 || v < 1e-12 || u + v > 1.0 - 1e-12) {
        degenerate = true;  // grazing an edge or vertex: retry with a tilted ray
        break;
      }
      ++crossings;
    }
    if (!degenerate) return (crossings % 2) == 1;
  }
  throw Error("mesh contains(): ray test degenerate for all retry directions");
}

TriMesh read_off(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open OFF file: " + path);
  auto next_line = [&](std::string& line) {
    while (std::getline(in, line)) {
      const auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      return true;
    }
    return false;
  };
  std::string line;
  require(next_line(line), "OFF: empty file: " + path);
  {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    require(tag == "OFF", "OFF: missing header in " + path);
  }
  require(next_line(line), "OFF: missing counts line");
  long nv = -1, nf = -1, ne = 0;
  {
    std::istringstream ss(line);
    ss >> nv >> nf >> ne;
    require(!ss.fail() && nv > 0 && nf > 0, "OFF: malformed counts line");
  }
  std::vector<Vec3> verts(nv);
  for (long i = 0; i < nv; ++i) {
    require(next_line(line), "OFF: truncated vertex list");
    std::istringstream ss(line);
    ss >> verts[i][0] >> verts[i][1] >> verts[i][2];
    require(!ss.fail(), "OFF: malformed vertex line " + std::to_string(i));
  }
  std::vector<Index3> tris(nf);
  for (long i = 0; i < nf; ++i) {
    require(next_line(line), "OFF: truncated face list");
    std::istringstream ss(line);
    int k;
    ss >> k;
    require(!ss.fail() && k == 3, "OFF: only triangle faces are supported (face " +
                                      std::to_string(i) + ")");
    ss >> tris[i][0] >> tris[i][1] >> tris[i][2];
    require(!ss.fail(), "OFF: malformed face line " + std::to_string(i));
  }
  return TriMesh(std::move(verts), std::move(tris));
}

void write_off(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot write OFF file: " + path);
  out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_triangles() << " 0\n";
  out.precision(17);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const auto& p = mesh.vertex(v);
    out << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
  }
  for (int f = 0; f < mesh.num_triangles(); ++f) {
    const auto& t = mesh.triangle(f);
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  require(out.good(), "failed writing OFF file: " + path);
}

}  // namespace kfbi
