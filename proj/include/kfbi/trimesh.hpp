#pragma once

#include <string>
#include <vector>

#include "kfbi/frame.hpp"

namespace kfbi {

// Closed, consistently oriented triangle mesh boundary. Orientation is
// normalized so triangle normals point outward (positive enclosed volume).
class TriMesh {
 public:
  TriMesh(std::vector<Vec3> vertices, std::vector<Index3> triangles);

  int num_vertices() const { return static_cast<int>(verts_.size()); }
  int num_triangles() const { return static_cast<int>(tris_.size()); }
  const Vec3& vertex(int v) const { return verts_[v]; }
  const Index3& triangle(int f) const { return tris_[f]; }

  Vec3 face_normal(int f) const;  // unit, outward

  // Local frame from a least-squares quadratic height fit over the point's
  // neighborhood: for a vertex its ring (extended until >= 6 points), for a
  // triangle the classic six surrounding points (its vertices plus the
  // opposite vertices of the three edge neighbors). Non-smooth or
  // rank-deficient neighborhoods fall back to the face/averaged normal with
  // zero curvature and degenerate=true.
  BoundaryFrame vertex_frame(int v) const;
  BoundaryFrame triangle_frame(int f, const Vec3& p) const;

  // Fit-neighborhood vertex ids (used for tangential derivative fits).
  const std::vector<int>& vertex_neighborhood(int v) const { return vert_nbhd_[v]; }
  std::vector<int> triangle_neighborhood(int f) const;

  // parity of ray crossings along +x with deterministic retry on degenerate hits
  bool contains(const Vec3& p) const;

  // Ray p + s*dir, s in (0, smax]: all crossing parameters (dedup within tol).
  // axis variant used by the embedding: dir = unit coordinate axis.
  struct Hit {
    double s;      // distance along the ray
    int triangle;  // face index
    double b1, b2; // barycentric coordinates w.r.t. triangle vertices 1 and 2
  };
  std::vector<Hit> axis_hits(const Vec3& origin, int axis, double smax, double merge_tol) const;

  double enclosed_volume() const;

 private:
  void validate_and_orient();
  void build_adjacency();
  BoundaryFrame fit_frame(const Vec3& origin, const Vec3& provisional_normal,
                          const std::vector<int>& pts, const Vec3& query) const;

  std::vector<Vec3> verts_;
  std::vector<Index3> tris_;
  std::vector<std::array<int, 3>> tri_neighbor_;  // across edge opposite to local vertex
  std::vector<std::vector<int>> vert_ring_;       // one-ring vertex ids
  std::vector<std::vector<int>> vert_nbhd_;       // ring extended to >= 6 points
};

TriMesh read_off(const std::string& path);
void write_off(const TriMesh& mesh, const std::string& path);

}  // namespace kfbi
