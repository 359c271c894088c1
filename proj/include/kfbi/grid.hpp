#pragma once

#include <vector>

#include "kfbi/core.hpp"

namespace kfbi {

// Uniform node-centered grid over the box B: (I+1)^dim nodes, equal spacing h
// on every axis. x runs fastest in the linear node ordering.
struct CartesianGrid {
  int dim = 2;
  int cells = 0;       // I: cells per axis
  Vec3 low{};          // box corner
  double h = 0.0;

  CartesianGrid(int dim_, int cells_, const Vec3& low_, const Vec3& high_) {
    require(dim_ == 2 || dim_ == 3, "grid: dim must be 2 or 3");
    require(cells_ >= 8, "grid: need at least 8 cells per axis");
    dim = dim_;
    cells = cells_;
    low = low_;
    h = (high_[0] - low_[0]) / cells_;
    require(h > 0.0, "grid: box extent must be positive");
    for (int d = 1; d < dim_; ++d)
      require(std::abs((high_[d] - low_[d]) / cells_ - h) <= 1e-12 * h,
              "grid: box must have equal extent on every axis");
  }

  int nodes_per_axis() const { return cells + 1; }
  long num_nodes() const {
    long n = nodes_per_axis();
    return dim == 2 ? n * n : n * n * n;
  }
  long index(int k, int l, int m = 0) const {
    const long n = nodes_per_axis();
    return dim == 2 ? l * n + k : (static_cast<long>(m) * n + l) * n + k;
  }
  Index3 unindex(long id) const {
    const long n = nodes_per_axis();
    Index3 r{};
    r[0] = static_cast<int>(id % n);
    r[1] = static_cast<int>((id / n) % n);
    r[2] = dim == 3 ? static_cast<int>(id / (n * n)) : 0;
    return r;
  }
  Vec3 node(int k, int l, int m = 0) const {
    return {low[0] + k * h, low[1] + l * h, dim == 3 ? low[2] + m * h : 0.0};
  }
  Vec3 node(const Index3& i) const { return node(i[0], i[1], i[2]); }
  bool is_box_boundary(const Index3& i) const {
    for (int d = 0; d < dim; ++d)
      if (i[d] == 0 || i[d] == cells) return true;
    return false;
  }
};

// Intracellular/extracellular component pair over all grid nodes.
struct FieldPair {
  std::vector<double> i, e;

  FieldPair() = default;
  explicit FieldPair(long n) : i(n, 0.0), e(n, 0.0) {}

  long size() const { return static_cast<long>(i.size()); }

  FieldPair& operator+=(const FieldPair& o) {
    for (long k = 0; k < size(); ++k) {
      i[k] += o.i[k];
      e[k] += o.e[k];
    }
    return *this;
  }
};

}  // namespace kfbi
