#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "kfbi/core.hpp"
#include "kfbi/embedding.hpp"
#include "kfbi/fft_elliptic.hpp"
#include "kfbi/frame.hpp"
#include "kfbi/geometry.hpp"
#include "kfbi/grid.hpp"
#include "kfbi/jumps.hpp"

namespace kfbi {

// One-sided interpolation stencil at a boundary point: 6 grid nodes in 2D,
// 10 in 3D.  Offsets are stored scaled by 1/h so the interpolation system is
// independent of refinement.
struct StencilSelection {
  int count = 0;
  std::array<long, 10> nodes{};    // grid linear indices
  std::array<bool, 10> outside{};  // sample lies outside Omega -> needs jump compensation
  std::array<Vec3, 10> scaled{};   // (x_j - q)/h
};

// Pick stencil nodes for the point q: candidates are the grid block nearest q,
// sorted by distance; nodes are taken greedily while the scaled Vandermonde
// stays well conditioned (<= 1e4).  On failure the block is enlarged once.
// node_id only labels error messages.
StencilSelection select_stencil(const Vec3& q, const CartesianGrid& grid,
                                const Embedding& emb, int node_id = -1);

// Interior limit of one field component at a boundary node.
struct SideLimits {
  double value = 0.0;
  Vec3 grad{};
  double conormal = 0.0;  // n . D grad u
};

struct PairLimits {
  SideLimits i, e;
};

// Stencils, factorized interpolation systems and frames for every node of one
// boundary on one grid.  Building it is geometry work only; extraction against
// a field is then a small matrix-vector product per node.
struct ExtractionPlan {
  int dim = 2;
  double h = 0.0;
  std::vector<StencilSelection> stencils;
  std::vector<Eigen::MatrixXd> inverse;  // inverse scaled Vandermonde per node
  std::vector<BoundaryFrame> frames;

  int size() const { return static_cast<int>(stencils.size()); }
};

ExtractionPlan build_extraction_plan(const BoundaryGeometry& geo,
                                     const CartesianGrid& grid,
                                     const Embedding& emb);

// Recover interior limits (value, gradient, conormal derivative) of both
// components at boundary node `node`.  Stencil samples outside Omega are
// compensated with the quadratic jump polynomial of that node's jump record,
// so the fit sees a smooth interior extension.
PairLimits extract_limits(const ExtractionPlan& plan, int node, const FieldPair& u,
                          const JumpTable& node_jumps, const DiffusionParams& params);

std::vector<PairLimits> extract_all(const ExtractionPlan& plan, const FieldPair& u,
                                    const JumpTable& node_jumps,
                                    const DiffusionParams& params);

}  // namespace kfbi
