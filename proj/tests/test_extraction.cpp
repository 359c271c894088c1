#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <tuple>

#include <Eigen/SVD>

#include "doctest.h"
#include "kfbi/extraction.hpp"
#include "kfbi/geometry.hpp"
#include "support.hpp"

using namespace kfbi;

namespace {

const DiffusionParams kIso2{{1, 1, 0}, {1, 1, 0}, 0.0};
const DiffusionParams kAniso2{{30, 5, 0}, {20, 10, 0}, 1000.0};
const DiffusionParams kAniso3{{30, 5, 5}, {20, 10, 10}, 1000.0};

CartesianGrid grid2(int cells) { return {2, cells, {-1, -1, 0}, {1, 1, 0}}; }

JumpTable zero_jumps(int m) {
  JumpTable t;
  t.i.resize(m);
  t.e.resize(m);
  return t;
}

template <class Fi, class Fe>
FieldPair sample_pair(const CartesianGrid& g, Fi fi, Fe fe) {
  FieldPair u(g.num_nodes());
  for (long n = 0; n < g.num_nodes(); ++n) {
    const Vec3 p = g.node(g.unindex(n));
    u.i[n] = fi(p);
    u.e[n] = fe(p);
  }
  return u;
}

// Independent conditioning referee: rebuild the scaled Vandermonde and run an
// SVD on it.
double stencil_condition(const StencilSelection& sel, int dim) {
  const int nb = dim == 2 ? 6 : 10;
  Eigen::MatrixXd a(sel.count, nb);
  for (int j = 0; j < sel.count; ++j) {
    const Vec3& s = sel.scaled[j];
    if (dim == 2) {
      a.row(j) << 1.0, s[0], s[1], 0.5 * s[0] * s[0], s[0] * s[1], 0.5 * s[1] * s[1];
    } else {
      a.row(j) << 1.0, s[0], s[1], s[2], 0.5 * s[0] * s[0], 0.5 * s[1] * s[1],
          0.5 * s[2] * s[2], s[0] * s[1], s[0] * s[2], s[1] * s[2];
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0) / svd.singularValues()(nb - 1);
}

double bilinear(const std::vector<double>& f, const CartesianGrid& g, const Vec3& q) {
  const double ax = (q[0] - g.low[0]) / g.h, ay = (q[1] - g.low[1]) / g.h;
  const int i = std::min(static_cast<int>(std::floor(ax)), g.cells - 1);
  const int j = std::min(static_cast<int>(std::floor(ay)), g.cells - 1);
  const double fx = ax - i, fy = ay - j;
  return (1 - fx) * (1 - fy) * f[g.index(i, j)] + fx * (1 - fy) * f[g.index(i + 1, j)] +
         (1 - fx) * fy * f[g.index(i, j + 1)] + fx * fy * f[g.index(i + 1, j + 1)];
}

}  // namespace

TEST_CASE("stencil at a point sitting on a grid node keeps that node") {
  const CartesianGrid g = grid2(32);
  const BoundaryGeometry geo = preset_shape("circle", 128);
  const Embedding emb = build_embedding(geo, g);
  const Vec3 q = g.node(18, 20);  // (0.125, 0.25), well inside
  const StencilSelection sel = select_stencil(q, g, emb);
  REQUIRE(sel.count == 6);
  int hits = 0;
  std::set<long> distinct;
  for (int j = 0; j < sel.count; ++j) {
    distinct.insert(sel.nodes[j]);
    if (norm(sel.scaled[j]) < 1e-12) ++hits;
  }
  CHECK(hits == 1);
  CHECK(distinct.size() == 6);
}

TEST_CASE("stencil at a cell center: the four corners plus two next-nearest") {
  const CartesianGrid g = grid2(32);
  const BoundaryGeometry geo = preset_shape("circle", 128);
  const Embedding emb = build_embedding(geo, g);
  const Vec3 q{g.node(18, 20)[0] + 0.5 * g.h, g.node(18, 20)[1] + 0.5 * g.h, 0};
  const StencilSelection sel = select_stencil(q, g, emb);
  REQUIRE(sel.count == 6);
  int corners = 0, ring = 0;
  double dmax = 0;
  for (int j = 0; j < sel.count; ++j) {
    const double d2 = dot(sel.scaled[j], sel.scaled[j]);
    dmax = std::max(dmax, std::sqrt(d2));
    if (std::abs(d2 - 0.5) < 1e-12) ++corners;
    if (std::abs(d2 - 2.5) < 1e-12) ++ring;
  }
  CHECK(corners == 4);
  CHECK(ring == 2);
  CHECK(dmax < 1.9);
  CHECK(stencil_condition(sel, 2) < 1e4);
}

TEST_CASE("random points on the circle always admit a well conditioned stencil") {
  const CartesianGrid g = grid2(128);
  const BoundaryGeometry geo = preset_shape("circle", 256);
  const Embedding emb = build_embedding(geo, g);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  double cmax = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const double t = angle(rng);
    const Vec3 q{0.8 * std::cos(t), 0.8 * std::sin(t), 0};
    const StencilSelection sel = select_stencil(q, g, emb, trial);
    REQUIRE(sel.count == 6);
    std::set<long> distinct;
    for (int j = 0; j < sel.count; ++j) {
      distinct.insert(sel.nodes[j]);
      const Index3 idx = g.unindex(sel.nodes[j]);
      const Vec3 p = g.node(idx);
      CHECK(norm(p - (q + g.h * sel.scaled[j])) < 1e-11);
      CHECK(sel.outside[j] == !emb.inside[sel.nodes[j]]);
    }
    CHECK(distinct.size() == 6);
    cmax = std::max(cmax, stencil_condition(sel, 2));
  }
  MESSAGE("sweep max condition=", cmax);
  CHECK(cmax < 1e4);
}

TEST_CASE("quadratics are reproduced exactly at every boundary node in 2D") {
  auto ui = [](const Vec3& p) {
    return 1 + 2 * p[0] - p[1] + 0.5 * p[0] * p[0] + 0.25 * p[0] * p[1] - 0.75 * p[1] * p[1];
  };
  auto gi = [](const Vec3& p) -> Vec3 {
    return {2 + p[0] + 0.25 * p[1], -1 + 0.25 * p[0] - 1.5 * p[1], 0};
  };
  auto ue = [](const Vec3& p) {
    return -0.5 + p[0] + 2 * p[1] - 0.25 * p[0] * p[0] + 0.75 * p[0] * p[1] + 0.5 * p[1] * p[1];
  };
  auto ge = [](const Vec3& p) -> Vec3 {
    return {1 - 0.5 * p[0] + 0.75 * p[1], 2 + 0.75 * p[0] + p[1], 0};
  };
  for (const char* shape : {"circle", "heart"}) {
    for (const int cells : {32, 64}) {
      const CartesianGrid g = grid2(cells);
      const BoundaryGeometry geo = preset_shape(shape, 256);
      const Embedding emb = build_embedding(geo, g);
      const ExtractionPlan plan = build_extraction_plan(geo, g, emb);
      const FieldPair u = sample_pair(g, ui, ue);
      const JumpTable jt = zero_jumps(geo.num_nodes());
      double worst = 0;
      for (int j = 0; j < geo.num_nodes(); ++j) {
        const Vec3 q = geo.node(j);
        const BoundaryFrame f = geo.node_frame(j);
        const PairLimits lim = extract_limits(plan, j, u, jt, kAniso2);
        worst = std::max(worst, std::abs(lim.i.value - ui(q)));
        worst = std::max(worst, std::abs(lim.e.value - ue(q)));
        worst = std::max(worst, norm(lim.i.grad - gi(q)));
        worst = std::max(worst, norm(lim.e.grad - ge(q)));
        const Vec3 gq = gi(q);
        const double cn = kAniso2.intra[0] * f.normal[0] * gq[0] +
                          kAniso2.intra[1] * f.normal[1] * gq[1];
        worst = std::max(worst, std::abs(lim.i.conormal - cn));
      }
      MESSAGE(std::string(shape), " I=", cells, " quadratic extraction error=", worst);
      CHECK(worst < 1e-9);
    }
  }
}

TEST_CASE("quadratics are reproduced exactly at every vertex in 3D") {
  auto ui = [](const Vec3& p) {
    return 1 + p[0] - 2 * p[1] + 0.5 * p[2] + 0.3 * p[0] * p[0] - 0.2 * p[1] * p[1] +
           0.4 * p[2] * p[2] + 0.25 * p[0] * p[1] - 0.15 * p[0] * p[2] + 0.35 * p[1] * p[2];
  };
  auto gi = [](const Vec3& p) -> Vec3 {
    return {1 + 0.6 * p[0] + 0.25 * p[1] - 0.15 * p[2],
            -2 - 0.4 * p[1] + 0.25 * p[0] + 0.35 * p[2],
            0.5 + 0.8 * p[2] - 0.15 * p[0] + 0.35 * p[1]};
  };
  auto ue = [](const Vec3& p) {
    return -1 + 2 * p[0] + p[1] - p[2] + 0.1 * p[0] * p[0] + 0.5 * p[1] * p[1] -
           0.3 * p[2] * p[2] - 0.45 * p[0] * p[1] + 0.05 * p[0] * p[2] + 0.2 * p[1] * p[2];
  };
  auto ge = [](const Vec3& p) -> Vec3 {
    return {2 + 0.2 * p[0] - 0.45 * p[1] + 0.05 * p[2],
            1 + p[1] - 0.45 * p[0] + 0.2 * p[2],
            -1 - 0.6 * p[2] + 0.05 * p[0] + 0.2 * p[1]};
  };
  for (const int cells : {24, 32}) {
    const CartesianGrid g(3, cells, {-1, -1, -1}, {1, 1, 1});
    const BoundaryGeometry geo(preset_sphere(1026));
    const Embedding emb = build_embedding(geo, g);
    const ExtractionPlan plan = build_extraction_plan(geo, g, emb);
    const FieldPair u = sample_pair(g, ui, ue);
    const JumpTable jt = zero_jumps(geo.num_nodes());
    double worst = 0;
    for (int j = 0; j < geo.num_nodes(); ++j) {
      const Vec3 q = geo.node(j);
      const BoundaryFrame f = geo.node_frame(j);
      const PairLimits lim = extract_limits(plan, j, u, jt, kAniso3);
      worst = std::max(worst, std::abs(lim.i.value - ui(q)));
      worst = std::max(worst, std::abs(lim.e.value - ue(q)));
      worst = std::max(worst, norm(lim.i.grad - gi(q)));
      worst = std::max(worst, norm(lim.e.grad - ge(q)));
      double cn = 0;
      const Vec3 gq = ge(q);
      for (int d = 0; d < 3; ++d) cn += kAniso3.extra[d] * f.normal[d] * gq[d];
      worst = std::max(worst, std::abs(lim.e.conormal - cn));
    }
    MESSAGE("sphere I=", cells, " quadratic extraction error=", worst);
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("exterior samples are compensated through the jump polynomial") {
  const CartesianGrid g = grid2(64);
  const BoundaryGeometry geo = preset_shape("circle", 256);
  const Embedding emb = build_embedding(geo, g);
  const ExtractionPlan plan = build_extraction_plan(geo, g, emb);

  // u = x inside the circle, 0 outside: the interior extension is plain x.
  FieldPair u(g.num_nodes());
  for (long n = 0; n < g.num_nodes(); ++n)
    if (emb.inside[n]) u.i[n] = u.e[n] = g.node(g.unindex(n))[0];
  JumpTable jt = zero_jumps(geo.num_nodes());
  for (int j = 0; j < geo.num_nodes(); ++j) {
    jt.i[j].value = jt.e[j].value = geo.node(j)[0];
    jt.i[j].grad = jt.e[j].grad = {1, 0, 0};
  }

  double worst_v = 0, worst_g = 0;
  for (int j = 0; j < geo.num_nodes(); ++j) {
    const PairLimits lim = extract_limits(plan, j, u, jt, kIso2);
    worst_v = std::max(worst_v, std::abs(lim.i.value - geo.node(j)[0]));
    worst_g = std::max(worst_g, norm(lim.i.grad - Vec3{1, 0, 0}));
  }
  CHECK(worst_v < 1e-9);
  CHECK(worst_g < 1e-9);
  // rightmost node: outward normal (1,0), so the conormal is exactly u_x.
  const PairLimits east = extract_limits(plan, 0, u, jt, kIso2);
  CHECK(east.i.conormal == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("smooth-field extraction converges at third order") {
  auto f = [](const Vec3& p) {
    return std::sin(1.3 * p[0] + 0.4) * std::cos(0.9 * p[1] - 0.2);
  };
  const BoundaryGeometry geo = preset_shape("circle", 256);
  const JumpTable jt = zero_jumps(geo.num_nodes());
  std::vector<double> errs;
  for (const int cells : {32, 64, 128}) {
    const CartesianGrid g = grid2(cells);
    const Embedding emb = build_embedding(geo, g);
    const ExtractionPlan plan = build_extraction_plan(geo, g, emb);
    const FieldPair u = sample_pair(g, f, f);
    double worst = 0;
    for (int j = 0; j < geo.num_nodes(); ++j) {
      const PairLimits lim = extract_limits(plan, j, u, jt, kIso2);
      worst = std::max(worst, std::abs(lim.i.value - f(geo.node(j))));
    }
    errs.push_back(worst);
  }
  const double o1 = std::log2(errs[0] / errs[1]);
  const double o2 = std::log2(errs[1] / errs[2]);
  MESSAGE("smooth extraction errors=", errs[0], " ", errs[1], " ", errs[2],
          " orders=", o1, " ", o2);
  CHECK(o1 > 2.8);
  CHECK(o2 > 2.8);
}

TEST_CASE("extraction of a transform-solved field tracks the solver's accuracy") {
  const double pi = M_PI;
  auto u1 = [&](const Vec3& p) { return std::sin(pi * p[0]) * std::sin(pi * p[1]); };
  auto u2 = [&](const Vec3& p) { return std::sin(2 * pi * p[0]) * std::sin(pi * p[1]); };
  const DiffusionParams p = kAniso2;
  const BoundaryGeometry geo = preset_shape("circle", 256);
  const JumpTable jt = zero_jumps(geo.num_nodes());
  std::vector<double> errs, gaps;
  for (const int cells : {32, 64, 128}) {
    const CartesianGrid g = grid2(cells);
    const Embedding emb = build_embedding(geo, g);
    const ExtractionPlan plan = build_extraction_plan(geo, g, emb);
    FieldPair rhs(g.num_nodes());
    for (long n = 0; n < g.num_nodes(); ++n) {
      const Vec3 x = g.node(g.unindex(n));
      const double vi = u1(x), ve = u2(x);
      rhs.i[n] = -(p.intra[0] + p.intra[1]) * pi * pi * vi - p.kappa * (vi - ve);
      rhs.e[n] = -(4 * p.extra[0] + p.extra[1]) * pi * pi * ve + p.kappa * (vi - ve);
    }
    FftEllipticSolver solver(g);
    const FieldPair u = solver.solve(rhs, p);
    double worst = 0, gap = 0;
    for (int j = 0; j < geo.num_nodes(); ++j) {
      const PairLimits lim = extract_limits(plan, j, u, jt, p);
      worst = std::max(worst, std::abs(lim.i.value - u1(geo.node(j))));
      gap = std::max(gap, std::abs(lim.i.value - bilinear(u.i, g, geo.node(j))));
    }
    errs.push_back(worst);
    gaps.push_back(gap);
  }
  const double o1 = std::log2(errs[0] / errs[1]);
  const double o2 = std::log2(errs[1] / errs[2]);
  const double b1 = std::log2(gaps[0] / gaps[1]);
  const double b2 = std::log2(gaps[1] / gaps[2]);
  MESSAGE("vs exact=", errs[0], " ", errs[1], " ", errs[2], " orders=", o1, " ", o2);
  MESSAGE("vs bilinear=", gaps[0], " ", gaps[1], " ", gaps[2], " orders=", b1, " ", b2);
  CHECK(o1 > 1.9);
  CHECK(o2 > 1.9);
  CHECK(b1 > 1.9);
  CHECK(b2 > 1.9);
}

TEST_CASE("extraction is linear in the field and the jumps jointly") {
  const CartesianGrid g = grid2(32);
  const BoundaryGeometry geo = preset_shape("circle", 128);
  const Embedding emb = build_embedding(geo, g);
  const ExtractionPlan plan = build_extraction_plan(geo, g, emb);
  const int m = geo.num_nodes();

  auto rand_pair = [&](unsigned seed) {
    FieldPair u(g.num_nodes());
    u.i = test::random_values(g.num_nodes(), seed);
    u.e = test::random_values(g.num_nodes(), seed + 1);
    return u;
  };
  auto rand_jumps = [&](unsigned seed) {
    JumpTable t = zero_jumps(m);
    const std::vector<double> r = test::random_values(10 * m, seed);
    for (int j = 0; j < m; ++j) {
      t.i[j].value = r[10 * j];
      t.e[j].value = r[10 * j + 1];
      for (int d = 0; d < 2; ++d) {
        t.i[j].grad[d] = r[10 * j + 2 + d];
        t.e[j].grad[d] = r[10 * j + 4 + d];
      }
      t.i[j].hess = {r[10 * j + 6], r[10 * j + 7], 0, r[10 * j + 8], 0, 0};
      t.e[j].hess = {r[10 * j + 9], r[10 * j + 6], 0, r[10 * j + 7], 0, 0};
    }
    return t;
  };
  const FieldPair ua = rand_pair(11), ub = rand_pair(13);
  const JumpTable ja = rand_jumps(17), jb = rand_jumps(19);
  const double a = 0.7, b = -1.3;

  FieldPair uc(g.num_nodes());
  for (long n = 0; n < g.num_nodes(); ++n) {
    uc.i[n] = a * ua.i[n] + b * ub.i[n];
    uc.e[n] = a * ua.e[n] + b * ub.e[n];
  }
  auto blend = [&](const ComponentJumps& ra, const ComponentJumps& rb) {
    ComponentJumps rc;
    rc.value = a * ra.value + b * rb.value;
    rc.grad = a * ra.grad + b * rb.grad;
    for (int k = 0; k < 6; ++k) rc.hess[k] = a * ra.hess[k] + b * rb.hess[k];
    return rc;
  };
  JumpTable jc = zero_jumps(m);
  for (int j = 0; j < m; ++j) {
    jc.i[j] = blend(ja.i[j], jb.i[j]);
    jc.e[j] = blend(ja.e[j], jb.e[j]);
  }

  double worst = 0;
  for (int j = 0; j < m; ++j) {
    const PairLimits la = extract_limits(plan, j, ua, ja, kAniso2);
    const PairLimits lb = extract_limits(plan, j, ub, jb, kAniso2);
    const PairLimits lc = extract_limits(plan, j, uc, jc, kAniso2);
    worst = std::max(worst, std::abs(lc.i.value - (a * la.i.value + b * lb.i.value)));
    worst = std::max(worst, std::abs(lc.e.conormal - (a * la.e.conormal + b * lb.e.conormal)));
    worst = std::max(worst, norm(lc.i.grad - (a * la.i.grad + b * lb.i.grad)));
  }
  MESSAGE("linearity defect=", worst);
  CHECK(worst < 1e-11);
}

TEST_CASE("mirrored boundary nodes get mirrored stencils and mirrored limits") {
  auto f = [](const Vec3& p) { return std::cos(2 * p[0]) * std::cos(1.5 * p[1] * p[1]); };
  const BoundaryGeometry geo = preset_shape("circle", 128);
  const int m = geo.num_nodes();
  const JumpTable jt = zero_jumps(m);
  for (const int cells : {64, 128}) {
    const CartesianGrid g = grid2(cells);
    const Embedding emb = build_embedding(geo, g);
    const ExtractionPlan plan = build_extraction_plan(geo, g, emb);
    const FieldPair u = sample_pair(g, f, f);
    double worst_struct = 0, worst_v = 0, worst_g = 0;
    int worst_j = -1;
    for (int j = 0; j < m; ++j) {
      const int jm = (m - j) % m;
      // structural half: the partner's offsets are the y-flips of ours
      std::vector<Vec3> a, b;
      for (int k = 0; k < plan.stencils[j].count; ++k) {
        a.push_back(plan.stencils[j].scaled[k]);
        const Vec3 s = plan.stencils[jm].scaled[k];
        b.push_back({s[0], -s[1], s[2]});
      }
      auto lt = [](const Vec3& x, const Vec3& y) {
        return std::tie(x[0], x[1], x[2]) < std::tie(y[0], y[1], y[2]);
      };
      std::sort(a.begin(), a.end(), lt);
      std::sort(b.begin(), b.end(), lt);
      for (int k = 0; k < plan.stencils[j].count; ++k)
        if (norm(a[k] - b[k]) > worst_struct) {
          worst_struct = norm(a[k] - b[k]);
          worst_j = j;
        }
      const PairLimits lj = extract_limits(plan, j, u, jt, kIso2);
      const PairLimits lk = extract_limits(plan, jm, u, jt, kIso2);
      worst_v = std::max(worst_v, std::abs(lj.i.value - lk.i.value));
      worst_g = std::max(worst_g, std::abs(lj.i.grad[0] - lk.i.grad[0]));
      worst_g = std::max(worst_g, std::abs(lj.i.grad[1] + lk.i.grad[1]));
    }
    MESSAGE("I=", cells, " stencil mirror defect=", worst_struct, " at node ", worst_j,
            " value=", worst_v, " grad=", worst_g);
    CHECK(worst_struct < 1e-9);
    CHECK(worst_v < 1e-10);
    CHECK(worst_g < 1e-9);
  }
}

TEST_CASE("selection failures carry the node id") {
  const CartesianGrid g = grid2(32);
  const BoundaryGeometry geo = preset_shape("circle", 128);
  const Embedding emb = build_embedding(geo, g);
  try {
    select_stencil({2.5, 0, 0}, g, emb, 42);
    FAIL("expected a selection failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("node 42") != std::string::npos);
  }
}

TEST_CASE("jump tables must cover every boundary node") {
  const CartesianGrid g = grid2(32);
  const BoundaryGeometry geo = preset_shape("circle", 128);
  const Embedding emb = build_embedding(geo, g);
  const ExtractionPlan plan = build_extraction_plan(geo, g, emb);
  const FieldPair u(g.num_nodes());
  CHECK_THROWS_AS(extract_limits(plan, 0, u, zero_jumps(64), kIso2), Error);
}
