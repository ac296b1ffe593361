#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "packd/packer.hpp"
#include "packd/rule_io.hpp"

using namespace packd;

namespace {

constexpr unsigned kSeed = 20240611;

SubdivisionRule rule(const std::string& name) {
  return load_rule(std::string(PACKD_RULES_DIR) + "/" + name + ".json");
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Io;
}

double angle_at(Complex a, Complex b, Complex c) {
  return std::abs(std::arg((b - a) / (c - a)));
}

// Same complex with vertex ids and face order shuffled; perm[old] = new.
struct Relabeled {
  PlaneComplex complex;
  std::vector<VertexId> perm;
};

Relabeled relabel(const PlaneComplex& c, std::mt19937& rng) {
  std::vector<VertexId> perm(c.vertex_count());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<VertexInfo> info(c.vertex_count());
  for (VertexId v = 0; v < c.vertex_count(); ++v) info[perm[v]] = c.vertex(v);
  std::vector<FaceId> order(c.face_count());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<FaceSpec> faces;
  std::optional<FaceId> external;
  for (FaceId f : order) {
    FaceSpec s;
    for (VertexId v : c.face(f).walk) s.cycle.push_back(perm[v]);
    s.info = c.face(f).info;
    if (c.external_face() == f) external = static_cast<FaceId>(faces.size());
    faces.push_back(std::move(s));
  }
  return {PlaneComplex::build(std::move(faces), external, std::move(info)), perm};
}

}  // namespace

TEST(Augment, CountsAndHubs) {
  const auto c = iterate(rule("inner_square"), "Q", 1);
  const auto a = augment(c);
  EXPECT_EQ(a.complex.vertex_count(), 10u);
  EXPECT_EQ(a.complex.face_count(), 16u);
  EXPECT_EQ(a.complex.edge_count(), 24u);
  ASSERT_TRUE(a.external_hub.has_value());
  EXPECT_TRUE(a.complex.vertex(*a.external_hub).hub);
  EXPECT_EQ(a.complex.neighbors(*a.external_hub), (std::vector<VertexId>{0, 1, 2, 3}));
  for (const auto& f : a.complex.faces()) EXPECT_EQ(f.walk.size(), 3u);

  const auto bar = augment(c, ExternalSeed::Bar);
  EXPECT_EQ(bar.complex.vertex_count(), 11u);
  EXPECT_EQ(bar.complex.euler_characteristic(), 2);
  EXPECT_TRUE(is_simple(bar.complex));
}

TEST(Augment, Errors) {
  EXPECT_EQ(code_of([] { augment(iterate(rule("pinched"), "Q", 1)); }), ErrorCode::NonJordanFace);
  EXPECT_EQ(code_of([] { pack(iterate(rule("multi_edge"), "T", 1)); }), ErrorCode::NotSimple);
}

TEST(Pack, DescartesQuadrupleNormalizesToStandard) {
  // Four mutually tangent circles; send t(a,b) -> 0, t(o,a) -> 1, t(o,b) -> -1.
  const auto p = pack(iterate(rule("apollonian"), "T", 1));
  const VertexId o = 0, a = 1, b = 2, d = 3;
  const MobiusMap m = mobius_from_three_points(
      {tangency_point(p.circles[a], p.circles[b]), tangency_point(p.circles[o], p.circles[a]),
       tangency_point(p.circles[o], p.circles[b])},
      {SpherePoint::finite(0.0), SpherePoint::finite(1.0), SpherePoint::finite(-1.0)});
  EXPECT_NEAR(m(p.circles[o]).k, -1.0, 1e-9);
  EXPECT_NEAR(m(p.circles[a]).k, 2.0, 1e-9);
  EXPECT_NEAR(m(p.circles[b]).k, 2.0, 1e-9);
  EXPECT_NEAR(m(p.circles[d]).k, 3.0, 1e-9);
}

TEST(Pack, TwoTriangleSphereIsThreeTangentCircles) {
  const auto p = pack(iterate_sphere(rule("apollonian"), 0));
  ASSERT_EQ(p.circles.size(), 3u);
  for (VertexId a = 0; a < 3; ++a) {
    for (VertexId b = a + 1; b < 3; ++b) {
      EXPECT_NEAR(inversive_product(p.circles[a], p.circles[b]), -1.0, 1e-12);
    }
  }
  EXPECT_LT(tangency_audit(p), 1e-12);
}

TEST(Pack, EuclideanAngleSumsAreFull) {
  // Independent check on the layout: interior vertices surrounded by their petals.
  for (const auto& c : {iterate(rule("inner_square"), "Q", 3), iterate(rule("apollonian"), "T", 4),
                         iterate_sphere(rule("apollonian"), 2)}) {
    const auto p = pack(c);
    const auto& tri = *p.complex;
    std::vector<double> sum(tri.vertex_count(), 0.0);
    std::vector<bool> touches_infinity(tri.vertex_count(), false);
    for (const auto& f : tri.faces()) {
      const auto& w = f.walk;
      if (std::find(w.begin(), w.end(), p.infinity_vertex) != w.end()) {
        for (VertexId v : w) touches_infinity[v] = true;
        continue;
      }
      for (int i = 0; i < 3; ++i) {
        sum[w[i]] += angle_at(p.circles[w[i]].center(), p.circles[w[(i + 1) % 3]].center(),
                              p.circles[w[(i + 2) % 3]].center());
      }
    }
    for (VertexId v = 0; v < tri.vertex_count(); ++v) {
      if (!touches_infinity[v]) {
        EXPECT_NEAR(sum[v], 2.0 * std::numbers::pi, 1e-8) << v;
      }
    }
    EXPECT_LT(p.residual, 1e-10);
  }
}

TEST(Pack, TangencyAndDescartesAudits) {
  for (const auto& c : {iterate(rule("inner_square"), "Q", 3), iterate(rule("apollonian"), "T", 4),
                         iterate_sphere(rule("apollonian"), 3), iterate(rule("cone_square"), "Q", 3)}) {
    const auto p = pack(c);
    EXPECT_LT(tangency_audit(p), 1e-8);
    EXPECT_LT(descartes_audit(p), 1e-9);
    const auto n = mobius_normalize(p);
    EXPECT_LT(tangency_audit(n), 1e-8);
    EXPECT_LT(descartes_audit(n), 1e-9);
  }
}

TEST(Pack, BoundaryCirclesAreHorocycles) {
  const auto p = pack(iterate(rule("inner_square"), "Q", 2));
  for (VertexId v : p.complex->neighbors(p.infinity_vertex)) {
    EXPECT_NEAR(std::abs(p.circles[v].center()) + p.circles[v].radius(), 1.0, 1e-10);
  }
}

TEST(Pack, NormalizationSendsAnchorsToZeroOneInfinity) {
  const auto n = mobius_normalize(pack(iterate(rule("inner_square"), "Q", 2)));
  const auto t0 = anchor_point(n, n.anchors[0]);
  const auto t1 = anchor_point(n, n.anchors[1]);
  EXPECT_LT(std::abs(t0.z), 1e-9);
  EXPECT_LT(std::abs(t1.z - 1.0), 1e-9);
  EXPECT_TRUE(n.circles[n.anchors[2].first].is_line(1e-9));
  EXPECT_TRUE(n.circles[n.anchors[2].second].is_line(1e-9));
}

TEST(Pack, RigidUnderRelabeling) {
  std::mt19937 rng(kSeed);
  for (const auto& c : {iterate(rule("inner_square"), "Q", 2), iterate(rule("cone_square"), "Q", 2),
                         iterate_sphere(rule("apollonian"), 2)}) {
    const auto ref = mobius_normalize(pack(c));
    for (int trial = 0; trial < 3; ++trial) {
      const auto r = relabel(c, rng);
      auto p = pack(r.complex);
      std::array<VertexPair, 3> anchors;
      for (int i = 0; i < 3; ++i) anchors[i] = {r.perm[ref.anchors[i].first], r.perm[ref.anchors[i].second]};
      p = mobius_normalize(p, anchors);
      double worst = 0.0;
      for (VertexId v = 0; v < c.vertex_count(); ++v) {
        worst = std::max(worst, spherical_hausdorff(ref.circles[v], p.circles[r.perm[v]]));
      }
      EXPECT_LT(worst, 1e-8);
    }
  }
}

TEST(Pack, NestedTriangulationsAreExact) {
  // Apollonian level-j circles do not move when deeper levels are added.
  const auto r = rule("apollonian");
  const auto base = mobius_normalize(pack(iterate(r, "T", 2)));
  for (int n = 1; n <= 3; ++n) {
    const auto deep = mobius_normalize(extract_subpacking(pack(iterate(r, "T", 2 + n)), 2));
    double worst = 0.0;
    for (VertexId v : deep.marked_vertices()) {
      worst = std::max(worst, spherical_hausdorff(base.circles[v], deep.circles[v]));
    }
    EXPECT_LT(worst, 1e-9) << n;
  }
}

TEST(Pack, SubpackingAndAnchorErrors) {
  const auto p = pack(iterate(rule("inner_square"), "Q", 2));
  EXPECT_EQ(code_of([&] { extract_subpacking(p, 3); }), ErrorCode::LevelOutOfRange);
  const auto s = extract_subpacking(p, 1);
  EXPECT_EQ(s.marked_vertices().size(), 8u);
  EXPECT_EQ(code_of([&] { mobius_normalize(p, {VertexPair{0, 2}, {1, 2}, {2, 3}}); }),
            ErrorCode::DegenerateTriple);
}

TEST(Pack, NonConvergentUnderTinyBudget) {
  PackOptions opt;
  opt.max_iters = 1;
  opt.warm_sweeps = 0;
  EXPECT_EQ(code_of([&] { pack(iterate(rule("inner_square"), "Q", 3), opt); }),
            ErrorCode::NonConvergent);
}
