#include <gtest/gtest.h>

#include <random>

#include "packd/metrics.hpp"
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

MobiusMap random_mobius(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto z = [&] { return Complex(u(rng), u(rng)); };
  return {Complex(1.0) + 0.5 * z(), z(), 0.5 * z(), Complex(1.0) + 0.5 * z()};
}

}  // namespace

TEST(SupDistance, ZeroAndMobiusInvariant) {
  std::mt19937 rng(kSeed);
  const auto p = pack(iterate(rule("inner_square"), "Q", 2));
  EXPECT_EQ(sup_distance(p, p), 0.0);
  for (int t = 0; t < 5; ++t) {
    const MobiusMap m = random_mobius(rng);
    EXPECT_LT(sup_distance(p, apply_mobius(p, m)), 1e-10);
  }
}

TEST(SupDistance, PerturbationIsDetectedAndBounded) {
  const auto p = pack(iterate(rule("inner_square"), "Q", 2));
  for (double eps : {1e-3, 1e-5, 1e-7}) {
    auto q = p;
    const Circle c = q.circles[10];
    q.circles[10] = Circle::from_center_radius(c.center(), c.radius() * (1.0 + eps));
    const double d = sup_distance(p, q);
    EXPECT_GT(d, 0.0);
    // The moved circle is not an anchor, so only its own image changes.
    EXPECT_LE(d, 10.0 * eps);
  }
}

TEST(SupDistance, Pseudometric) {
  std::mt19937 rng(kSeed);
  const auto c = iterate(rule("inner_square"), "Q", 2);
  const auto base = pack(c);
  std::normal_distribution<double> g(0.0, 1e-3);
  std::vector<CirclePacking> ps;
  for (int i = 0; i < 6; ++i) {
    auto q = base;
    for (VertexId v : q.marked_vertices()) {
      if (v < 4) continue;  // keep anchor circles tangent
      const Circle x = q.circles[v];
      q.circles[v] = Circle::from_center_radius(x.center() + Complex(g(rng), g(rng)) * x.radius(),
                                                x.radius() * (1.0 + g(rng)));
    }
    ps.push_back(apply_mobius(q, random_mobius(rng)));
  }
  for (std::size_t a = 0; a < ps.size(); ++a) {
    for (std::size_t b = 0; b < ps.size(); ++b) {
      const double dab = sup_distance(ps[a], ps[b], base.anchors);
      EXPECT_NEAR(dab, sup_distance(ps[b], ps[a], base.anchors), 1e-10);
      for (std::size_t k = 0; k < ps.size(); ++k) {
        EXPECT_LE(dab, sup_distance(ps[a], ps[k], base.anchors) +
                           sup_distance(ps[k], ps[b], base.anchors) + 1e-10);
      }
    }
  }
}

TEST(SupDistance, MarkingMismatch) {
  const auto p = pack(iterate(rule("inner_square"), "Q", 2));
  EXPECT_EQ(code_of([&] { sup_distance(p, extract_subpacking(p, 1)); }), ErrorCode::MarkingMismatch);
}

TEST(Fit, RecoversGeometricRate) {
  std::vector<int> n{1, 2, 3, 4, 5};
  std::vector<double> d;
  for (int k : n) d.push_back(0.7 * std::pow(0.35, k));
  const auto f = fit_rate(n, d);
  ASSERT_TRUE(f.delta.has_value());
  EXPECT_NEAR(*f.delta, 0.35, 1e-12);
  EXPECT_LT(f.residual, 1e-12);
  EXPECT_FALSE(fit_rate({1, 2, 3}, {1e-1, 1e-2, 1e-3}).delta.has_value());
  EXPECT_FALSE(fit_rate(n, {1e-15, 1e-14, 1e-1, 1e-2, 1e-3}).delta.has_value());
}

TEST(Converge, ApollonianSphereIsExact) {
  const auto rep = converge_experiment(rule("apollonian"), "sphere", 1, 1, 4);
  ASSERT_EQ(rep.d.size(), 4u);
  for (double d : rep.d) EXPECT_LT(d, 1e-8);
  EXPECT_FALSE(rep.delta.has_value());
}

TEST(Converge, InnerSquareIsPinnedBySymmetry) {
  // Every quadrilateral of the rule is a nested central square, whose modulus
  // the fourfold symmetry fixes: level-1 circles do not move with depth.
  const auto rep = converge_experiment(rule("inner_square"), "Q", 1, 1, 3);
  for (double d : rep.d) EXPECT_LT(d, 1e-11);
}

TEST(Converge, ParallelMatchesSerial) {
  ConvergeOptions two;
  two.jobs = 2;
  const auto a = converge_experiment(rule("pillow"), "Q", 1, 1, 3, [] {
    ConvergeOptions o;
    o.check_prerequisites = false;
    return o;
  }());
  two.check_prerequisites = false;
  const auto b = converge_experiment(rule("pillow"), "Q", 1, 1, 3, two);
  EXPECT_EQ(a.d, b.d);
  EXPECT_EQ(a.n, b.n);
}

TEST(Converge, Prerequisites) {
  EXPECT_EQ(code_of([] { converge_experiment(rule("pillow"), "Q", 1, 1, 2); }),
            ErrorCode::PrerequisiteFailed);
  EXPECT_EQ(code_of([] { converge_experiment(rule("square_diagonal"), "Q", 1, 1, 2); }),
            ErrorCode::PrerequisiteFailed);
  EXPECT_EQ(code_of([] { converge_experiment(rule("pinched"), "Q", 1, 1, 2); }),
            ErrorCode::PrerequisiteFailed);
}

TEST(Renormalize, EmptyWordIsNormalizedPacking) {
  const auto r = rule("inner_square");
  const auto p = pack(iterate(r, "Q", 3));
  const auto q = renormalize(r, 0, p, {});
  const auto ref = mobius_normalize(extract_subpacking(p, 3));
  for (VertexId v : q.marked_vertices()) {
    EXPECT_LT(spherical_hausdorff(q.circles[v], ref.circles[v]), 1e-10);
  }
}

TEST(Renormalize, CentralSquareIsASquarePacking) {
  const auto r = rule("inner_square");
  const auto p = pack(iterate(r, "Q", 4));
  const auto q = renormalize(r, 0, p, resolve_word(r, 0, {"central"}));
  const auto target = iterate(r, "Q", 3);
  EXPECT_EQ(q.marked_vertices().size(), target.vertex_count());
  for (EdgeId e = 0; e < target.edge_count(); ++e) {
    const auto [u, v] = target.edge_ends(e);
    EXPECT_NEAR(inversive_product(q.circles[u], q.circles[v]), -1.0, 1e-8);
  }
  // Sub-packing of a packing with hub-augmented deepest square: the packing itself.
  EXPECT_LT(sup_distance(q, extract_subpacking(pack(target), 3)), 1e-9);
}

TEST(Renormalize, Errors) {
  const auto r = rule("inner_square");
  const auto p = pack(iterate(r, "Q", 2));
  EXPECT_EQ(code_of([&] { renormalize(r, 0, p, {99}); }), ErrorCode::InvalidChoice);
  EXPECT_EQ(code_of([&] { renormalize(r, 0, p, {8, 8}); }), ErrorCode::WordTooLong);
  EXPECT_EQ(code_of([&] { resolve_word(r, 0, {"nowhere"}); }), ErrorCode::InvalidChoice);
  EXPECT_EQ(resolve_word(r, 0, {"central", "8", "0"}), (std::vector<std::size_t>{8, 8, 0}));
}

TEST(RenormContraction, IdenticalSeedsGiveZero) {
  const auto r = rule("inner_square");
  const auto rep = renorm_contraction(r, 0, {8}, 3, 4, {}, ExternalSeed::Hub, ExternalSeed::Hub);
  for (double d : rep.d) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(code_of([&] { renorm_contraction(r, 0, {8}, 4, 4); }), ErrorCode::WordTooLong);
}

TEST(Multiplier, ApollonianCornerIsParabolic) {
  const auto r = rule("apollonian");
  const auto m = periodic_multiplier(r, 0, resolve_word(r, 0, {"corner"}), 5);
  EXPECT_EQ(m.classification.kind, MobiusClass::Parabolic);
  EXPECT_LT(std::abs(m.classification.trace_sq - 4.0), 1e-5);
}

TEST(Multiplier, InnerSquareCentralIsLoxodromic) {
  const auto r = rule("inner_square");
  const auto m = periodic_multiplier(r, 0, resolve_word(r, 0, {"central"}), 4);
  EXPECT_EQ(m.classification.kind, MobiusClass::Loxodromic);
  EXPECT_GT(std::abs(m.classification.multiplier), 1.0);
  // phi maps the central square's anchors onto the outer square's.
  const auto p = pack(iterate(r, "Q", 4));
  const auto t = anchor_point(p, {4, 5});
  const auto image = m.map(t);
  EXPECT_LT(chordal_distance(image, anchor_point(p, {0, 1})), 1e-9);
}

TEST(Multiplier, Errors) {
  const auto r = rule("inner_square");
  EXPECT_EQ(code_of([&] { periodic_multiplier(r, 0, {0}, 3); }), ErrorCode::NotPeriodic);
  EXPECT_EQ(code_of([&] { periodic_multiplier(r, 0, {}, 3); }), ErrorCode::NotPeriodic);
}

TEST(Arcs, TriangleFaceIsPositive) {
  const auto r = rule("apollonian");
  const auto c = iterate(r, "T", 1);
  const auto p = pack(c);
  for (FaceId f = 0; f < c.face_count(); ++f) {
    const double a = arc_lower_bound(p, c.face(f).walk);
    EXPECT_GT(a, 0.0);
    EXPECT_LE(a, 0.5 + 1e-12);  // the exterior circle can contribute a half arc
  }
}

TEST(Arcs, EqualCirclesGiveOneSixth) {
  // Three unit circles at the corners of an equilateral triangle.
  CirclePacking p;
  const double h = std::sqrt(3.0);
  p.circles = {Circle::from_center_radius({-1.0, 0.0}, 1.0), Circle::from_center_radius({1.0, 0.0}, 1.0),
               Circle::from_center_radius({0.0, h}, 1.0)};
  EXPECT_NEAR(arc_lower_bound(p, {0, 1, 2}), 1.0 / 6.0, 1e-12);
}

TEST(Arcs, InnerSquareLevelOneStaysBounded) {
  const auto r = rule("inner_square");
  double first = 0.0;
  for (int n = 1; n <= 4; ++n) {
    const double a = arc_lower_bound(r, 0, pack(iterate(r, "Q", n)), 1);
    if (n == 1) first = a;
    EXPECT_GT(a, 0.5 * first);
  }
}

TEST(Arcs, PillowPairFacesDegenerate) {
  const auto r = rule("pillow");
  std::vector<double> a;
  for (int n = 1; n <= 4; ++n) {
    const auto c = iterate(r, "Q", n);
    a.push_back(arc_lower_bound_between(pack(c), c, 1, 3));
  }
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LT(a[i], a[i - 1]);
  EXPECT_LT(a.back(), a.front() / 10.0);
}
