#include <gtest/gtest.h>

#include <set>

#include "packd/rule_io.hpp"

using namespace packd;

namespace {

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

std::set<std::pair<VertexId, VertexId>> edge_set(const PlaneComplex& c) {
  std::set<std::pair<VertexId, VertexId>> out;
  for (EdgeId e = 0; e < c.edge_count(); ++e) {
    auto [u, v] = c.edge_ends(e);
    out.insert({std::min(u, v), std::max(u, v)});
  }
  return out;
}

std::size_t internal_faces(const PlaneComplex& c) {
  return c.face_count() - (c.external_face() ? 1 : 0);
}

}  // namespace

TEST(Validate, Fixtures) {
  EXPECT_EQ(rule("apollonian").polygons.size(), 1u);
  EXPECT_EQ(rule("inner_square").polygons.size(), 2u);
  EXPECT_EQ(rule("pillow").polygons.size(), 1u);
  EXPECT_NO_THROW(rule("multi_edge"));
  EXPECT_NO_THROW(rule("pinched"));
}

TEST(Validate, Errors) {
  EXPECT_EQ(code_of([] { rule("subdivided_boundary"); }), ErrorCode::BoundarySubdivided);

  RuleDescription lone = rule("apollonian").source;
  lone.subdivisions["T"].faces.resize(1);
  EXPECT_EQ(code_of([&] { validate_rule(lone); }), ErrorCode::TooFewCells);

  RuleDescription arity = rule("inner_square").source;
  arity.subdivisions["Q"].faces[0].primary.type = "Q";
  EXPECT_EQ(code_of([&] { validate_rule(arity); }), ErrorCode::ArityMismatch);

  RuleDescription unknown = rule("inner_square").source;
  unknown.subdivisions["Q"].faces[8].primary.type = "P";
  EXPECT_EQ(code_of([&] { validate_rule(unknown); }), ErrorCode::UnknownType);
}

TEST(Subdivide, SingleSquareInnerSquare) {
  const auto r = rule("inner_square");
  const auto c = iterate(r, "Q", 1);
  EXPECT_EQ(c.vertex_count(), 8u);
  EXPECT_EQ(c.edge_count(), 16u);
  EXPECT_EQ(c.face_count(), 10u);
  EXPECT_TRUE(is_simple(c));
}

TEST(Subdivide, SingleTriangleApollonian) {
  const auto c = iterate(rule("apollonian"), "T", 1);
  EXPECT_EQ(c.vertex_count(), 4u);
  EXPECT_EQ(c.edge_count(), 6u);
  // Three cells plus the external face; Euler forces F = 4.
  EXPECT_EQ(c.face_count(), 4u);
  EXPECT_EQ(c.euler_characteristic(), 2);
}

TEST(Subdivide, UntypedFace) {
  const auto r = rule("apollonian");
  const auto c = PlaneComplex::build_from_faces({{0, 1, 2}, {0, 2, 1}}, 1);
  EXPECT_EQ(code_of([&] { subdivide_once(c, r); }), ErrorCode::UntypedFace);
}

TEST(Subdivide, ChooserRejected) {
  const auto r = rule("apollonian");
  const Chooser bad = [](const ChoiceContext& ctx) { return ctx.admissible; };
  EXPECT_EQ(code_of([&] { iterate(r, "T", 1, bad); }), ErrorCode::ChooserRejected);
}

TEST(Iterate, Counts) {
  const auto ap = rule("apollonian");
  EXPECT_EQ(iterate(ap, "T", 0).vertex_count(), 3u);
  const auto a2 = iterate(ap, "T", 2);
  EXPECT_EQ(a2.vertex_count(), 7u);
  EXPECT_EQ(internal_faces(a2), 9u);

  const auto sq = rule("inner_square");
  // Hand count: V_{n+1} = V_n + (#triangles) + 4 (central square).
  const std::vector<std::size_t> expected{4, 8, 20, 56, 164};
  for (int n = 0; n <= 4; ++n) EXPECT_EQ(iterate(sq, "Q", n).vertex_count(), expected[n]) << n;
}

TEST(Iterate, FaceCountsMatchRecurrence) {
  for (const char* name : {"apollonian", "inner_square", "pillow", "cone_square"}) {
    const auto r = rule(name);
    for (std::size_t t = 0; t < r.polygons.size(); ++t) {
      for (int n = 0; n <= 4; ++n) {
        const auto c = iterate(r, t, n);
        std::vector<std::size_t> direct(r.polygons.size(), 0);
        for (const auto& f : c.faces()) {
          if (f.info.type) ++direct[*f.info.type];
        }
        EXPECT_EQ(direct, face_counts_by_recurrence(r, t, n)) << name << " n=" << n;
      }
    }
  }
}

TEST(Iterate, LevelMonotonicity) {
  for (const char* name : {"apollonian", "inner_square", "pillow"}) {
    const auto r = rule(name);
    const auto big = iterate(r, 0, 4);
    const auto big_edges = edge_set(big);
    for (int k = 0; k < 4; ++k) {
      const auto small = iterate(r, 0, k);
      for (VertexId v = 0; v < big.vertex_count(); ++v) {
        EXPECT_EQ(big.vertex(v).level <= k, v < small.vertex_count());
      }
      for (const auto& e : edge_set(small)) EXPECT_TRUE(big_edges.count(e)) << name;
      // Edges of the big complex among level <= k vertices are level-k edges.
      for (const auto& [u, v] : big_edges) {
        if (u < small.vertex_count() && v < small.vertex_count()) {
          EXPECT_TRUE(small.adjacent(u, v)) << name << " k=" << k;
        }
      }
    }
  }
}

TEST(Iterate, ExternalBoundaryIsFixed) {
  const auto r = rule("inner_square");
  for (int n = 0; n <= 3; ++n) {
    const auto c = iterate(r, "Q", n);
    ASSERT_TRUE(c.external_face().has_value());
    auto walk = c.face(*c.external_face()).walk;
    std::sort(walk.begin(), walk.end());
    EXPECT_EQ(walk, (std::vector<VertexId>{0, 1, 2, 3}));
  }
}

TEST(Sphere, Shells) {
  const auto ap = rule("apollonian");
  const auto s = sphere_complex(ap);
  EXPECT_EQ(s.vertex_count(), 3u);
  EXPECT_FALSE(s.external_face().has_value());
  const auto s1 = iterate_sphere(ap, 1);
  EXPECT_EQ(s1.vertex_count(), 5u);
  EXPECT_EQ(s1.face_count(), 6u);

  const auto sq = sphere_complex(rule("inner_square"));
  EXPECT_EQ(sq.euler_characteristic(), 2);

  ShellDesc bad = *ap.source.sphere;
  bad.faces[1].cycle = {0, 2, 1, 3};
  EXPECT_EQ(code_of([&] { sphere_complex(ap, bad); }), ErrorCode::ArityMismatch);
}

TEST(Subdivide, ReflectedCorrespondenceMirrorsChildren) {
  // Apollonian rule with the middle cell reflected: still a valid sphere-embedded complex.
  RuleDescription d = rule("apollonian").source;
  d.subdivisions["T"].faces[1].primary.corr = {1, true};
  const auto r = validate_rule(d);
  for (int n = 1; n <= 3; ++n) {
    const auto c = iterate(r, "T", n);
    EXPECT_EQ(c.euler_characteristic(), 2);
    EXPECT_EQ(c.vertex_count(), iterate(rule("apollonian"), "T", n).vertex_count());
    EXPECT_TRUE(is_simple(c));
  }
  const auto c1 = iterate(r, "T", 1);
  EXPECT_TRUE(c1.face(1).info.mirrored);
  EXPECT_FALSE(c1.face(0).info.mirrored);
}

TEST(Subdivide, ChoiceWordIsDeterministic) {
  RuleDescription d = rule("apollonian").source;
  for (auto& f : d.subdivisions["T"].faces) f.alternatives.push_back({"T", {1, false}});
  const auto r = validate_rule(d);
  const auto a = iterate(r, "T", 3, choice_word_chooser({0, 1}));
  const auto b = iterate(r, "T", 3, choice_word_chooser({0, 1}));
  EXPECT_EQ(edge_set(a), edge_set(b));
  EXPECT_EQ(a.vertex_count(), 3u + 1 + 3 + 9);
}

TEST(RuleIo, RoundTrip) {
  const auto r = rule("inner_square");
  const Json j = rule_description_to_json(r.source);
  const auto again = validate_rule(rule_description_from_json(j));
  EXPECT_EQ(rule_description_to_json(again.source), j);
  EXPECT_EQ(iterate(again, "Q", 2).vertex_count(), 20u);
}
