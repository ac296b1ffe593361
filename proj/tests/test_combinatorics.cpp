#include <gtest/gtest.h>

#include <set>

#include "packd/combinatorics.hpp"
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

const PairCertificate& pair_cert(const PredicateVerdict& v, std::size_t p, std::size_t q) {
  for (const auto& c : v.pairs) {
    if (c.pair.p == p && c.pair.q == q && c.pair.type == 0) return c;
  }
  throw std::runtime_error("pair missing");
}

std::set<Address> addresses(const PlaneComplex& c) {
  std::set<Address> out;
  for (const auto& v : c.vertices()) out.insert(v.address);
  return out;
}

}  // namespace

TEST(Simple, Fixtures) {
  for (const char* name : {"apollonian", "inner_square"}) {
    const auto v = check_simple(rule(name), 3);
    EXPECT_EQ(v.status, VerdictStatus::VerifiedUpToLevel) << name;
    EXPECT_EQ(v.levels_checked, 3);
  }
  const auto multi = check_simple(rule("multi_edge"), 3);
  EXPECT_EQ(multi.status, VerdictStatus::Fails);
  EXPECT_EQ(multi.levels_checked, 1);
  ASSERT_TRUE(multi.edge.has_value());
  // Witness is checkable: the level-1 graph has two edges on that pair.
  const auto c = iterate(rule("multi_edge"), "T", 1);
  int count = 0;
  for (EdgeId e = 0; e < c.edge_count(); ++e) {
    auto [u, w] = c.edge_ends(e);
    if ((u == multi.edge->first && w == multi.edge->second) ||
        (w == multi.edge->first && u == multi.edge->second)) {
      ++count;
    }
  }
  EXPECT_EQ(count, 2);
}

TEST(Irreducible, Fixtures) {
  EXPECT_EQ(check_irreducible(rule("inner_square")).status, VerdictStatus::Holds);
  EXPECT_EQ(check_irreducible(rule("apollonian")).status, VerdictStatus::Holds);
  EXPECT_EQ(check_irreducible(rule("pillow")).status, VerdictStatus::Holds);
  const auto diag = check_irreducible(rule("square_diagonal"));
  EXPECT_EQ(diag.status, VerdictStatus::Fails);
  ASSERT_EQ(diag.chain.size(), 1u);
  EXPECT_EQ(diag.chain[0].p, 0u);
  EXPECT_EQ(diag.chain[0].q, 2u);
  EXPECT_FALSE(induced_check(iterate(rule("square_diagonal"), "Q", 1), {0, 1, 2, 3}));
}

TEST(Irreducible, AgreesWithDirectScan) {
  for (const char* name : {"inner_square", "pillow", "cone_square", "square_diagonal"}) {
    const auto r = rule(name);
    bool direct = true;
    for (std::size_t t = 0; t < r.polygons.size(); ++t) {
      std::vector<VertexId> cyc;
      for (VertexId i = 0; i < r.polygons[t].sides; ++i) cyc.push_back(i);
      for (int n = 1; n <= 3; ++n) direct = direct && induced_check(iterate(r, t, n), cyc);
    }
    EXPECT_EQ(check_irreducible(r).status == VerdictStatus::Holds, direct) << name;
  }
}

TEST(Acylindrical, CanonicalFixtures) {
  const auto ap = decide_acylindrical(rule("apollonian"), 2);
  EXPECT_EQ(ap.status, VerdictStatus::Holds);
  EXPECT_TRUE(ap.pairs.empty());

  const auto sq = decide_acylindrical(rule("inner_square"), 2);
  EXPECT_EQ(sq.status, VerdictStatus::Holds);
  for (const auto& c : sq.pairs) {
    EXPECT_EQ(c.outcome, PairOutcome::Connected);
    EXPECT_EQ(c.level, 1);
  }

  const auto pillow = decide_acylindrical(rule("pillow"), 4);
  EXPECT_EQ(pillow.status, VerdictStatus::Fails);
  const auto& cyl = pair_cert(pillow, 1, 3);
  EXPECT_EQ(cyl.outcome, PairOutcome::Cylindrical);
  ASSERT_EQ(cyl.period.size(), 1u);
  EXPECT_EQ(cyl.period[0], (PairState{0, 1, 3}));
  EXPECT_EQ(pair_cert(pillow, 0, 2).outcome, PairOutcome::Connected);
  // The certificate agrees with direct separation checks at every built level.
  for (int n = 1; n <= 5; ++n) {
    EXPECT_FALSE(arcs_connected_without(iterate(rule("pillow"), "Q", n), {0, 1, 2, 3}, 1, 3));
  }
}

TEST(Acylindrical, MonotoneCertification) {
  for (const char* name : {"inner_square", "cone_square", "pillow"}) {
    const auto r = rule(name);
    for (const auto& s : detail::root_pairs(r, 0)) {
      bool seen = false;
      for (int n = 1; n <= 4; ++n) {
        const bool now = arcs_connected_without(iterate(r, 0, n), {0, 1, 2, 3},
                                                static_cast<VertexId>(s.p),
                                                static_cast<VertexId>(s.q));
        if (seen) {
          EXPECT_TRUE(now) << name;
        }
        seen = seen || now;
      }
    }
  }
}

TEST(Acylindrical, PrerequisiteFailed) {
  EXPECT_EQ(code_of([] { decide_acylindrical(rule("square_diagonal"), 2); }),
            ErrorCode::PrerequisiteFailed);
  EXPECT_EQ(code_of([] { decide_acylindrical(rule("multi_edge"), 2); }),
            ErrorCode::PrerequisiteFailed);
}

TEST(ConnectingPath, Fixtures) {
  // BFS with smallest-id tie-break: v1 -> a1 -> a2 -> v3.
  EXPECT_EQ(connecting_path(rule("inner_square"), 0, 0, 2), (std::vector<VertexId>{0, 4, 5, 2}));
  EXPECT_EQ(connecting_path(rule("cone_square"), 0, 0, 2), (std::vector<VertexId>{0, 4, 2}));
  EXPECT_EQ(code_of([] { connecting_path(rule("pillow"), 0, 1, 3, 4); }), ErrorCode::NotCertified);
}

TEST(ConnectingPath, IsSimpleAndInterior) {
  const auto r = rule("inner_square");
  const auto c = iterate(r, "Q", 1);
  const auto path = connecting_path(r, 0, 1, 3);
  std::set<VertexId> distinct(path.begin(), path.end());
  EXPECT_EQ(distinct.size(), path.size());
  for (std::size_t i = 0; i + 1 < path.size(); ++i) EXPECT_TRUE(c.adjacent(path[i], path[i + 1]));
  for (std::size_t i = 1; i + 1 < path.size(); ++i) EXPECT_GE(c.vertex(path[i]).level, 1);
}

TEST(Jordanize, FixedPointOnJordanRule) {
  const auto r = rule("inner_square");
  const auto j = jordanize(r, 3);
  EXPECT_EQ(rule_description_to_json(j.source), rule_description_to_json(r.source));
}

TEST(Jordanize, PinchedFixture) {
  const auto r = rule("pinched");
  const auto q = r.type_index("Q");
  EXPECT_FALSE(template_is_jordan(r.templates[q]));
  const auto j = jordanize(r, 3);
  for (const auto& t : j.templates) EXPECT_TRUE(template_is_jordan(t));
  // The pinched cell is split into exactly two pieces by the path b1 - y - b5.
  const auto& tq = j.templates[j.type_index("Q")];
  EXPECT_EQ(tq.faces.size(), r.templates[q].faces.size() + 1);
  EXPECT_EQ(tq.interior_count, r.templates[q].interior_count + 1);
  EXPECT_EQ(j.polygons.size(), r.polygons.size() + 2);
  std::vector<std::size_t> piece_sides;
  for (std::size_t k = r.polygons.size(); k < j.polygons.size(); ++k) {
    piece_sides.push_back(j.polygons[k].sides);
  }
  std::sort(piece_sides.begin(), piece_sides.end());
  EXPECT_EQ(piece_sides, (std::vector<std::size_t>{4, 6}));
}

TEST(Jordanize, Interleaving) {
  const auto r = rule("pinched");
  const auto j = jordanize(r, 3);
  for (int n = 0; n <= 3; ++n) {
    const auto orig_n = addresses(iterate(r, "Q", n));
    const auto orig_n1 = addresses(iterate(r, "Q", n + 1));
    const auto mod_n = addresses(iterate(j, "Q", n));
    EXPECT_TRUE(std::includes(mod_n.begin(), mod_n.end(), orig_n.begin(), orig_n.end())) << n;
    EXPECT_TRUE(std::includes(orig_n1.begin(), orig_n1.end(), mod_n.begin(), mod_n.end())) << n;
  }
}

TEST(Jordanize, PrerequisiteFailed) {
  EXPECT_EQ(code_of([] { jordanize(rule("pillow"), 3); }), ErrorCode::PrerequisiteFailed);
}
