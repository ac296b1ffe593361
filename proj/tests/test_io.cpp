#include <gtest/gtest.h>

#include "packd/io.hpp"

using namespace packd;

namespace {

SubdivisionRule rule(const std::string& name) {
  return load_rule(std::string(PACKD_RULES_DIR) + "/" + name + ".json");
}

}  // namespace

TEST(GraphJson, RoundTripKeepsGluingAndInfo) {
  for (const auto& c : {iterate(rule("inner_square"), "Q", 2), iterate(rule("multi_edge"), "T", 1),
                         iterate(rule("pinched"), "Q", 1), iterate_sphere(rule("apollonian"), 1)}) {
    const PlaneComplex back = complex_from_json(Json::parse(complex_to_json(c).dump()));
    ASSERT_EQ(back.vertex_count(), c.vertex_count());
    ASSERT_EQ(back.edge_count(), c.edge_count());
    ASSERT_EQ(back.face_count(), c.face_count());
    EXPECT_EQ(back.external_face(), c.external_face());
    for (FaceId f = 0; f < c.face_count(); ++f) {
      EXPECT_EQ(back.face(f).walk, c.face(f).walk);
      EXPECT_EQ(back.face(f).info.lineage, c.face(f).info.lineage);
      EXPECT_EQ(back.face(f).info.type, c.face(f).info.type);
      for (std::size_t i = 0; i < c.face(f).darts.size(); ++i) {
        EXPECT_EQ(back.dart(back.face(f).darts[i]).edge, c.dart(c.face(f).darts[i]).edge);
      }
    }
    for (VertexId v = 0; v < c.vertex_count(); ++v) {
      EXPECT_EQ(back.vertex(v).level, c.vertex(v).level);
      EXPECT_EQ(back.vertex(v).birth, c.vertex(v).birth);
    }
  }
}

TEST(GraphJson, MalformedIsParseError) {
  try {
    complex_from_json(Json::parse(R"({"faces": 3})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Parse);
  }
}

TEST(PackingJson, CirclesRoundTripExactly) {
  const auto p = pack(iterate(rule("inner_square"), "Q", 2));
  const Json j = Json::parse(packing_to_json(p).dump());
  const auto circles = packing_circles_from_json(j);
  EXPECT_EQ(circles.size(), p.marked_vertices(true).size());
  for (const auto& [v, c] : circles) {
    EXPECT_EQ(c.k, p.circles[v].k);
    EXPECT_EQ(c.khat, p.circles[v].khat);
    EXPECT_EQ(c.kc, p.circles[v].kc);
  }
  EXPECT_EQ(j.at("anchors").size(), 3u);
  EXPECT_LT(j.at("residual").get<double>(), 1e-10);
}

TEST(ReportCsv, HeaderAndRows) {
  ConvergenceReport rep;
  rep.n = {1, 2};
  rep.d = {0.5, 0.25};
  rep.runtime_ms = {1.0, 2.0};
  EXPECT_EQ(report_csv(rep), "n,d_n,runtime_ms\n1,0.5,1\n2,0.25,2\n");
}
