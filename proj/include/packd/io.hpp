#pragma once

// JSON and CSV forms of complexes, packings, verdicts and reports.

#include <sstream>
#include <string>

#include "packd/combinatorics.hpp"
#include "packd/metrics.hpp"
#include "packd/packer.hpp"
#include "packd/rule_io.hpp"

namespace packd {

namespace detail {

inline Json address_to_json(const Address& a) { return {{"path", a.path}, {"index", a.index}}; }

inline Address address_from_json(const Json& j) {
  return {j.at("path").get<std::vector<int>>(), j.at("index").get<int>()};
}

}  // namespace detail

// ---- graphs ----

/// Faces list their walks and the edge id of every side, so multi-edges and
/// loops reload with the same gluing and the same edge numbering.
inline Json complex_to_json(const PlaneComplex& c, const SubdivisionRule* r = nullptr) {
  Json j;
  j["vertices"] = Json::array();
  for (VertexId v = 0; v < c.vertex_count(); ++v) {
    const auto& info = c.vertex(v);
    j["vertices"].push_back({{"id", v},
                             {"level", info.level},
                             {"hub", info.hub},
                             {"birth", detail::address_to_json(info.birth)},
                             {"address", detail::address_to_json(info.address)}});
  }
  j["faces"] = Json::array();
  for (const auto& f : c.faces()) {
    Json fj;
    fj["cycle"] = f.walk;
    std::vector<EdgeId> labels;
    for (DartId d : f.darts) labels.push_back(c.dart(d).edge);
    fj["labels"] = labels;
    fj["type"] = f.info.type ? Json(*f.info.type) : Json();
    if (r && f.info.type) fj["type_name"] = r->polygons[*f.info.type].name;
    fj["level"] = f.info.level;
    fj["mirrored"] = f.info.mirrored;
    fj["lineage"] = f.info.lineage;
    fj["anchor"] = f.info.anchor;
    j["faces"].push_back(std::move(fj));
  }
  j["external"] = c.external_face() ? Json(*c.external_face()) : Json();
  return j;
}

inline PlaneComplex complex_from_json(const Json& j) {
  try {
    std::vector<VertexInfo> vertices;
    for (const auto& vj : j.at("vertices")) {
      VertexInfo info;
      info.level = vj.value("level", 0);
      info.hub = vj.value("hub", false);
      if (vj.contains("birth")) info.birth = detail::address_from_json(vj.at("birth"));
      if (vj.contains("address")) info.address = detail::address_from_json(vj.at("address"));
      const auto id = vj.at("id").get<std::size_t>();
      if (id >= vertices.size()) vertices.resize(id + 1);
      vertices[id] = std::move(info);
    }
    std::vector<FaceSpec> faces;
    for (const auto& fj : j.at("faces")) {
      FaceSpec s;
      s.cycle = fj.at("cycle").get<std::vector<VertexId>>();
      s.labels = fj.value("labels", std::vector<std::int64_t>{});
      if (fj.contains("type") && !fj.at("type").is_null()) s.info.type = fj.at("type").get<std::size_t>();
      s.info.level = fj.value("level", 0);
      s.info.mirrored = fj.value("mirrored", false);
      s.info.lineage = fj.value("lineage", std::vector<int>{});
      s.info.anchor = fj.value("anchor", std::vector<int>{});
      faces.push_back(std::move(s));
    }
    std::optional<FaceId> external;
    if (j.contains("external") && !j.at("external").is_null()) external = j.at("external").get<FaceId>();
    return PlaneComplex::build(std::move(faces), external, std::move(vertices));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("graph file: ") + e.what());
  }
}

// ---- packings ----

inline Json circle_to_json(const Circle& c) {
  Json j{{"k", c.k}, {"khat", c.khat}, {"kc_re", c.kc.real()}, {"kc_im", c.kc.imag()}};
  if (c.is_line()) {
    j["center"] = nullptr;
    j["radius"] = nullptr;
  } else {
    j["center"] = {c.center().real(), c.center().imag()};
    j["radius"] = c.radius();
  }
  return j;
}

inline Circle circle_from_json(const Json& j) {
  return {j.at("k").get<double>(), j.at("khat").get<double>(),
          {j.at("kc_re").get<double>(), j.at("kc_im").get<double>()}};
}

inline Json packing_to_json(const CirclePacking& p) {
  Json j;
  j["vertices"] = Json::array();
  for (VertexId v = 0; v < p.circles.size(); ++v) {
    if (!p.marked[v] && !p.is_hub(v)) continue;
    j["vertices"].push_back({{"id", v},
                             {"level", p.complex->vertex(v).level},
                             {"hub", p.is_hub(v)},
                             {"circle", circle_to_json(p.circles[v])}});
  }
  j["anchors"] = Json::array();
  for (const auto& [a, b] : p.anchors) j["anchors"].push_back({a, b});
  j["infinity_vertex"] = p.infinity_vertex;
  j["residual"] = p.residual;
  j["iterations"] = p.iterations;
  j["tangency_audit"] = tangency_audit(p);
  return j;
}

/// Circles of a packing file by vertex id (hubs included).
inline std::map<VertexId, Circle> packing_circles_from_json(const Json& j) {
  std::map<VertexId, Circle> out;
  try {
    for (const auto& vj : j.at("vertices")) out[vj.at("id").get<VertexId>()] = circle_from_json(vj.at("circle"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("packing file: ") + e.what());
  }
  return out;
}

// ---- verdicts ----

inline Json pair_state_to_json(const PairState& s) { return {{"type", s.type}, {"p", s.p}, {"q", s.q}}; }

inline std::string to_string(PairOutcome o) {
  switch (o) {
    case PairOutcome::Connected: return "connected";
    case PairOutcome::Cylindrical: return "cylindrical";
    case PairOutcome::Unresolved: return "unresolved";
  }
  return "unresolved";
}

inline Json verdict_to_json(const PredicateVerdict& v, const SubdivisionRule& r) {
  Json j{{"predicate", v.predicate}, {"status", to_string(v.status)}, {"levels_checked", v.levels_checked}};
  if (v.polygon) j["polygon"] = r.polygons[*v.polygon].name;
  if (v.edge) j["edge"] = {v.edge->first, v.edge->second};
  if (!v.chain.empty()) {
    j["chain"] = Json::array();
    for (const auto& s : v.chain) j["chain"].push_back(pair_state_to_json(s));
  }
  if (!v.pairs.empty()) {
    j["pairs"] = Json::array();
    for (const auto& c : v.pairs) {
      Json cj{{"polygon", r.polygons[c.pair.type].name},
              {"pair", {c.pair.p, c.pair.q}},
              {"outcome", to_string(c.outcome)},
              {"level", c.level}};
      if (!c.path.empty()) cj["path"] = c.path;
      if (!c.period.empty()) {
        cj["period"] = Json::array();
        for (const auto& s : c.period) cj["period"].push_back(pair_state_to_json(s));
      }
      j["pairs"].push_back(std::move(cj));
    }
  }
  return j;
}

// ---- reports ----

inline std::string report_csv(const ConvergenceReport& rep) {
  std::ostringstream out;
  out.precision(17);
  out << "n,d_n,runtime_ms\n";
  for (std::size_t i = 0; i < rep.n.size(); ++i) {
    out << rep.n[i] << ',' << rep.d[i] << ',' << rep.runtime_ms[i] << '\n';
  }
  return out.str();
}

inline Json report_to_json(const ConvergenceReport& rep) {
  Json j{{"polygon", rep.polygon}, {"j", rep.j}, {"n", rep.n}, {"d_n", rep.d}, {"runtime_ms", rep.runtime_ms}};
  j["delta"] = rep.delta ? Json(*rep.delta) : Json();
  j["delta_is_proxy"] = true;
  j["fit_residual"] = rep.fit_residual;
  return j;
}

}  // namespace packd
