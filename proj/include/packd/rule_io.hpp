#pragma once

// JSON reading and writing of subdivision rule files.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "packd/error.hpp"
#include "packd/subdivision.hpp"

namespace packd {

using Json = nlohmann::json;

namespace detail {

inline VertexRef ref_from_json(const Json& j) {
  if (j.contains("b")) return {true, j.at("b").get<int>()};
  if (j.contains("i")) return {false, j.at("i").get<int>()};
  throw Error(ErrorCode::Parse, "vertex reference needs a \"b\" or \"i\" key");
}

inline Json ref_to_json(const VertexRef& r) { return Json{{r.boundary ? "b" : "i", r.index}}; }

inline Correspondence corr_from_json(const Json& j) {
  Correspondence c;
  if (j.is_object()) {
    c.rotation = j.value("rotation", 0);
    c.reflect = j.value("reflect", false);
  }
  return c;
}

inline Json corr_to_json(const Correspondence& c) {
  return Json{{"rotation", c.rotation}, {"reflect", c.reflect}};
}

inline AssignmentDesc assignment_from_json(const Json& j) {
  return {j.at("type").get<std::string>(), corr_from_json(j.value("correspondence", Json()))};
}

}  // namespace detail

inline RuleDescription rule_description_from_json(const Json& j) {
  try {
    RuleDescription d;
    for (const auto& p : j.at("polygons")) {
      d.polygons.push_back({p.at("name").get<std::string>(), p.at("sides").get<int>()});
    }
    for (const auto& [name, sj] : j.at("subdivisions").items()) {
      TemplateDesc t;
      t.interior = sj.value("interior_vertices", std::vector<int>{});
      if (sj.contains("edges")) {
        for (const auto& e : sj.at("edges")) {
          t.edges.push_back({detail::ref_from_json(e.at(0)), detail::ref_from_json(e.at(1))});
        }
      }
      for (const auto& fj : sj.at("faces")) {
        TemplateFaceDesc f;
        for (const auto& r : fj.at("cycle")) f.cycle.push_back(detail::ref_from_json(r));
        f.primary = detail::assignment_from_json(fj);
        if (fj.contains("alternatives")) {
          for (const auto& a : fj.at("alternatives")) {
            f.alternatives.push_back(detail::assignment_from_json(a));
          }
        }
        f.labels = fj.value("labels", std::vector<std::int64_t>{});
        f.name = fj.value("name", std::string{});
        f.origin = fj.value("origin", std::vector<int>{});
        t.faces.push_back(std::move(f));
      }
      if (sj.contains("interior_origin")) {
        for (const auto& a : sj.at("interior_origin")) {
          t.interior_origin.push_back(
              {a.at("path").get<std::vector<int>>(), a.at("index").get<int>()});
        }
      }
      d.subdivisions.emplace(name, std::move(t));
    }
    if (j.contains("sphere") && !j.at("sphere").is_null()) {
      const Json& sj = j.at("sphere");
      ShellDesc s;
      s.vertices = sj.at("vertices").get<std::size_t>();
      for (const auto& fj : sj.at("faces")) {
        ShellFaceDesc f;
        f.cycle = fj.at("cycle").get<std::vector<VertexId>>();
        f.type = fj.at("type").get<std::string>();
        f.corr = detail::corr_from_json(fj.value("correspondence", Json()));
        f.labels = fj.value("labels", std::vector<std::int64_t>{});
        s.faces.push_back(std::move(f));
      }
      d.sphere = std::move(s);
    }
    if (j.contains("words")) {
      for (const auto& [name, w] : j.at("words").items()) d.words[name] = w.get<std::vector<int>>();
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("rule file: ") + e.what());
  }
}

inline Json rule_description_to_json(const RuleDescription& d) {
  Json j;
  j["polygons"] = Json::array();
  for (const auto& p : d.polygons) j["polygons"].push_back({{"name", p.name}, {"sides", p.sides}});
  j["subdivisions"] = Json::object();
  for (const auto& [name, t] : d.subdivisions) {
    Json tj;
    tj["interior_vertices"] = t.interior;
    if (!t.edges.empty()) {
      tj["edges"] = Json::array();
      for (const auto& [a, b] : t.edges) {
        tj["edges"].push_back({detail::ref_to_json(a), detail::ref_to_json(b)});
      }
    }
    tj["faces"] = Json::array();
    for (const auto& f : t.faces) {
      Json fj;
      fj["cycle"] = Json::array();
      for (const auto& r : f.cycle) fj["cycle"].push_back(detail::ref_to_json(r));
      fj["type"] = f.primary.type;
      fj["correspondence"] = detail::corr_to_json(f.primary.corr);
      if (!f.alternatives.empty()) {
        fj["alternatives"] = Json::array();
        for (const auto& a : f.alternatives) {
          fj["alternatives"].push_back(
              {{"type", a.type}, {"correspondence", detail::corr_to_json(a.corr)}});
        }
      }
      if (!f.labels.empty()) fj["labels"] = f.labels;
      if (!f.name.empty()) fj["name"] = f.name;
      if (!f.origin.empty()) fj["origin"] = f.origin;
      tj["faces"].push_back(std::move(fj));
    }
    if (!t.interior_origin.empty()) {
      tj["interior_origin"] = Json::array();
      for (const auto& a : t.interior_origin) {
        tj["interior_origin"].push_back({{"path", a.path}, {"index", a.index}});
      }
    }
    j["subdivisions"][name] = std::move(tj);
  }
  if (d.sphere) {
    Json sj;
    sj["vertices"] = d.sphere->vertices;
    sj["faces"] = Json::array();
    for (const auto& f : d.sphere->faces) {
      Json fj{{"cycle", f.cycle}, {"type", f.type}, {"correspondence", detail::corr_to_json(f.corr)}};
      if (!f.labels.empty()) fj["labels"] = f.labels;
      sj["faces"].push_back(std::move(fj));
    }
    j["sphere"] = std::move(sj);
  }
  if (!d.words.empty()) j["words"] = d.words;
  return j;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

inline SubdivisionRule load_rule(const std::string& path) {
  return validate_rule(rule_description_from_json(read_json_file(path)));
}

}  // namespace packd
