#pragma once

// Finite subdivision rules: polygon types, per-type templates, boundary
// correspondences, and iteration on polygons and sphere complexes.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "packd/error.hpp"
#include "packd/plane_complex.hpp"

namespace packd {

/// Boundary correspondence psi: target-type boundary position p goes to face
/// cycle position (p + rotation) mod e, or (rotation - p) mod e when reflected.
struct Correspondence {
  int rotation = 0;
  bool reflect = false;

  std::size_t apply(std::size_t p, std::size_t e) const {
    const long r = ((rotation % static_cast<long>(e)) + static_cast<long>(e)) % static_cast<long>(e);
    const long q = reflect ? r - static_cast<long>(p) : r + static_cast<long>(p);
    return static_cast<std::size_t>(((q % static_cast<long>(e)) + static_cast<long>(e)) %
                                    static_cast<long>(e));
  }
  friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

struct VertexRef {
  bool boundary = true;
  int index = 0;  // boundary position, or interior vertex id as written in the rule
  friend bool operator==(const VertexRef&, const VertexRef&) = default;
};

// ---- unvalidated description, as read from a rule file ----

struct AssignmentDesc {
  std::string type;
  Correspondence corr;
};

struct TemplateFaceDesc {
  std::vector<VertexRef> cycle;
  std::vector<std::int64_t> labels;  // optional per-side edge labels
  AssignmentDesc primary;
  std::vector<AssignmentDesc> alternatives;
  std::string name;
  std::vector<int> origin;  // anchor path relative to the parent (default: [face index])
};

struct TemplateDesc {
  std::vector<int> interior;
  std::vector<std::pair<VertexRef, VertexRef>> edges;  // optional; checked if present
  std::vector<TemplateFaceDesc> faces;
  std::vector<Address> interior_origin;  // optional, one per interior vertex
};

struct ShellFaceDesc {
  std::vector<VertexId> cycle;
  std::vector<std::int64_t> labels;
  std::string type;
  Correspondence corr;
};

struct ShellDesc {
  std::size_t vertices = 0;
  std::vector<ShellFaceDesc> faces;
};

struct PolygonDesc {
  std::string name;
  int sides = 0;
};

struct RuleDescription {
  std::vector<PolygonDesc> polygons;
  std::map<std::string, TemplateDesc> subdivisions;
  std::optional<ShellDesc> sphere;
  std::map<std::string, std::vector<int>> words;
};

// ---- validated rule ----

struct Assignment {
  std::size_t type = 0;
  Correspondence corr;
};

struct TemplateFace {
  std::vector<VertexId> cycle;       // local ids: boundary k -> k, interior slot s -> sides + s
  std::vector<EdgeId> side_edges;    // template edge of side i (cycle[i] -> cycle[i+1])
  std::vector<Assignment> choices;   // [0] is the rule's primary assignment
  std::string name;
  std::vector<int> origin;
};

struct Template {
  std::size_t sides = 0;
  std::size_t interior_count = 0;
  std::vector<TemplateFace> faces;
  std::vector<std::optional<std::size_t>> boundary_position;  // per template edge
  std::vector<Address> interior_origin;
  PlaneComplex complex;  // template with its external face last

  std::optional<std::size_t> face_by_name(const std::string& n) const {
    for (std::size_t j = 0; j < faces.size(); ++j) {
      if (faces[j].name == n) return j;
    }
    return std::nullopt;
  }
};

struct PolygonType {
  std::string name;
  std::size_t sides = 0;
};

struct SubdivisionRule {
  std::vector<PolygonType> polygons;
  std::vector<Template> templates;  // parallel to polygons
  RuleDescription source;

  std::size_t type_index(const std::string& name) const {
    for (std::size_t i = 0; i < polygons.size(); ++i) {
      if (polygons[i].name == name) return i;
    }
    throw Error(ErrorCode::UnknownType, "unknown polygon type '" + name + "'");
  }
  bool has_sphere() const { return source.sphere.has_value(); }
};

namespace detail {

inline std::size_t resolve_type(const std::map<std::string, std::size_t>& index,
                                const std::string& name) {
  const auto it = index.find(name);
  if (it == index.end()) throw Error(ErrorCode::UnknownType, "unknown polygon type '" + name + "'");
  return it->second;
}

inline Template build_template(const PolygonDesc& poly, const TemplateDesc& desc,
                               const std::map<std::string, std::size_t>& index,
                               const std::vector<PolygonDesc>& polys) {
  Template t;
  const std::size_t e = static_cast<std::size_t>(poly.sides);
  t.sides = e;
  t.interior_count = desc.interior.size();
  std::map<int, std::size_t> slot;
  for (std::size_t s = 0; s < desc.interior.size(); ++s) {
    if (!slot.emplace(desc.interior[s], s).second) {
      throw Error(ErrorCode::Parse, poly.name + ": duplicate interior vertex id");
    }
  }
  auto local = [&](const VertexRef& r) -> VertexId {
    if (r.boundary) {
      if (r.index < 0 || static_cast<std::size_t>(r.index) >= e) {
        throw Error(ErrorCode::ArityMismatch, poly.name + ": boundary reference out of range");
      }
      return static_cast<VertexId>(r.index);
    }
    const auto it = slot.find(r.index);
    if (it == slot.end()) {
      throw Error(ErrorCode::Parse,
                  poly.name + ": undeclared interior vertex " + std::to_string(r.index));
    }
    return static_cast<VertexId>(e + it->second);
  };

  if (desc.faces.size() < 2) {
    throw Error(ErrorCode::TooFewCells,
                poly.name + ": subdivision has " + std::to_string(desc.faces.size()) + " cell(s)");
  }

  std::vector<FaceSpec> specs;
  for (std::size_t j = 0; j < desc.faces.size(); ++j) {
    const auto& fd = desc.faces[j];
    TemplateFace tf;
    for (const auto& r : fd.cycle) tf.cycle.push_back(local(r));
    auto add_choice = [&](const AssignmentDesc& a) {
      const std::size_t ty = resolve_type(index, a.type);
      if (static_cast<std::size_t>(polys[ty].sides) != tf.cycle.size()) {
        throw Error(ErrorCode::ArityMismatch, poly.name + ": face " + std::to_string(j) +
                                                  " has " + std::to_string(tf.cycle.size()) +
                                                  " sides but type '" + a.type + "' has " +
                                                  std::to_string(polys[ty].sides));
      }
      tf.choices.push_back({ty, a.corr});
    };
    add_choice(fd.primary);
    for (const auto& a : fd.alternatives) add_choice(a);
    tf.name = fd.name;
    tf.origin = fd.origin.empty() ? std::vector<int>{static_cast<int>(j)} : fd.origin;
    specs.push_back(FaceSpec{tf.cycle, fd.labels, {}});
    t.faces.push_back(std::move(tf));
  }

  // Every boundary side must survive as the side of one cell.
  for (std::size_t k = 0; k < e; ++k) {
    const VertexId a = static_cast<VertexId>(k), b = static_cast<VertexId>((k + 1) % e);
    bool found = false;
    for (const auto& tf : t.faces) {
      for (std::size_t i = 0; i < tf.cycle.size(); ++i) {
        if (tf.cycle[i] == a && tf.cycle[(i + 1) % tf.cycle.size()] == b) found = true;
      }
    }
    if (!found) {
      throw Error(ErrorCode::BoundarySubdivided,
                  poly.name + ": boundary edge b" + std::to_string(k) + "-b" +
                      std::to_string((k + 1) % e) + " is not a cell side");
    }
  }

  std::vector<VertexId> ext;
  for (std::size_t i = 0; i < e; ++i) ext.push_back(static_cast<VertexId>((e - i) % e));
  specs.push_back(FaceSpec{ext, {}, {}});
  std::vector<VertexInfo> vinfo(e + t.interior_count);
  t.complex = PlaneComplex::build(std::move(specs), static_cast<FaceId>(desc.faces.size()),
                                  std::move(vinfo));

  t.boundary_position.assign(t.complex.edge_count(), std::nullopt);
  const Face& ext_face = t.complex.face(static_cast<FaceId>(desc.faces.size()));
  for (std::size_t i = 0; i < e; ++i) {
    t.boundary_position[t.complex.dart(ext_face.darts[i]).edge] = (e - i - 1) % e;
  }
  for (std::size_t j = 0; j < t.faces.size(); ++j) {
    for (DartId d : t.complex.face(static_cast<FaceId>(j)).darts) {
      t.faces[j].side_edges.push_back(t.complex.dart(d).edge);
    }
  }
  for (const auto& [u, v] : desc.edges) {
    if (!t.complex.adjacent(local(u), local(v))) {
      throw Error(ErrorCode::NonManifold, poly.name + ": declared edge is not a cell side");
    }
  }
  if (!desc.interior_origin.empty() && desc.interior_origin.size() != t.interior_count) {
    throw Error(ErrorCode::Parse, poly.name + ": interior_origin length mismatch");
  }
  t.interior_origin = desc.interior_origin;
  if (t.interior_origin.empty()) {
    for (std::size_t s = 0; s < t.interior_count; ++s) t.interior_origin.push_back({{}, static_cast<int>(s)});
  }
  return t;
}

}  // namespace detail

/// Checks a rule description and resolves it into a SubdivisionRule.
inline SubdivisionRule validate_rule(const RuleDescription& desc) {
  SubdivisionRule rule;
  rule.source = desc;
  std::map<std::string, std::size_t> index;
  for (const auto& p : desc.polygons) {
    if (p.sides < 3) throw Error(ErrorCode::ArityMismatch, p.name + ": fewer than 3 sides");
    if (!index.emplace(p.name, rule.polygons.size()).second) {
      throw Error(ErrorCode::Parse, "duplicate polygon type '" + p.name + "'");
    }
    rule.polygons.push_back({p.name, static_cast<std::size_t>(p.sides)});
  }
  if (rule.polygons.empty()) throw Error(ErrorCode::Parse, "rule declares no polygon types");
  for (const auto& [name, _] : desc.subdivisions) detail::resolve_type(index, name);
  for (const auto& p : desc.polygons) {
    const auto it = desc.subdivisions.find(p.name);
    if (it == desc.subdivisions.end()) {
      throw Error(ErrorCode::UnknownType, "no subdivision for polygon type '" + p.name + "'");
    }
    rule.templates.push_back(detail::build_template(p, it->second, index, desc.polygons));
  }
  if (desc.sphere) {
    for (const auto& f : desc.sphere->faces) {
      const std::size_t ty = detail::resolve_type(index, f.type);
      if (rule.polygons[ty].sides != f.cycle.size()) {
        throw Error(ErrorCode::ArityMismatch, "sphere shell face length differs from its type");
      }
    }
  }
  return rule;
}

// ---- choosers ----

struct ChoiceContext {
  const PlaneComplex& parent;
  FaceId face;
  std::size_t template_face;
  int parent_level;
  std::size_t admissible;  // number of admissible assignments
};

/// Returns an index into the template face's admissible assignment list.
using Chooser = std::function<std::size_t(const ChoiceContext&)>;

inline Chooser default_chooser() {
  return [](const ChoiceContext&) { return std::size_t{0}; };
}

/// Deterministic interpolation chooser: level l uses word[l mod |word|].
inline Chooser choice_word_chooser(std::vector<std::size_t> word) {
  if (word.empty()) return default_chooser();
  return [word = std::move(word)](const ChoiceContext& ctx) {
    const std::size_t c = word[static_cast<std::size_t>(ctx.parent_level) % word.size()];
    return c < ctx.admissible ? c : std::size_t{0};
  };
}

// ---- frames ----

/// Vertex at boundary position p of a typed face's frame.
inline VertexId frame_vertex(const Face& f, std::size_t p) {
  const std::size_t e = f.walk.size();
  return f.info.mirrored ? f.walk[(e - p) % e] : f.walk[p];
}

/// Walk side index carrying frame side p (frame position p -> p+1).
inline std::size_t frame_side(const Face& f, std::size_t p) {
  const std::size_t e = f.walk.size();
  return f.info.mirrored ? (e - p - 1) % e : p;
}

/// Walk of a face whose frame positions are given by `frame` (ccw unless mirrored).
inline std::vector<VertexId> walk_from_frame(const std::vector<VertexId>& frame, bool mirrored) {
  const std::size_t e = frame.size();
  std::vector<VertexId> walk(e);
  for (std::size_t i = 0; i < e; ++i) walk[i] = mirrored ? frame[(e - i) % e] : frame[i];
  return walk;
}

// ---- subdivision ----

inline PlaneComplex subdivide_once(const PlaneComplex& c, const SubdivisionRule& r,
                                   const Chooser& chooser = default_chooser()) {
  std::vector<VertexInfo> vertices = c.vertices();
  std::vector<FaceSpec> out;
  std::optional<FaceId> external;
  const std::int64_t base_label = static_cast<std::int64_t>(c.edge_count());
  std::int64_t next_label = base_label;

  auto labels_of = [&](const Face& f) {
    std::vector<std::int64_t> l;
    for (DartId d : f.darts) l.push_back(static_cast<std::int64_t>(c.dart(d).edge));
    return l;
  };

  for (FaceId fi = 0; fi < c.face_count(); ++fi) {
    const Face& parent = c.face(fi);
    if (c.external_face() && *c.external_face() == fi) {
      external = static_cast<FaceId>(out.size());
      out.push_back(FaceSpec{parent.walk, labels_of(parent), parent.info});
      continue;
    }
    if (!parent.info.type) {
      throw Error(ErrorCode::UntypedFace, "face " + std::to_string(fi) + " carries no type");
    }
    const std::size_t ty = *parent.info.type;
    const Template& t = r.templates.at(ty);
    const std::size_t e = t.sides;
    if (parent.walk.size() != e) {
      throw Error(ErrorCode::ArityMismatch, "face " + std::to_string(fi) + " does not match type '" +
                                                r.polygons[ty].name + "'");
    }
    // Template local id -> actual vertex.
    std::vector<VertexId> actual(e + t.interior_count);
    for (std::size_t p = 0; p < e; ++p) actual[p] = frame_vertex(parent, p);
    for (std::size_t s = 0; s < t.interior_count; ++s) {
      actual[e + s] = static_cast<VertexId>(vertices.size());
      VertexInfo vi;
      vi.level = parent.info.level + 1;
      vi.birth = {parent.info.lineage, static_cast<int>(s)};
      vi.address.path = parent.info.anchor;
      vi.address.path.insert(vi.address.path.end(), t.interior_origin[s].path.begin(),
                             t.interior_origin[s].path.end());
      vi.address.index = t.interior_origin[s].index;
      vertices.push_back(std::move(vi));
    }
    const std::vector<std::int64_t> parent_labels = labels_of(parent);
    auto template_edge_label = [&](EdgeId te) -> std::int64_t {
      if (const auto k = t.boundary_position[te]) return parent_labels[frame_side(parent, *k)];
      return next_label + static_cast<std::int64_t>(te);
    };

    for (std::size_t j = 0; j < t.faces.size(); ++j) {
      const TemplateFace& tf = t.faces[j];
      const ChoiceContext ctx{c, fi, j, parent.info.level, tf.choices.size()};
      const std::size_t pick = chooser(ctx);
      if (pick >= tf.choices.size()) {
        throw Error(ErrorCode::ChooserRejected,
                    "choice " + std::to_string(pick) + " not admissible for template face " +
                        std::to_string(j));
      }
      const Assignment& a = tf.choices[pick];
      const std::size_t n = tf.cycle.size();
      FaceInfo info;
      info.type = a.type;
      info.level = parent.info.level + 1;
      info.mirrored = parent.info.mirrored != a.corr.reflect;
      info.lineage = parent.info.lineage;
      info.lineage.push_back(static_cast<int>(j));
      info.anchor = parent.info.anchor;
      info.anchor.insert(info.anchor.end(), tf.origin.begin(), tf.origin.end());

      // Template cycle position of each walk index.
      std::vector<std::size_t> q(n);
      for (std::size_t i = 0; i < n; ++i) {
        q[i] = a.corr.apply(info.mirrored ? (n - i) % n : i, n);
      }
      FaceSpec spec;
      spec.info = std::move(info);
      for (std::size_t i = 0; i < n; ++i) {
        spec.cycle.push_back(actual[tf.cycle[q[i]]]);
        const std::size_t qn = q[(i + 1) % n];
        const std::size_t side = (q[i] + 1) % n == qn ? q[i] : qn;
        spec.labels.push_back(template_edge_label(tf.side_edges[side]));
      }
      out.push_back(std::move(spec));
    }
    next_label += static_cast<std::int64_t>(t.complex.edge_count());
  }
  return PlaneComplex::build(std::move(out), external, std::move(vertices));
}

/// The single polygon of the given type with its external face (level 0).
inline PlaneComplex base_polygon(const SubdivisionRule& r, std::size_t type) {
  const std::size_t e = r.polygons.at(type).sides;
  std::vector<VertexInfo> vertices(e);
  for (std::size_t p = 0; p < e; ++p) vertices[p].birth = vertices[p].address = {{}, static_cast<int>(p)};
  FaceSpec inner;
  FaceSpec outer;
  for (std::size_t p = 0; p < e; ++p) {
    inner.cycle.push_back(static_cast<VertexId>(p));
    outer.cycle.push_back(static_cast<VertexId>((e - p) % e));
  }
  inner.info.type = type;
  return PlaneComplex::build({inner, outer}, 1, std::move(vertices));
}

inline PlaneComplex iterate(const SubdivisionRule& r, std::size_t type, int n,
                            const Chooser& chooser = default_chooser()) {
  if (n < 0) throw Error(ErrorCode::LevelOutOfRange, "negative level");
  PlaneComplex c = base_polygon(r, type);
  for (int i = 0; i < n; ++i) c = subdivide_once(c, r, chooser);
  return c;
}

inline PlaneComplex iterate(const SubdivisionRule& r, const std::string& type, int n,
                            const Chooser& chooser = default_chooser()) {
  return iterate(r, r.type_index(type), n, chooser);
}

/// Sphere complex from a shell description; every face is typed, none external.
inline PlaneComplex sphere_complex(const SubdivisionRule& r, const ShellDesc& shell) {
  std::vector<FaceSpec> specs;
  std::size_t nv = shell.vertices;
  for (std::size_t fi = 0; fi < shell.faces.size(); ++fi) {
    const auto& f = shell.faces[fi];
    const std::size_t ty = r.type_index(f.type);
    const std::size_t e = f.cycle.size();
    if (e != r.polygons[ty].sides) {
      throw Error(ErrorCode::ArityMismatch, "shell face " + std::to_string(fi) +
                                                " length differs from type '" + f.type + "'");
    }
    if (!f.labels.empty() && f.labels.size() != e) {
      throw Error(ErrorCode::ArityMismatch, "shell face label count differs from its length");
    }
    FaceSpec spec;
    spec.info.type = ty;
    spec.info.mirrored = f.corr.reflect;
    spec.info.lineage = spec.info.anchor = {static_cast<int>(fi)};
    std::vector<std::size_t> q(e);
    for (std::size_t i = 0; i < e; ++i) q[i] = f.corr.apply(f.corr.reflect ? (e - i) % e : i, e);
    for (std::size_t i = 0; i < e; ++i) {
      spec.cycle.push_back(f.cycle[q[i]]);
      nv = std::max<std::size_t>(nv, f.cycle[q[i]] + 1);
      if (!f.labels.empty()) {
        const std::size_t qn = q[(i + 1) % e];
        spec.labels.push_back(f.labels[(q[i] + 1) % e == qn ? q[i] : qn]);
      }
    }
    specs.push_back(std::move(spec));
  }
  std::vector<VertexInfo> vertices(nv);
  for (std::size_t v = 0; v < nv; ++v) vertices[v].birth = vertices[v].address = {{}, static_cast<int>(v)};
  return PlaneComplex::build(std::move(specs), std::nullopt, std::move(vertices));
}

inline PlaneComplex sphere_complex(const SubdivisionRule& r) {
  if (!r.source.sphere) throw Error(ErrorCode::UnknownType, "rule has no sphere shell");
  return sphere_complex(r, *r.source.sphere);
}

inline PlaneComplex iterate_sphere(const SubdivisionRule& r, int n,
                                   const Chooser& chooser = default_chooser()) {
  if (n < 0) throw Error(ErrorCode::LevelOutOfRange, "negative level");
  PlaneComplex c = sphere_complex(r);
  for (int i = 0; i < n; ++i) c = subdivide_once(c, r, chooser);
  return c;
}

/// Number of internal faces of each type after n steps, from the type-transition matrix.
inline std::vector<std::size_t> face_counts_by_recurrence(const SubdivisionRule& r,
                                                          std::size_t type, int n) {
  std::vector<std::size_t> counts(r.polygons.size(), 0);
  counts[type] = 1;
  for (int step = 0; step < n; ++step) {
    std::vector<std::size_t> next(r.polygons.size(), 0);
    for (std::size_t t = 0; t < counts.size(); ++t) {
      for (const auto& f : r.templates[t].faces) next[f.choices[0].type] += counts[t];
    }
    counts = std::move(next);
  }
  return counts;
}

}  // namespace packd
