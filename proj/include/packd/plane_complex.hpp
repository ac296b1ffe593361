#pragma once

// Finite plane graphs with a combinatorial embedding (rotation system on
// darts). Disk complexes are sphere complexes with a designated external face.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "packd/error.hpp"

namespace packd {

using VertexId = std::uint32_t;
using FaceId = std::uint32_t;
using DartId = std::uint32_t;
using EdgeId = std::uint32_t;

inline constexpr std::int64_t kUnlabeled = -1;

/// Where a vertex came from in the subdivision hierarchy: born as interior
/// template vertex `index` of the face reached by `path`. Root polygon vertices
/// have an empty path and carry their boundary position.
struct Address {
  std::vector<int> path;
  int index = 0;

  friend auto operator<=>(const Address&, const Address&) = default;
};

struct VertexInfo {
  int level = 0;
  bool hub = false;
  Address birth;    // lineage of the creating face + template interior index
  Address address;  // same, expressed in the base rule's hierarchy (see FaceInfo::anchor)
};

struct FaceInfo {
  std::optional<std::size_t> type;  // polygon type index, if typed
  int level = 0;                    // subdivision level at which the face was created
  bool mirrored = false;            // template instantiated orientation-reversed
  std::vector<int> lineage;         // [root face, child index, child index, ...]
  std::vector<int> anchor;          // lineage expressed in the base rule's hierarchy
};

/// Input description of one face: a closed vertex walk and, optionally, an
/// edge label per side (side i runs from cycle[i] to cycle[i+1]).
struct FaceSpec {
  std::vector<VertexId> cycle;
  std::vector<std::int64_t> labels;  // empty, or one entry per side (kUnlabeled allowed)
  FaceInfo info;
};

struct Dart {
  VertexId origin = 0;
  DartId twin = 0;
  DartId next = 0;  // successor along the face walk
  FaceId face = 0;
  EdgeId edge = 0;
};

struct Face {
  std::vector<VertexId> walk;
  std::vector<DartId> darts;
  FaceInfo info;
};

class PlaneComplex {
 public:
  PlaneComplex() = default;

  /// Builds the complex from face walks. Sides with equal labels are glued;
  /// unlabeled sides are glued to the unique unlabeled reverse side.
  static PlaneComplex build(std::vector<FaceSpec> faces, std::optional<FaceId> external,
                            std::vector<VertexInfo> vertices = {}) {
    PlaneComplex pc;
    VertexId max_id = 0;
    bool any = false;
    for (const auto& f : faces) {
      if (f.cycle.empty()) throw Error(ErrorCode::NonManifold, "empty face cycle");
      if (!f.labels.empty() && f.labels.size() != f.cycle.size()) {
        throw Error(ErrorCode::NonManifold, "label count differs from cycle length");
      }
      for (VertexId v : f.cycle) {
        max_id = std::max(max_id, v);
        any = true;
      }
    }
    const std::size_t nv = any ? static_cast<std::size_t>(max_id) + 1 : 0;
    if (vertices.empty()) vertices.resize(nv);
    if (vertices.size() < nv) throw Error(ErrorCode::Disconnected, "vertex info shorter than ids");
    pc.vertices_ = std::move(vertices);

    // Darts, one per side.
    std::vector<std::int64_t> label_of;
    for (FaceId fi = 0; fi < faces.size(); ++fi) {
      const auto& spec = faces[fi];
      Face face;
      face.walk = spec.cycle;
      face.info = spec.info;
      const std::size_t n = spec.cycle.size();
      const DartId base = static_cast<DartId>(pc.darts_.size());
      for (std::size_t i = 0; i < n; ++i) {
        Dart d;
        d.origin = spec.cycle[i];
        d.face = fi;
        d.next = base + static_cast<DartId>((i + 1) % n);
        pc.darts_.push_back(d);
        face.darts.push_back(base + static_cast<DartId>(i));
        label_of.push_back(spec.labels.empty() ? kUnlabeled : spec.labels[i]);
      }
      pc.faces_.push_back(std::move(face));
    }
    auto head = [&](DartId d) { return pc.darts_[pc.darts_[d].next].origin; };

    constexpr DartId kNone = ~DartId{0};
    std::vector<DartId> twin(pc.darts_.size(), kNone);
    std::map<std::int64_t, std::vector<DartId>> by_label;
    std::map<std::pair<VertexId, VertexId>, std::vector<DartId>> by_ends;
    for (DartId d = 0; d < pc.darts_.size(); ++d) {
      if (label_of[d] != kUnlabeled) {
        by_label[label_of[d]].push_back(d);
      } else {
        by_ends[{pc.darts_[d].origin, head(d)}].push_back(d);
      }
    }
    for (const auto& [label, ds] : by_label) {
      if (ds.size() != 2) {
        throw Error(ErrorCode::NonManifold,
                    "edge label " + std::to_string(label) + " used " + std::to_string(ds.size()) +
                        " times");
      }
      const DartId a = ds[0], b = ds[1];
      if (pc.darts_[a].origin != head(b) || head(a) != pc.darts_[b].origin) {
        throw Error(ErrorCode::NonManifold,
                    "edge label " + std::to_string(label) + " glues sides with equal orientation");
      }
      twin[a] = b;
      twin[b] = a;
    }
    for (const auto& [ends, ds] : by_ends) {
      const auto [u, v] = ends;
      if (u == v) {
        if (ds.size() != 2) throw Error(ErrorCode::NonManifold, "unpaired loop side");
        twin[ds[0]] = ds[1];
        twin[ds[1]] = ds[0];
        continue;
      }
      const auto rev = by_ends.find({v, u});
      if (ds.size() != 1 || rev == by_ends.end() || rev->second.size() != 1) {
        throw Error(ErrorCode::NonManifold, "edge " + std::to_string(u) + "-" + std::to_string(v) +
                                                " is not shared by exactly two opposite sides");
      }
      twin[ds[0]] = rev->second[0];
    }
    EdgeId next_edge = 0;
    for (DartId d = 0; d < pc.darts_.size(); ++d) {
      if (twin[d] == kNone) throw Error(ErrorCode::NonManifold, "unmatched side");
      pc.darts_[d].twin = twin[d];
      if (twin[d] > d || twin[d] == d) {
        pc.darts_[d].edge = next_edge;
        pc.darts_[twin[d]].edge = next_edge;
        ++next_edge;
      }
    }
    pc.edge_count_ = next_edge;
    pc.external_ = external;
    if (external && *external >= pc.faces_.size()) {
      throw Error(ErrorCode::NonManifold, "external face index out of range");
    }
    pc.finish();
    return pc;
  }

  /// Convenience: unlabeled vertex cycles.
  static PlaneComplex build_from_faces(const std::vector<std::vector<VertexId>>& cycles,
                                       std::optional<FaceId> external) {
    std::vector<FaceSpec> specs;
    for (const auto& c : cycles) specs.push_back(FaceSpec{c, {}, {}});
    return build(std::move(specs), external);
  }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::size_t face_count() const { return faces_.size(); }
  std::size_t dart_count() const { return darts_.size(); }
  long euler_characteristic() const {
    return static_cast<long>(vertex_count()) - static_cast<long>(edge_count()) +
           static_cast<long>(face_count());
  }

  const std::vector<Face>& faces() const { return faces_; }
  const Face& face(FaceId f) const { return faces_.at(f); }
  const std::vector<Dart>& darts() const { return darts_; }
  const Dart& dart(DartId d) const { return darts_.at(d); }
  const VertexInfo& vertex(VertexId v) const { return vertices_.at(v); }
  const std::vector<VertexInfo>& vertices() const { return vertices_; }
  std::optional<FaceId> external_face() const { return external_; }

  VertexId head(DartId d) const { return darts_[darts_[d].next].origin; }
  /// Next dart around the origin of d.
  DartId rotate(DartId d) const { return darts_[darts_[d].twin].next; }
  /// Darts leaving v, in rotation order starting from an arbitrary one.
  const std::vector<DartId>& darts_at(VertexId v) const { return out_[v]; }

  /// Sorted, de-duplicated neighbours (self loops excluded).
  std::vector<VertexId> neighbors(VertexId v) const {
    std::vector<VertexId> out;
    for (DartId d : out_[v]) {
      const VertexId w = head(d);
      if (w != v) out.push_back(w);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::pair<VertexId, VertexId> edge_ends(EdgeId e) const {
    const DartId d = edge_dart_[e];
    return {darts_[d].origin, head(d)};
  }

  bool adjacent(VertexId a, VertexId b) const {
    for (DartId d : out_[a]) {
      if (head(d) == b) return true;
    }
    return false;
  }

  /// Orbits of the face-successor permutation, each started at its smallest dart.
  std::vector<std::vector<VertexId>> extract_faces() const {
    std::vector<bool> seen(darts_.size(), false);
    std::vector<std::vector<VertexId>> out;
    for (DartId d = 0; d < darts_.size(); ++d) {
      if (seen[d]) continue;
      std::vector<VertexId> walk;
      DartId e = d;
      while (!seen[e]) {
        seen[e] = true;
        walk.push_back(darts_[e].origin);
        e = darts_[e].next;
      }
      out.push_back(std::move(walk));
    }
    return out;
  }

  /// Face orbits (as darts) of the subgraph formed by `kept` edges, with the
  /// embedding inherited from this complex. The subgraph must be connected.
  std::vector<std::vector<DartId>> subgraph_face_darts(const std::vector<bool>& kept) const {
    auto keep = [&](DartId d) { return kept[darts_[d].edge]; };
    auto sigma = [&](DartId d) {
      DartId e = rotate(d);
      while (!keep(e)) e = rotate(e);
      return e;
    };
    std::vector<bool> seen(darts_.size(), false);
    std::vector<std::vector<DartId>> out;
    for (DartId d = 0; d < darts_.size(); ++d) {
      if (!keep(d) || seen[d]) continue;
      std::vector<DartId> orbit;
      DartId e = d;
      while (!seen[e]) {
        seen[e] = true;
        orbit.push_back(e);
        e = sigma(darts_[e].twin);
      }
      out.push_back(std::move(orbit));
    }
    return out;
  }

  std::vector<std::vector<VertexId>> subgraph_faces(const std::vector<bool>& kept) const {
    std::vector<std::vector<VertexId>> out;
    for (const auto& orbit : subgraph_face_darts(kept)) {
      std::vector<VertexId> walk;
      for (DartId d : orbit) walk.push_back(darts_[d].origin);
      out.push_back(std::move(walk));
    }
    return out;
  }

 private:
  void finish() {
    const std::size_t nv = vertices_.size();
    out_.assign(nv, {});
    std::vector<std::vector<DartId>> raw(nv);
    for (DartId d = 0; d < darts_.size(); ++d) raw[darts_[d].origin].push_back(d);
    for (VertexId v = 0; v < nv; ++v) {
      if (raw[v].empty()) {
        throw Error(ErrorCode::Disconnected, "vertex " + std::to_string(v) + " is on no face");
      }
      // The rotation orbit through any dart must cover every dart at the vertex.
      DartId d = raw[v].front();
      std::vector<DartId> orbit;
      do {
        orbit.push_back(d);
        d = rotate(d);
      } while (d != raw[v].front() && orbit.size() <= raw[v].size());
      if (orbit.size() != raw[v].size()) {
        throw Error(ErrorCode::NonManifold,
                    "vertex " + std::to_string(v) + " link is not a single cycle");
      }
      out_[v] = std::move(orbit);
    }
    edge_dart_.assign(edge_count_, 0);
    for (DartId d = darts_.size(); d-- > 0;) edge_dart_[darts_[d].edge] = d;

    // Connectivity over edges.
    if (nv > 0) {
      std::vector<bool> seen(nv, false);
      std::vector<VertexId> stack{0};
      seen[0] = true;
      std::size_t count = 1;
      while (!stack.empty()) {
        const VertexId v = stack.back();
        stack.pop_back();
        for (DartId d : out_[v]) {
          const VertexId w = head(d);
          if (!seen[w]) {
            seen[w] = true;
            ++count;
            stack.push_back(w);
          }
        }
      }
      if (count != nv) throw Error(ErrorCode::Disconnected, "graph is not connected");
    }
    if (euler_characteristic() != 2) {
      throw Error(ErrorCode::NonSphere,
                  "Euler characteristic " + std::to_string(euler_characteristic()));
    }
  }

  std::vector<VertexInfo> vertices_;
  std::vector<Dart> darts_;
  std::vector<Face> faces_;
  std::vector<std::vector<DartId>> out_;
  std::vector<DartId> edge_dart_;
  std::size_t edge_count_ = 0;
  std::optional<FaceId> external_;
};

/// First multi-edge or self loop, as (u, v) endpoints.
inline std::optional<std::pair<VertexId, VertexId>> simplicity_witness(const PlaneComplex& c) {
  std::set<std::pair<VertexId, VertexId>> seen;
  for (EdgeId e = 0; e < c.edge_count(); ++e) {
    auto [u, v] = c.edge_ends(e);
    if (u == v) return std::pair{u, v};
    if (u > v) std::swap(u, v);
    if (!seen.insert({u, v}).second) return std::pair{u, v};
  }
  return std::nullopt;
}

inline bool is_simple(const PlaneComplex& c) { return !simplicity_witness(c).has_value(); }

inline bool face_is_jordan(const PlaneComplex& c, FaceId f) {
  auto walk = c.face(f).walk;
  std::sort(walk.begin(), walk.end());
  return std::adjacent_find(walk.begin(), walk.end()) == walk.end();
}

/// True iff every edge joining two cycle vertices is a side of the cycle.
inline bool induced_check(const PlaneComplex& c, const std::vector<VertexId>& cycle) {
  const std::set<VertexId> on(cycle.begin(), cycle.end());
  std::set<std::pair<VertexId, VertexId>> sides;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    VertexId a = cycle[i], b = cycle[(i + 1) % cycle.size()];
    if (a > b) std::swap(a, b);
    sides.insert({a, b});
  }
  std::map<std::pair<VertexId, VertexId>, int> multiplicity;
  for (EdgeId e = 0; e < c.edge_count(); ++e) {
    auto [u, v] = c.edge_ends(e);
    if (!on.count(u) || !on.count(v)) continue;
    if (u > v) std::swap(u, v);
    if (!sides.count({u, v})) return false;
    if (++multiplicity[{u, v}] > 1) return false;  // a parallel copy is not a cycle side
  }
  return true;
}

/// Splits a cycle at two of its vertices into the two open arcs between them.
inline std::pair<std::vector<VertexId>, std::vector<VertexId>> boundary_arcs(
    const std::vector<VertexId>& cycle, VertexId v, VertexId w) {
  const auto iv = std::find(cycle.begin(), cycle.end(), v);
  const auto iw = std::find(cycle.begin(), cycle.end(), w);
  if (iv == cycle.end() || iw == cycle.end()) {
    throw Error(ErrorCode::LevelOutOfRange, "pair not on boundary cycle");
  }
  const std::size_t n = cycle.size();
  const std::size_t pv = static_cast<std::size_t>(iv - cycle.begin());
  const std::size_t pw = static_cast<std::size_t>(iw - cycle.begin());
  std::vector<VertexId> a, b;
  for (std::size_t i = (pv + 1) % n; i != pw; i = (i + 1) % n) a.push_back(cycle[i]);
  for (std::size_t i = (pw + 1) % n; i != pv; i = (i + 1) % n) b.push_back(cycle[i]);
  return {a, b};
}

/// Whether the two components of boundary - {v, w} lie in one component of
/// the graph with v and w removed.
inline bool arcs_connected_without(const PlaneComplex& c, const std::vector<VertexId>& boundary,
                                   VertexId v, VertexId w) {
  const auto [arc_a, arc_b] = boundary_arcs(boundary, v, w);
  if (arc_a.empty() || arc_b.empty()) return false;
  std::vector<char> state(c.vertex_count(), 0);
  state[v] = state[w] = 2;  // removed
  for (VertexId x : arc_b) state[x] = 3;
  std::vector<VertexId> stack;
  for (VertexId x : arc_a) {
    state[x] = 1;
    stack.push_back(x);
  }
  while (!stack.empty()) {
    const VertexId x = stack.back();
    stack.pop_back();
    for (DartId d : c.darts_at(x)) {
      const VertexId y = c.head(d);
      if (state[y] == 3) return true;
      if (state[y] == 0) {
        state[y] = 1;
        stack.push_back(y);
      }
    }
  }
  return false;
}

}  // namespace packd
