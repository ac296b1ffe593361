#pragma once

// Simple / irreducible / acylindrical predicates for subdivision rules,
// connecting paths, and the Jordan-face modification.

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "packd/error.hpp"
#include "packd/plane_complex.hpp"
#include "packd/subdivision.hpp"

namespace packd {

inline constexpr int kDefaultLevelBudget = 6;

enum class VerdictStatus { Holds, Fails, VerifiedUpToLevel };

inline std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Holds: return "holds";
    case VerdictStatus::Fails: return "fails";
    case VerdictStatus::VerifiedUpToLevel: return "verified_up_to_level";
  }
  return "unknown";
}

/// A boundary pair {p, q} (p < q) of a polygon type.
struct PairState {
  std::size_t type = 0;
  std::size_t p = 0, q = 0;
  friend auto operator<=>(const PairState&, const PairState&) = default;
};

enum class PairOutcome { Connected, Cylindrical, Unresolved };

struct PairCertificate {
  PairState pair;
  PairOutcome outcome = PairOutcome::Unresolved;
  int level = 0;                  // Connected: first level with connected arcs
  std::vector<VertexId> path;     // Connected: an interior connecting path, if one exists
  std::vector<PairState> period;  // Cylindrical: a cycle of separated carrier states
};

struct PredicateVerdict {
  std::string predicate;
  VerdictStatus status = VerdictStatus::Holds;
  int levels_checked = 0;
  // simple
  std::optional<std::size_t> polygon;
  std::optional<std::pair<VertexId, VertexId>> edge;  // witness multi-edge / loop ends
  // irreducible: carrier chain from a root pair to the state whose template has the chord
  std::vector<PairState> chain;
  // acylindrical
  std::vector<PairCertificate> pairs;
};

namespace detail {

inline bool cyclically_adjacent(std::size_t p, std::size_t q, std::size_t e) {
  return (p + 1) % e == q || (q + 1) % e == p;
}

inline std::vector<PairState> root_pairs(const SubdivisionRule& r, std::size_t t) {
  std::vector<PairState> out;
  const std::size_t e = r.polygons[t].sides;
  for (std::size_t p = 0; p < e; ++p) {
    for (std::size_t q = p + 1; q < e; ++q) {
      if (!cyclically_adjacent(p, q, e)) out.push_back({t, p, q});
    }
  }
  return out;
}

/// Frame positions of template-local vertex `v` in a child face under assignment `a`.
inline std::vector<std::size_t> frame_positions(const TemplateFace& tf, const Assignment& a,
                                                VertexId v) {
  std::vector<std::size_t> out;
  const std::size_t n = tf.cycle.size();
  for (std::size_t p = 0; p < n; ++p) {
    if (tf.cycle[a.corr.apply(p, n)] == v) out.push_back(p);
  }
  return out;
}

struct ChildCarrier {
  std::size_t face;
  std::size_t choice;
  PairState state;
  bool adjacent_in_child;
  bool repeated;  // the child walk visits v or w more than once
};

/// Children of state s: template faces (under every admissible assignment) carrying both b_p, b_q.
inline std::vector<ChildCarrier> carriers(const SubdivisionRule& r, const PairState& s) {
  std::vector<ChildCarrier> out;
  const Template& t = r.templates[s.type];
  for (std::size_t j = 0; j < t.faces.size(); ++j) {
    const TemplateFace& tf = t.faces[j];
    for (std::size_t c = 0; c < tf.choices.size(); ++c) {
      const auto pp = frame_positions(tf, tf.choices[c], static_cast<VertexId>(s.p));
      const auto qq = frame_positions(tf, tf.choices[c], static_cast<VertexId>(s.q));
      if (pp.empty() || qq.empty()) continue;
      const std::size_t e = tf.cycle.size();
      const bool repeated = pp.size() > 1 || qq.size() > 1;
      for (std::size_t a : pp) {
        for (std::size_t b : qq) {
          PairState child{tf.choices[c].type, std::min(a, b), std::max(a, b)};
          out.push_back({j, c, child, cyclically_adjacent(a, b, e), repeated});
        }
      }
    }
  }
  return out;
}

inline std::vector<VertexId> boundary_cycle(std::size_t e) {
  std::vector<VertexId> c(e);
  for (std::size_t i = 0; i < e; ++i) c[i] = static_cast<VertexId>(i);
  return c;
}

/// Component labels of `c` with vertices v, w removed.
inline std::vector<int> components_without(const PlaneComplex& c, VertexId v, VertexId w) {
  std::vector<int> comp(c.vertex_count(), -1);
  int next = 0;
  for (VertexId s = 0; s < c.vertex_count(); ++s) {
    if (s == v || s == w || comp[s] >= 0) continue;
    std::vector<VertexId> stack{s};
    comp[s] = next;
    while (!stack.empty()) {
      const VertexId x = stack.back();
      stack.pop_back();
      for (DartId d : c.darts_at(x)) {
        const VertexId y = c.head(d);
        if (y == v || y == w || comp[y] >= 0) continue;
        comp[y] = next;
        stack.push_back(y);
      }
    }
    ++next;
  }
  return comp;
}

}  // namespace detail

inline PredicateVerdict check_simple(const SubdivisionRule& r, int max_level = kDefaultLevelBudget) {
  PredicateVerdict v;
  v.predicate = "simple";
  for (std::size_t t = 0; t < r.polygons.size(); ++t) {
    PlaneComplex c = base_polygon(r, t);
    for (int n = 1; n <= max_level; ++n) {
      c = subdivide_once(c, r);
      if (const auto w = simplicity_witness(c)) {
        v.status = VerdictStatus::Fails;
        v.levels_checked = n;
        v.polygon = t;
        v.edge = *w;
        return v;
      }
    }
  }
  v.status = VerdictStatus::VerifiedUpToLevel;
  v.levels_checked = max_level;
  return v;
}

/// Exact: a chord between b_p and b_q can only be created inside a face carrying both.
inline PredicateVerdict check_irreducible(const SubdivisionRule& r) {
  PredicateVerdict v;
  v.predicate = "irreducible";
  std::map<PairState, std::optional<PairState>> parent;
  std::deque<PairState> queue;
  for (std::size_t t = 0; t < r.polygons.size(); ++t) {
    for (const auto& s : detail::root_pairs(r, t)) {
      if (parent.emplace(s, std::nullopt).second) queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const PairState s = queue.front();
    queue.pop_front();
    if (r.templates[s.type].complex.adjacent(static_cast<VertexId>(s.p),
                                            static_cast<VertexId>(s.q))) {
      v.status = VerdictStatus::Fails;
      for (std::optional<PairState> x = s; x; x = parent.at(*x)) v.chain.push_back(*x);
      std::reverse(v.chain.begin(), v.chain.end());
      v.levels_checked = static_cast<int>(v.chain.size());
      v.polygon = v.chain.front().type;
      return v;
    }
    for (const auto& ch : detail::carriers(r, s)) {
      if (ch.adjacent_in_child || ch.state.p == ch.state.q) continue;
      if (parent.emplace(ch.state, s).second) queue.push_back(ch.state);
    }
  }
  v.status = VerdictStatus::Holds;
  return v;
}

namespace detail {

/// Greatest set of pair states whose arcs stay separated forever: each member's
/// template keeps the arcs apart, and every child carrying both points with arcs
/// in distinct components is again a member.
inline std::set<PairState> separated_closure(const SubdivisionRule& r) {
  std::set<PairState> all;
  for (std::size_t t = 0; t < r.polygons.size(); ++t) {
    for (const auto& s : root_pairs(r, t)) all.insert(s);
  }
  // Close under children so the candidate set includes every reachable state.
  std::vector<PairState> work(all.begin(), all.end());
  while (!work.empty()) {
    const PairState s = work.back();
    work.pop_back();
    for (const auto& ch : carriers(r, s)) {
      if (!ch.adjacent_in_child && ch.state.p != ch.state.q && all.insert(ch.state).second) {
        work.push_back(ch.state);
      }
    }
  }
  std::set<PairState> member;
  for (const auto& s : all) {
    const Template& t = r.templates[s.type];
    if (!arcs_connected_without(t.complex, boundary_cycle(t.sides), static_cast<VertexId>(s.p),
                                static_cast<VertexId>(s.q))) {
      member.insert(s);
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (auto it = member.begin(); it != member.end();) {
      const PairState s = *it;
      const Template& t = r.templates[s.type];
      const auto comp = components_without(t.complex, static_cast<VertexId>(s.p),
                                           static_cast<VertexId>(s.q));
      bool keep = true;
      for (const auto& ch : carriers(r, s)) {
        if (ch.repeated) {
          keep = false;
          break;
        }
        if (ch.adjacent_in_child) continue;
        const TemplateFace& tf = t.faces[ch.face];
        const auto [arc_a, arc_b] =
            boundary_arcs(tf.cycle, static_cast<VertexId>(s.p), static_cast<VertexId>(s.q));
        bool split = false;
        for (VertexId x : arc_a) {
          for (VertexId y : arc_b) split = split || comp[x] != comp[y];
        }
        if (split && !member.count(ch.state)) {
          keep = false;
          break;
        }
      }
      if (keep) {
        ++it;
      } else {
        it = member.erase(it);
        changed = true;
      }
    }
  }
  return member;
}

/// A cycle of member states reachable from s through separated carriers.
inline std::vector<PairState> find_period(const SubdivisionRule& r, const std::set<PairState>& member,
                                          const PairState& s) {
  std::map<PairState, std::optional<PairState>> parent;
  std::deque<PairState> queue{s};
  parent.emplace(s, std::nullopt);
  while (!queue.empty()) {
    const PairState x = queue.front();
    queue.pop_front();
    for (const auto& ch : carriers(r, x)) {
      if (!member.count(ch.state)) continue;
      // Closing a cycle back to s, or to any state on the current chain.
      std::vector<PairState> chain;
      for (std::optional<PairState> y = x; y; y = parent.at(*y)) chain.push_back(*y);
      std::reverse(chain.begin(), chain.end());
      const auto hit = std::find(chain.begin(), chain.end(), ch.state);
      if (hit != chain.end()) return std::vector<PairState>(hit, chain.end());
      if (parent.emplace(ch.state, x).second) queue.push_back(ch.state);
    }
  }
  return {};
}

/// BFS from v to w through vertices accepted by `inside` only, smallest ids first.
template <class Inside>
inline std::vector<VertexId> interior_path(const PlaneComplex& c, VertexId v, VertexId w,
                                           Inside inside) {
  std::vector<std::optional<VertexId>> parent(c.vertex_count());
  std::vector<bool> seen(c.vertex_count(), false);
  std::deque<VertexId> queue{v};
  seen[v] = true;
  while (!queue.empty()) {
    const VertexId x = queue.front();
    queue.pop_front();
    for (VertexId y : c.neighbors(x)) {
      if (seen[y]) continue;
      if (y == w) {
        std::vector<VertexId> path{w};
        for (std::optional<VertexId> z = x; z; z = parent[*z]) path.push_back(*z);
        std::reverse(path.begin(), path.end());
        return path;
      }
      if (!inside(y)) continue;
      seen[y] = true;
      parent[y] = x;
      queue.push_back(y);
    }
  }
  return {};
}

inline std::vector<VertexId> interior_path(const PlaneComplex& c, VertexId v, VertexId w) {
  return interior_path(c, v, w, [&](VertexId y) { return c.vertex(y).level > 0; });
}

}  // namespace detail

/// Acylindricity of every non-adjacent boundary pair of every polygon type.
inline PredicateVerdict decide_acylindrical(const SubdivisionRule& r,
                                            int max_level = kDefaultLevelBudget) {
  if (check_simple(r, max_level).status == VerdictStatus::Fails) {
    throw Error(ErrorCode::PrerequisiteFailed, "rule is not simple");
  }
  if (check_irreducible(r).status == VerdictStatus::Fails) {
    throw Error(ErrorCode::PrerequisiteFailed, "rule is not irreducible");
  }
  PredicateVerdict v;
  v.predicate = "acylindrical";
  v.levels_checked = max_level;
  std::optional<std::set<PairState>> member;
  for (std::size_t t = 0; t < r.polygons.size(); ++t) {
    const auto roots = detail::root_pairs(r, t);
    if (roots.empty()) continue;
    const auto boundary = detail::boundary_cycle(r.polygons[t].sides);
    std::vector<PairCertificate> certs;
    for (const auto& s : roots) certs.push_back({s, PairOutcome::Unresolved, 0, {}, {}});
    PlaneComplex c = base_polygon(r, t);
    for (int n = 1; n <= max_level; ++n) {
      bool open = false;
      for (const auto& cert : certs) open = open || cert.outcome == PairOutcome::Unresolved;
      if (!open) break;
      c = subdivide_once(c, r);
      for (auto& cert : certs) {
        if (cert.outcome != PairOutcome::Unresolved) continue;
        const VertexId a = static_cast<VertexId>(cert.pair.p), b = static_cast<VertexId>(cert.pair.q);
        if (arcs_connected_without(c, boundary, a, b)) {
          cert.outcome = PairOutcome::Connected;
          cert.level = n;
          cert.path = detail::interior_path(c, a, b);
        }
      }
    }
    for (auto& cert : certs) {
      if (cert.outcome != PairOutcome::Unresolved) continue;
      if (!member) member = detail::separated_closure(r);
      if (member->count(cert.pair)) {
        auto period = detail::find_period(r, *member, cert.pair);
        if (!period.empty()) {
          cert.outcome = PairOutcome::Cylindrical;
          cert.period = std::move(period);
        }
      }
    }
    v.pairs.insert(v.pairs.end(), certs.begin(), certs.end());
  }
  bool any_cyl = false, any_open = false;
  for (const auto& cert : v.pairs) {
    any_cyl = any_cyl || cert.outcome == PairOutcome::Cylindrical;
    any_open = any_open || cert.outcome == PairOutcome::Unresolved;
  }
  v.status = any_cyl    ? VerdictStatus::Fails
             : any_open ? VerdictStatus::VerifiedUpToLevel
                        : VerdictStatus::Holds;
  return v;
}

/// Simple path from b_v to b_w through interior vertices, at the first level where one exists.
inline std::vector<VertexId> connecting_path(const SubdivisionRule& r, std::size_t polygon,
                                             VertexId v, VertexId w,
                                             int max_level = kDefaultLevelBudget) {
  const std::size_t e = r.polygons.at(polygon).sides;
  if (v >= e || w >= e || v == w || detail::cyclically_adjacent(v, w, e)) {
    throw Error(ErrorCode::NotCertified, "pair is not a non-adjacent boundary pair");
  }
  PlaneComplex c = base_polygon(r, polygon);
  const auto boundary = detail::boundary_cycle(e);
  for (int n = 1; n <= max_level; ++n) {
    c = subdivide_once(c, r);
    if (!arcs_connected_without(c, boundary, v, w)) continue;
    auto path = detail::interior_path(c, v, w);
    if (!path.empty()) return path;
  }
  throw Error(ErrorCode::NotCertified, "pair (" + std::to_string(v) + "," + std::to_string(w) +
                                           ") is not certified within " +
                                           std::to_string(max_level) + " levels");
}

inline bool template_is_jordan(const Template& t) {
  for (const auto& f : t.faces) {
    auto c = f.cycle;
    std::sort(c.begin(), c.end());
    if (std::adjacent_find(c.begin(), c.end()) != c.end()) return false;
  }
  return true;
}

namespace detail {

struct Region {
  std::vector<VertexId> walk;            // template-local ids of the cell type, ccw
  std::vector<std::size_t> cells;        // template faces inside
};

/// Regions cut out of a template by its boundary plus the `kept` interior edges.
inline std::vector<Region> template_regions(const Template& t, const std::vector<bool>& kept) {
  const PlaneComplex& c = t.complex;
  const FaceId ext = static_cast<FaceId>(t.faces.size());
  const auto orbits = c.subgraph_face_darts(kept);
  std::vector<int> orbit_of_dart(c.dart_count(), -1);
  for (std::size_t o = 0; o < orbits.size(); ++o) {
    for (DartId d : orbits[o]) orbit_of_dart[d] = static_cast<int>(o);
  }
  // Flood cells across non-kept edges.
  std::vector<int> region_of(t.faces.size(), -1);
  for (std::size_t f = 0; f < t.faces.size(); ++f) {
    if (region_of[f] >= 0) continue;
    std::vector<std::size_t> stack{f}, members{f};
    region_of[f] = -2;
    int orbit = -1;
    while (!stack.empty()) {
      const std::size_t g = stack.back();
      stack.pop_back();
      for (DartId d : c.face(static_cast<FaceId>(g)).darts) {
        if (kept[c.dart(d).edge]) {
          orbit = orbit_of_dart[d];
          continue;
        }
        const FaceId h = c.dart(c.dart(d).twin).face;
        if (h != ext && region_of[h] == -1) {
          region_of[h] = -2;
          stack.push_back(h);
          members.push_back(h);
        }
      }
    }
    for (std::size_t g : members) region_of[g] = orbit;
  }
  std::vector<Region> out;
  for (std::size_t o = 0; o < orbits.size(); ++o) {
    if (c.dart(orbits[o].front()).face == ext) continue;
    Region reg;
    const auto start = std::min_element(orbits[o].begin(), orbits[o].end());
    std::vector<DartId> orbit(start, orbits[o].end());
    orbit.insert(orbit.end(), orbits[o].begin(), start);
    for (DartId d : orbit) reg.walk.push_back(c.dart(d).origin);
    for (std::size_t f = 0; f < t.faces.size(); ++f) {
      if (region_of[f] == static_cast<int>(o)) reg.cells.push_back(f);
    }
    out.push_back(std::move(reg));
  }
  return out;
}

inline VertexRef ref_of_local(const TemplateDesc& desc, std::size_t sides, VertexId local) {
  if (local < sides) return {true, static_cast<int>(local)};
  return {false, desc.interior.at(local - sides)};
}

}  // namespace detail

/// Splits every non-Jordan cell of every template by connecting paths taken from
/// one subdivision of the cell's own type, registering the pieces as new types.
inline SubdivisionRule jordanize(const SubdivisionRule& r, int max_level = kDefaultLevelBudget) {
  if (check_simple(r, max_level).status == VerdictStatus::Fails ||
      check_irreducible(r).status == VerdictStatus::Fails) {
    throw Error(ErrorCode::PrerequisiteFailed, "rule is not simple and irreducible");
  }
  if (decide_acylindrical(r, max_level).status == VerdictStatus::Fails) {
    throw Error(ErrorCode::PrerequisiteFailed, "rule is cylindrical");
  }
  SubdivisionRule cur = r;
  for (int round = 0; round < max_level; ++round) {
    RuleDescription d = cur.source;
    bool changed = false;
    for (std::size_t t = 0; t < cur.polygons.size() && !changed; ++t) {
      const Template& tt = cur.templates[t];
      const std::string& tname = cur.polygons[t].name;
      TemplateDesc& td = d.subdivisions.at(tname);
      for (std::size_t j = 0; j < tt.faces.size(); ++j) {
        const TemplateFace& tf = tt.faces[j];
        auto sorted = tf.cycle;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) continue;

        const Assignment& a = tf.choices.front();
        if (tf.choices.size() > 1 || a.corr.reflect) {
          throw Error(ErrorCode::Unresolvable, tname + ": pinched cell " + std::to_string(j) +
                                                   " has alternatives or a reflected frame");
        }
        const Template& th = cur.templates[a.type];
        const std::size_t eh = th.sides;
        // Key identifying where a cell-template vertex lands in the parent template.
        auto key = [&](VertexId x) -> std::size_t {
          if (x < eh) return tf.cycle[a.corr.apply(x, eh)];
          return 1'000'000 + x;
        };
        auto bad_count = [&](const std::vector<detail::Region>& regs) {
          int bad = 0;
          for (const auto& reg : regs) {
            std::vector<std::size_t> k;
            for (VertexId x : reg.walk) k.push_back(key(x));
            std::sort(k.begin(), k.end());
            if (std::adjacent_find(k.begin(), k.end()) != k.end()) ++bad;
          }
          return bad;
        };
        std::vector<bool> kept(th.complex.edge_count(), false);
        for (EdgeId e = 0; e < kept.size(); ++e) kept[e] = th.boundary_position[e].has_value();
        auto regions = detail::template_regions(th, kept);
        int bad = bad_count(regions);
        for (const auto& pair : detail::root_pairs(cur, a.type)) {
          if (bad == 0) break;
          const VertexId p = static_cast<VertexId>(pair.p), q = static_cast<VertexId>(pair.q);
          if (key(p) == key(q)) continue;
          const auto path = detail::interior_path(th.complex, p, q,
                                                  [&](VertexId y) { return y >= eh; });
          if (path.empty()) continue;
          auto trial = kept;
          for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            for (DartId dd : th.complex.darts_at(path[i])) {
              if (th.complex.head(dd) == path[i + 1]) trial[th.complex.dart(dd).edge] = true;
            }
          }
          auto trial_regions = detail::template_regions(th, trial);
          const int trial_bad = bad_count(trial_regions);
          if (trial_bad < bad) {
            kept = std::move(trial);
            regions = std::move(trial_regions);
            bad = trial_bad;
          }
        }
        if (bad > 0) {
          throw Error(ErrorCode::Unresolvable,
                      tname + ": no connecting paths make cell " + std::to_string(j) + " Jordan");
        }

        // Interior vertices of the cell type that become parent-template vertices.
        if (td.interior_origin.empty()) {
          for (std::size_t s2 = 0; s2 < td.interior.size(); ++s2) {
            td.interior_origin.push_back({{}, static_cast<int>(s2)});
          }
        }
        int next_id = 0;
        for (int id : td.interior) next_id = std::max(next_id, id + 1);
        std::map<VertexId, int> lifted;
        auto parent_ref = [&](VertexId x) -> VertexRef {
          if (x < eh) return detail::ref_of_local(td, tt.sides, tf.cycle[a.corr.apply(x, eh)]);
          auto it = lifted.find(x);
          if (it == lifted.end()) {
            it = lifted.emplace(x, next_id++).first;
            td.interior.push_back(it->second);
            Address origin = th.interior_origin[x - eh];
            origin.path.insert(origin.path.begin(), tf.origin.begin(), tf.origin.end());
            td.interior_origin.push_back(origin);
          }
          return {false, it->second};
        };

        std::vector<TemplateFaceDesc> pieces;
        for (std::size_t k = 0; k < regions.size(); ++k) {
          const auto& reg = regions[k];
          TemplateFaceDesc piece;
          if (reg.cells.size() == 1) {
            const TemplateFace& cell = th.faces[reg.cells.front()];
            const auto& src = cur.source.subdivisions.at(cur.polygons[a.type].name)
                                  .faces[reg.cells.front()];
            for (VertexId x : cell.cycle) piece.cycle.push_back(parent_ref(x));
            piece.primary = src.primary;
            piece.alternatives = src.alternatives;
            piece.origin = tf.origin;
            piece.origin.insert(piece.origin.end(), cell.origin.begin(), cell.origin.end());
            pieces.push_back(std::move(piece));
            continue;
          }
          std::string qname = cur.polygons[a.type].name + "_part" + std::to_string(k);
          while (std::any_of(d.polygons.begin(), d.polygons.end(),
                             [&](const PolygonDesc& pd) { return pd.name == qname; })) {
            qname += "'";
          }
          d.polygons.push_back({qname, static_cast<int>(reg.walk.size())});
          TemplateDesc qd;
          std::map<VertexId, VertexRef> local;
          for (std::size_t i = 0; i < reg.walk.size(); ++i) {
            local[reg.walk[i]] = {true, static_cast<int>(i)};
          }
          const auto& hsrc = cur.source.subdivisions.at(cur.polygons[a.type].name);
          for (std::size_t cell : reg.cells) {
            for (VertexId x : th.faces[cell].cycle) {
              if (local.count(x)) continue;
              const int id = static_cast<int>(qd.interior.size());
              local[x] = {false, id};
              qd.interior.push_back(id);
              qd.interior_origin.push_back(th.interior_origin[x - eh]);
            }
          }
          for (std::size_t cell : reg.cells) {
            TemplateFaceDesc f;
            for (VertexId x : th.faces[cell].cycle) f.cycle.push_back(local.at(x));
            f.primary = hsrc.faces[cell].primary;
            f.alternatives = hsrc.faces[cell].alternatives;
            f.origin = th.faces[cell].origin;
            qd.faces.push_back(std::move(f));
          }
          d.subdivisions[qname] = std::move(qd);
          for (VertexId x : reg.walk) piece.cycle.push_back(parent_ref(x));
          piece.primary = {qname, {}};
          piece.origin = tf.origin;
          pieces.push_back(std::move(piece));
        }
        td.faces.erase(td.faces.begin() + static_cast<long>(j));
        td.faces.insert(td.faces.begin() + static_cast<long>(j), pieces.begin(), pieces.end());
        changed = true;
        break;
      }
    }
    if (!changed) return cur;
    cur = validate_rule(d);
  }
  for (const auto& t : cur.templates) {
    if (!template_is_jordan(t)) {
      throw Error(ErrorCode::Unresolvable, "Jordan modification did not terminate");
    }
  }
  return cur;
}

}  // namespace packd
