#pragma once

// Distances between marked packings, convergence of sub-packings across
// levels, renormalization along face words, and multipliers of periodic words.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "packd/combinatorics.hpp"
#include "packd/packer.hpp"
#include "packd/subdivision.hpp"

namespace packd {

/// Distances below this are treated as exact zeros when fitting.
inline constexpr double kFitFloor = 1e-11;

/// Runs fn(i) for i in [0, count) on up to `jobs` threads; results keep index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, unsigned jobs, Fn fn) {
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Max spherical Hausdorff distance between corresponding circles after both
/// packings are normalized on the same anchors.
inline double sup_distance(const CirclePacking& p, const CirclePacking& q,
                           const std::array<VertexPair, 3>& anchors) {
  const auto vp = p.marked_vertices(), vq = q.marked_vertices();
  if (vp != vq) throw Error(ErrorCode::MarkingMismatch, "packings mark different vertex sets");
  const CirclePacking np = mobius_normalize(p, anchors), nq = mobius_normalize(q, anchors);
  double worst = 0.0;
  for (VertexId v : vp) worst = std::max(worst, spherical_hausdorff(np.circles[v], nq.circles[v]));
  return worst;
}

inline double sup_distance(const CirclePacking& p, const CirclePacking& q) {
  return sup_distance(p, q, p.anchors);
}

/// Least-squares fit of log d against the index; d below the floor is dropped.
struct RateFit {
  std::optional<double> delta;
  double residual = 0.0;
};

inline RateFit fit_rate(const std::vector<int>& x, const std::vector<double>& d) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] >= kFitFloor) {
      xs.push_back(x[i]);
      ys.push_back(std::log(d[i]));
    }
  }
  RateFit f;
  if (xs.size() < 4) return f;
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i] / n, my += ys[i] / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (my + slope * (xs[i] - mx));
    ss += r * r;
  }
  f.delta = std::exp(slope);
  f.residual = std::sqrt(ss / n);
  return f;
}

struct ConvergenceReport {
  std::string polygon;
  int j = 0;
  std::vector<int> n;
  std::vector<double> d;
  std::vector<double> runtime_ms;
  std::optional<double> delta;
  double fit_residual = 0.0;
};

/// Polygon type name, or "sphere" for the rule's sphere shell.
inline PlaneComplex build_level(const SubdivisionRule& r, const std::string& polygon, int n) {
  if (polygon == "sphere") return iterate_sphere(r, n);
  return iterate(r, r.type_index(polygon), n);
}

/// Raises PrerequisiteFailed unless the rule is certified simple, irreducible,
/// acylindrical, and has only Jordan templates.
inline void require_convergence_prerequisites(const SubdivisionRule& r, int levels) {
  const auto simple = check_simple(r, levels);
  if (simple.status == VerdictStatus::Fails) {
    throw Error(ErrorCode::PrerequisiteFailed, "rule is not simple");
  }
  const auto acyl = decide_acylindrical(r, std::min(levels, kDefaultLevelBudget));
  if (acyl.status == VerdictStatus::Fails) {
    throw Error(ErrorCode::PrerequisiteFailed, "rule is cylindrical");
  }
  for (const auto& t : r.templates) {
    if (!template_is_jordan(t)) {
      throw Error(ErrorCode::PrerequisiteFailed, "rule has non-Jordan cells; jordanize first");
    }
  }
}

struct ConvergeOptions {
  PackOptions pack;
  unsigned jobs = 1;
  bool check_prerequisites = true;
};

/// d_n between the level-j sub-packings of levels n+j and n+1+j.
inline ConvergenceReport converge_experiment(const SubdivisionRule& r, const std::string& polygon,
                                             int j, int n_min, int n_max,
                                             const ConvergeOptions& opt = {}) {
  if (j < 0 || n_min < 0 || n_max < n_min) {
    throw Error(ErrorCode::LevelOutOfRange, "invalid level range");
  }
  if (opt.check_prerequisites) require_convergence_prerequisites(r, n_max + j + 1);
  struct Level {
    CirclePacking sub;
    double ms;
  };
  const std::size_t count = static_cast<std::size_t>(n_max - n_min + 2);
  const auto levels = parallel_map<Level>(count, opt.jobs, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    const int level = n_min + static_cast<int>(i) + j;
    CirclePacking p = extract_subpacking(pack(build_level(r, polygon, level), opt.pack), j);
    const auto t1 = std::chrono::steady_clock::now();
    return Level{std::move(p), std::chrono::duration<double, std::milli>(t1 - t0).count()};
  });
  ConvergenceReport rep;
  rep.polygon = polygon;
  rep.j = j;
  for (std::size_t i = 0; i + 1 < count; ++i) {
    rep.n.push_back(n_min + static_cast<int>(i));
    rep.d.push_back(sup_distance(levels[i].sub, levels[i + 1].sub));
    rep.runtime_ms.push_back(levels[i + 1].ms);
  }
  const RateFit f = fit_rate(rep.n, rep.d);
  rep.delta = f.delta;
  rep.fit_residual = f.residual;
  return rep;
}

// ---- renormalization ----

/// Resolves word tokens: integers, face names of the current type's template,
/// or entries of the rule's named words. Returns template face indices.
inline std::vector<std::size_t> resolve_word(const SubdivisionRule& r, std::size_t type,
                                             const std::vector<std::string>& tokens) {
  std::vector<std::size_t> out;
  std::size_t current = type;
  auto push = [&](std::size_t idx) {
    const Template& t = r.templates[current];
    if (idx >= t.faces.size()) {
      throw Error(ErrorCode::InvalidChoice, "face " + std::to_string(idx) + " is not a cell of type '" +
                                                r.polygons[current].name + "'");
    }
    out.push_back(idx);
    current = t.faces[idx].choices[0].type;
  };
  for (const auto& tok : tokens) {
    if (!tok.empty() && std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      push(std::stoul(tok));
    } else if (const auto f = r.templates[current].face_by_name(tok)) {
      push(*f);
    } else if (const auto it = r.source.words.find(tok); it != r.source.words.end()) {
      for (int idx : it->second) {
        if (idx < 0) throw Error(ErrorCode::InvalidChoice, "negative face index in word '" + tok + "'");
        push(static_cast<std::size_t>(idx));
      }
    } else {
      throw Error(ErrorCode::InvalidChoice, "unknown face '" + tok + "'");
    }
  }
  return out;
}

namespace detail {

/// Face of level |word| selected by the word, found in the level-|word| complex.
inline Face selected_face(const SubdivisionRule& r, std::size_t type,
                          const std::vector<std::size_t>& word) {
  std::size_t current = type;
  for (std::size_t idx : word) {
    const Template& t = r.templates[current];
    if (idx >= t.faces.size()) {
      throw Error(ErrorCode::InvalidChoice, "face " + std::to_string(idx) +
                                                " is not a cell of type '" + r.polygons[current].name + "'");
    }
    current = t.faces[idx].choices[0].type;
  }
  const PlaneComplex c = iterate(r, type, static_cast<int>(word.size()));
  const std::vector<int> lineage(word.begin(), word.end());
  for (const auto& f : c.faces()) {
    if (f.info.type && f.info.lineage == lineage) return f;
  }
  throw Error(ErrorCode::InvalidChoice, "word selects no face");
}

/// Key identifying a vertex relative to the face it was created under.
using BirthKey = std::pair<int, Address>;

}  // namespace detail

/// The sub-packing inside the face selected by `word`, re-marked as a packing
/// of that face's own type (level n - |word|) and normalized on its anchors.
inline CirclePacking renormalize(const SubdivisionRule& r, std::size_t type, const CirclePacking& p,
                                 const std::vector<std::size_t>& word) {
  const auto& src = *p.complex;
  int n = 0;
  for (VertexId v = 0; v < src.vertex_count(); ++v) {
    if (!src.vertex(v).hub) n = std::max(n, src.vertex(v).level);
  }
  const int k = static_cast<int>(word.size());
  if (k >= n && k > 0) {
    throw Error(ErrorCode::WordTooLong, "word length " + std::to_string(k) +
                                            " needs a packing deeper than level " + std::to_string(n));
  }
  const Face f = detail::selected_face(r, type, word);
  const std::size_t sub_type = *f.info.type;
  const std::vector<int> prefix(word.begin(), word.end());

  std::map<detail::BirthKey, VertexId> lookup;
  for (VertexId v = 0; v < src.vertex_count(); ++v) {
    const auto& info = src.vertex(v);
    if (info.hub || info.birth.path.size() < prefix.size()) continue;
    if (!std::equal(prefix.begin(), prefix.end(), info.birth.path.begin())) continue;
    Address rel{{info.birth.path.begin() + k, info.birth.path.end()}, info.birth.index};
    lookup[{info.level - k, rel}] = v;
  }
  const PlaneComplex target = iterate(r, sub_type, n - k);
  CirclePacking q;
  q.complex = std::make_shared<const PlaneComplex>(augment(target).complex);
  q.circles.assign(q.complex->vertex_count(), Circle{});
  q.marked.assign(q.complex->vertex_count(), false);
  q.anchors = default_anchors(target);
  q.residual = p.residual;
  q.iterations = p.iterations;
  for (VertexId v = 0; v < target.vertex_count(); ++v) {
    const auto& info = target.vertex(v);
    VertexId from;
    if (info.level == 0) {
      from = frame_vertex(f, static_cast<std::size_t>(info.birth.index));
    } else {
      const auto it = lookup.find({info.level, info.birth});
      if (it == lookup.end()) throw Error(ErrorCode::MarkingMismatch, "sub-packing misses a vertex");
      from = it->second;
    }
    q.circles[v] = f.info.mirrored ? p.circles[from].conjugated() : p.circles[from];
    q.marked[v] = true;
  }
  return mobius_normalize(q);
}

/// Two differently seeded packings of level n, renormalized k = 1..m times
/// along the periodic word; d_k is their sup distance.
inline ConvergenceReport renorm_contraction(const SubdivisionRule& r, std::size_t type,
                                            const std::vector<std::size_t>& period, int m, int n,
                                            const ConvergeOptions& opt = {},
                                            ExternalSeed seed_a = ExternalSeed::Hub,
                                            ExternalSeed seed_b = ExternalSeed::Bar) {
  if (period.empty()) throw Error(ErrorCode::InvalidChoice, "empty word");
  if (m >= n) {
    throw Error(ErrorCode::WordTooLong, "depth " + std::to_string(m) + " must be below level " +
                                            std::to_string(n));
  }
  if (opt.check_prerequisites) require_convergence_prerequisites(r, n + 1);
  const PlaneComplex c = iterate(r, type, n);
  PackOptions oa = opt.pack, ob = opt.pack;
  oa.seed = seed_a;
  ob.seed = seed_b;
  const auto packs = parallel_map<CirclePacking>(2, opt.jobs, [&](std::size_t i) {
    return pack(c, i == 0 ? oa : ob);
  });
  ConvergenceReport rep;
  rep.polygon = r.polygons[type].name;
  const auto depths = parallel_map<std::pair<double, double>>(
      static_cast<std::size_t>(m), opt.jobs, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<std::size_t> word;
        for (std::size_t s = 0; s <= i; ++s) word.push_back(period[s % period.size()]);
        const double d = sup_distance(renormalize(r, type, packs[0], word),
                                      renormalize(r, type, packs[1], word));
        const auto t1 = std::chrono::steady_clock::now();
        return std::pair{d, std::chrono::duration<double, std::milli>(t1 - t0).count()};
      });
  for (int k = 1; k <= m; ++k) {
    rep.n.push_back(k);
    rep.d.push_back(depths[static_cast<std::size_t>(k - 1)].first);
    rep.runtime_ms.push_back(depths[static_cast<std::size_t>(k - 1)].second);
  }
  const RateFit f = fit_rate(rep.n, rep.d);
  rep.delta = f.delta;
  rep.fit_residual = f.residual;
  return rep;
}

// ---- periodic points ----

struct MultiplierReport {
  MobiusMap map;
  MobiusClassification classification;
  Complex mu_next{};  // multiplier at level n + 1
};

namespace detail {

inline MobiusClassification multiplier_at_level(const SubdivisionRule& r, std::size_t type,
                                                const Face& f, int n, const PackOptions& opt, MobiusMap* out) {
  const PlaneComplex c = iterate(r, type, n);
  const CirclePacking p = pack(c, opt);
  std::array<SpherePoint, 3> a, a_image;
  for (int i = 0; i < 3; ++i) {
    const auto [u, v] = p.anchors[i];
    a[i] = anchor_point(p, {u, v});
    a_image[i] = anchor_point(p, {frame_vertex(f, u), frame_vertex(f, v)});
  }
  const MobiusMap phi = mobius_from_three_points(a_image, a);
  if (out) *out = phi;
  return classify_and_multiplier(phi);
}

}  // namespace detail

/// Moebius map carrying the period face's anchor tangencies back to the
/// polygon's own, with its class and multiplier; checked stable at level n+1.
inline MultiplierReport periodic_multiplier(const SubdivisionRule& r, std::size_t type,
                                            const std::vector<std::size_t>& word, int n,
                                            double stability_tol = 1e-4,
                                            const PackOptions& opt = {}) {
  if (word.empty()) throw Error(ErrorCode::NotPeriodic, "empty word");
  if (static_cast<int>(word.size()) >= n) {
    throw Error(ErrorCode::WordTooLong, "word must be shorter than the packing level");
  }
  const Face f = detail::selected_face(r, type, word);
  if (*f.info.type != type) {
    throw Error(ErrorCode::NotPeriodic, "word ends on type '" + r.polygons[*f.info.type].name +
                                            "', not '" + r.polygons[type].name + "'");
  }
  if (f.info.mirrored) {
    throw Error(ErrorCode::NotPeriodic, "period identification reverses orientation");
  }
  MultiplierReport rep;
  rep.classification = detail::multiplier_at_level(r, type, f, n, opt, &rep.map);
  const auto next = detail::multiplier_at_level(r, type, f, n + 1, opt, nullptr);
  rep.mu_next = next.multiplier;
  const Complex mu = rep.classification.multiplier;
  if (std::abs(next.multiplier - mu) >= stability_tol * std::abs(mu)) {
    throw Error(ErrorCode::Unstable, "multiplier moved by " + std::to_string(std::abs(next.multiplier - mu)) +
                                         " between levels " + std::to_string(n) + " and " +
                                         std::to_string(n + 1));
  }
  return rep;
}

// ---- interstice arcs ----

/// Fraction of circle v's circumference bounding the interstice of a ccw face
/// between its tangencies with `prev` and `next`.
inline double interstice_arc_fraction(const Circle& prev, const Circle& v, const Circle& next) {
  const SpherePoint tp = tangency_point(prev, v, 1e-6), tn = tangency_point(v, next, 1e-6);
  const Complex c = v.center();
  double a = v.k > 0 ? std::arg((tp.z - c) / (tn.z - c)) : std::arg((tn.z - c) / (tp.z - c));
  if (a < 0) a += 2.0 * std::numbers::pi;
  return a / (2.0 * std::numbers::pi);
}

/// Minimum interstice arc fraction over the boundary circles of a face walk.
inline double arc_lower_bound(const CirclePacking& p, const std::vector<VertexId>& walk) {
  double best = 1.0;
  const std::size_t e = walk.size();
  for (std::size_t i = 0; i < e; ++i) {
    best = std::min(best, interstice_arc_fraction(p.circles[walk[(i + e - 1) % e]], p.circles[walk[i]],
                                                  p.circles[walk[(i + 1) % e]]));
  }
  return best;
}

/// Minimum of arc_lower_bound over all internal faces of level k.
inline double arc_lower_bound(const SubdivisionRule& r, std::size_t type, const CirclePacking& p, int k) {
  const PlaneComplex c = iterate(r, type, k);
  double best = 1.0;
  for (FaceId f = 0; f < c.face_count(); ++f) {
    if (c.external_face() == f) continue;
    best = std::min(best, arc_lower_bound(p, c.face(f).walk));
  }
  return best;
}

/// Minimum arc fraction over the faces of `c` whose walk carries both v and w,
/// the faces squeezed between a separated boundary pair.
inline double arc_lower_bound_between(const CirclePacking& p, const PlaneComplex& c, VertexId v,
                                      VertexId w) {
  double best = 1.0;
  for (FaceId f = 0; f < c.face_count(); ++f) {
    if (c.external_face() == f) continue;
    const auto& walk = c.face(f).walk;
    if (std::count(walk.begin(), walk.end(), v) && std::count(walk.begin(), walk.end(), w)) {
      best = std::min(best, arc_lower_bound(p, walk));
    }
  }
  return best;
}

}  // namespace packd
