#pragma once

// Marked circle packings of finite complexes. Every non-triangular face gets a
// hub vertex; the resulting sphere triangulation is packed by solving for the
// maximal packing of the disk left after removing one distinguished vertex,
// then laid out with that vertex as the exterior of the unit circle.

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "packd/error.hpp"
#include "packd/geometry.hpp"
#include "packd/plane_complex.hpp"

namespace packd {

using VertexPair = std::pair<VertexId, VertexId>;

/// How the never-subdivided external face is triangulated.
enum class ExternalSeed { Hub, Bar };

struct Augmentation {
  PlaneComplex complex;                 // sphere triangulation, hubs flagged
  std::optional<VertexId> external_hub;
};

inline Augmentation augment(const PlaneComplex& c, ExternalSeed seed = ExternalSeed::Hub) {
  std::vector<VertexInfo> vertices = c.vertices();
  std::vector<FaceSpec> out;
  std::optional<VertexId> external_hub;
  std::int64_t next_label = static_cast<std::int64_t>(c.edge_count());
  auto add_hub = [&](const Face& f) {
    VertexInfo h;
    h.level = f.info.level;
    h.hub = true;
    h.birth = {f.info.lineage, -1};
    h.address = {f.info.anchor, -1};
    vertices.push_back(std::move(h));
    return static_cast<VertexId>(vertices.size() - 1);
  };
  for (FaceId fi = 0; fi < c.face_count(); ++fi) {
    const Face& f = c.face(fi);
    const std::size_t n = f.walk.size();
    if (!face_is_jordan(c, fi)) {
      throw Error(ErrorCode::NonJordanFace, "face " + std::to_string(fi) + " is not a Jordan domain");
    }
    std::vector<std::int64_t> side(n);
    for (std::size_t i = 0; i < n; ++i) side[i] = c.dart(f.darts[i]).edge;
    if (n == 3) {
      out.push_back(FaceSpec{f.walk, side, f.info});
      continue;
    }
    const bool is_external = c.external_face() && *c.external_face() == fi;
    auto tri = [&](VertexId a, VertexId b, VertexId h, std::int64_t ab, std::int64_t bh,
                   std::int64_t ha) {
      FaceSpec s{{a, b, h}, {ab, bh, ha}, f.info};
      s.info.type.reset();
      out.push_back(std::move(s));
    };
    if (is_external && seed == ExternalSeed::Bar) {
      // Two adjacent hubs: h1 fans w0..wm, h2 fans wm..w0.
      const std::size_t m = n / 2;
      const VertexId h1 = add_hub(f), h2 = add_hub(f);
      external_hub = h1;
      auto spoke = [&](std::size_t i, int which) {
        return next_label + static_cast<std::int64_t>(2 * (i % n) + static_cast<std::size_t>(which));
      };
      const std::int64_t bar = next_label + static_cast<std::int64_t>(2 * n);
      for (std::size_t i = 0; i < m; ++i) {
        tri(f.walk[i], f.walk[i + 1], h1, side[i], spoke(i + 1, 0), spoke(i, 0));
      }
      for (std::size_t i = m; i < n; ++i) {
        tri(f.walk[i], f.walk[(i + 1) % n], h2, side[i], spoke(i + 1, 1), spoke(i, 1));
      }
      tri(h1, f.walk[m], h2, spoke(m, 0), spoke(m, 1), bar);
      tri(h2, f.walk[0], h1, spoke(0, 1), spoke(0, 0), bar);
      next_label += static_cast<std::int64_t>(2 * n + 1);
      continue;
    }
    const VertexId h = add_hub(f);
    if (is_external) external_hub = h;
    for (std::size_t i = 0; i < n; ++i) {
      tri(f.walk[i], f.walk[(i + 1) % n], h, side[i],
          next_label + static_cast<std::int64_t>((i + 1) % n),
          next_label + static_cast<std::int64_t>(i));
    }
    next_label += static_cast<std::int64_t>(n);
  }
  return {PlaneComplex::build(std::move(out), std::nullopt, std::move(vertices)), external_hub};
}

struct PackOptions {
  double tol = 1e-10;
  long max_iters = 100000;
  int warm_sweeps = 3;
  ExternalSeed seed = ExternalSeed::Hub;
};

/// Circles indexed by vertex id of the augmented triangulation.
struct CirclePacking {
  std::shared_ptr<const PlaneComplex> complex;  // augmented triangulation
  std::vector<Circle> circles;
  std::vector<bool> marked;  // vertices belonging to this (sub-)packing
  VertexId infinity_vertex = 0;
  std::array<VertexPair, 3> anchors{};
  double residual = 0.0;
  long iterations = 0;

  bool is_hub(VertexId v) const { return complex->vertex(v).hub; }
  std::vector<VertexId> marked_vertices(bool include_hubs = false) const {
    std::vector<VertexId> out;
    for (VertexId v = 0; v < circles.size(); ++v) {
      if (marked[v] && (include_hubs || !is_hub(v))) out.push_back(v);
    }
    return out;
  }
};

/// First three sides of the level-0 boundary cycle (face 0's walk on spheres).
inline std::array<VertexPair, 3> default_anchors(const PlaneComplex& c) {
  std::vector<VertexId> cycle;
  if (c.external_face()) {
    std::vector<VertexId> ids;
    for (VertexId v : c.face(*c.external_face()).walk) ids.push_back(v);
    // Order the boundary by id: 0, 1, ..., e-1 run along the polygon.
    cycle = ids;
    std::reverse(cycle.begin(), cycle.end());
    const auto it = std::min_element(cycle.begin(), cycle.end());
    std::rotate(cycle.begin(), it, cycle.end());
  } else {
    cycle = c.face(0).walk;
  }
  const std::size_t n = cycle.size();
  if (n < 3) throw Error(ErrorCode::DegenerateTriple, "boundary cycle shorter than three edges");
  return {VertexPair{cycle[0], cycle[1 % n]}, VertexPair{cycle[1 % n], cycle[2 % n]},
          VertexPair{cycle[2 % n], cycle[3 % n]}};
}

namespace detail {

/// Hyperbolic quantities of a radius given in the convex variable u = log tanh(h/2).
struct HypRadius {
  double h = 0.0;       // infinite for horocycles
  double sinh_h = 0.0;
  bool horocycle = false;
};

inline HypRadius hyp_from_u(double u) {
  const double s = std::exp(u);
  HypRadius r;
  r.h = std::log1p(s) - std::log(-std::expm1(u));
  r.sinh_h = 2.0 * s / ((-std::expm1(u)) * (1.0 + s));
  return r;
}

/// ln of sinh(hj) / sinh(h1 + hj), with horocycle limit -h1.
inline double log_ratio(double h1, const HypRadius& j) {
  if (j.horocycle) return -h1;
  return -h1 + std::log(-std::expm1(-2.0 * j.h)) - std::log(-std::expm1(-2.0 * (h1 + j.h)));
}

inline double coth(double x) { return 1.0 / std::tanh(x); }

struct Triangle {
  std::array<VertexId, 3> v;
};

class MaximalPackingSolver {
 public:
  MaximalPackingSolver(const PlaneComplex& tri, VertexId infinity) : tri_(tri), inf_(infinity) {
    const std::size_t nv = tri.vertex_count();
    role_.assign(nv, Role::Interior);
    role_[inf_] = Role::Infinity;
    for (VertexId w : tri.neighbors(inf_)) role_[w] = Role::Boundary;
    index_.assign(nv, -1);
    for (VertexId v = 0; v < nv; ++v) {
      if (role_[v] == Role::Interior) {
        index_[v] = static_cast<int>(unknowns_.size());
        unknowns_.push_back(v);
      }
    }
    incident_.assign(nv, {});
    for (FaceId f = 0; f < tri.face_count(); ++f) {
      const auto& w = tri.face(f).walk;
      if (w[0] == inf_ || w[1] == inf_ || w[2] == inf_) continue;
      triangles_.push_back({{w[0], w[1], w[2]}});
      for (VertexId v : w) incident_[v].push_back(triangles_.size() - 1);
    }
    u_.assign(nv, std::log(std::tanh(0.5)));
  }

  const std::vector<VertexId>& unknowns() const { return unknowns_; }
  bool is_boundary(VertexId v) const { return role_[v] == Role::Boundary; }
  bool is_infinity(VertexId v) const { return v == inf_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }

  HypRadius radius(VertexId v) const {
    if (role_[v] != Role::Interior) return {std::numeric_limits<double>::infinity(), 0.0, true};
    return hyp_from_u(u_[v]);
  }

  /// Angle at corner i of a triangle.
  double angle(const Triangle& t, int i) const {
    const HypRadius r1 = radius(t.v[i]);
    const HypRadius r2 = radius(t.v[(i + 1) % 3]);
    const HypRadius r3 = radius(t.v[(i + 2) % 3]);
    const double ls = log_ratio(r1.h, r2) + log_ratio(r1.h, r3);
    return 2.0 * std::asin(std::min(1.0, std::exp(0.5 * ls)));
  }

  double angle_sum(VertexId v) const {
    double s = 0.0;
    for (std::size_t ti : incident_[v]) {
      const Triangle& t = triangles_[ti];
      const int i = t.v[0] == v ? 0 : (t.v[1] == v ? 1 : 2);
      s += angle(t, i);
    }
    return s;
  }

  Eigen::VectorXd residual_vector() const {
    Eigen::VectorXd f(static_cast<Eigen::Index>(unknowns_.size()));
    for (std::size_t k = 0; k < unknowns_.size(); ++k) {
      f[static_cast<Eigen::Index>(k)] = angle_sum(unknowns_[k]) - 2.0 * std::numbers::pi;
    }
    return f;
  }

  /// Jacobian of the angle sums with respect to u.
  Eigen::SparseMatrix<double> jacobian() const {
    std::vector<Eigen::Triplet<double>> trip;
    for (const Triangle& t : triangles_) {
      for (int i = 0; i < 3; ++i) {
        const VertexId v1 = t.v[i];
        if (index_[v1] < 0) continue;
        const VertexId vj[2] = {t.v[(i + 1) % 3], t.v[(i + 2) % 3]};
        const HypRadius r1 = radius(v1);
        const HypRadius rj[2] = {radius(vj[0]), radius(vj[1])};
        const double ls = log_ratio(r1.h, rj[0]) + log_ratio(r1.h, rj[1]);
        const double s = std::exp(ls);
        const double dalpha = std::sqrt(s / (1.0 - s));
        double d1 = 0.0;
        for (int k = 0; k < 2; ++k) {
          if (rj[k].horocycle) {
            d1 -= 1.0;
            continue;
          }
          const double c = coth(r1.h + rj[k].h);
          d1 -= c;
          if (index_[vj[k]] >= 0) {
            const double dj = (coth(rj[k].h) - c) * rj[k].sinh_h;
            trip.emplace_back(index_[v1], index_[vj[k]], dalpha * dj);
          }
        }
        trip.emplace_back(index_[v1], index_[v1], dalpha * d1 * r1.sinh_h);
      }
    }
    const auto n = static_cast<Eigen::Index>(unknowns_.size());
    Eigen::SparseMatrix<double> j(n, n);
    j.setFromTriplets(trip.begin(), trip.end());
    return j;
  }

  /// One Gauss-Seidel sweep: each unknown solves its own angle-sum equation.
  void sweep() {
    for (VertexId v : unknowns_) {
      double lo = -60.0, hi = -1e-16;  // angle sum decreases in u
      double x = u_[v];
      for (int it = 0; it < 60; ++it) {
        u_[v] = x;
        const double g = angle_sum(v) - 2.0 * std::numbers::pi;
        if (std::abs(g) < 1e-14) break;
        if (g > 0.0) lo = x; else hi = x;
        x = 0.5 * (lo + hi);
      }
      u_[v] = x;
    }
  }

  long solve(const PackOptions& opt) {
    if (unknowns_.empty()) return 0;
    long iters = 0;
    for (int s = 0; s < opt.warm_sweeps; ++s) {
      sweep();
      ++iters;
    }
    Eigen::VectorXd f = residual_vector();
    double fn = f.norm();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    int stalled = 0;
    while (f.lpNorm<Eigen::Infinity>() >= opt.tol) {
      if (++iters > opt.max_iters) {
        throw Error(ErrorCode::NonConvergent,
                    "angle-sum residual " + std::to_string(f.lpNorm<Eigen::Infinity>()) +
                        " after " + std::to_string(opt.max_iters) + " iterations");
      }
      const Eigen::SparseMatrix<double> j = jacobian();
      lu.compute(j);
      bool stepped = false;
      if (lu.info() == Eigen::Success) {
        const Eigen::VectorXd step = lu.solve(-f);
        const std::vector<double> saved = u_;
        for (double t = 1.0; t > 1e-6; t *= 0.5) {
          bool ok = true;
          for (std::size_t k = 0; k < unknowns_.size(); ++k) {
            const double x = saved[unknowns_[k]] + t * step[static_cast<Eigen::Index>(k)];
            if (!(x < 0.0)) ok = false;
            u_[unknowns_[k]] = x;
          }
          if (!ok) continue;
          const Eigen::VectorXd g = residual_vector();
          if (g.norm() < (1.0 - 1e-4 * t) * fn) {
            f = g;
            fn = g.norm();
            stepped = true;
            break;
          }
        }
        if (!stepped) u_ = saved;
      }
      if (!stepped) {
        sweep();
        f = residual_vector();
        stalled = f.norm() < fn ? 0 : stalled + 1;
        fn = f.norm();
        if (stalled > 20) {
          throw Error(ErrorCode::NonConvergent,
                      "angle-sum residual stalled at " + std::to_string(f.lpNorm<Eigen::Infinity>()));
        }
      }
    }
    // Polish to the floating-point floor; layout closure error tracks this residual.
    for (int k = 0; k < 2; ++k) {
      lu.compute(jacobian());
      if (lu.info() != Eigen::Success) break;
      const Eigen::VectorXd step = lu.solve(-f);
      const std::vector<double> saved = u_;
      for (std::size_t i = 0; i < unknowns_.size(); ++i) {
        u_[unknowns_[i]] = std::min(saved[unknowns_[i]] + step[static_cast<Eigen::Index>(i)], -1e-300);
      }
      const Eigen::VectorXd g = residual_vector();
      if (g.lpNorm<Eigen::Infinity>() < f.lpNorm<Eigen::Infinity>()) {
        f = g;
      } else {
        u_ = saved;
        break;
      }
    }
    residual_ = f.lpNorm<Eigen::Infinity>();
    return iters;
  }

  double residual() const { return residual_; }

 private:
  enum class Role { Interior, Boundary, Infinity };
  const PlaneComplex& tri_;
  VertexId inf_;
  std::vector<Role> role_;
  std::vector<int> index_;
  std::vector<VertexId> unknowns_;
  std::vector<Triangle> triangles_;
  std::vector<std::vector<std::size_t>> incident_;
  std::vector<double> u_;
  double residual_ = 0.0;
};

using Vec4 = std::array<double, 4>;  // (k, khat, kc.re, kc.im)

inline Vec4 to_vec(const Circle& c) { return {c.k, c.khat, c.kc.real(), c.kc.imag()}; }
inline Circle from_vec(const Vec4& v) { return {v[0], v[1], {v[2], v[3]}}; }
inline double lorentz(const Vec4& a, const Vec4& b) {
  return a[2] * b[2] + a[3] * b[3] - 0.5 * (a[0] * b[1] + a[1] * b[0]);
}

inline double det3(double a, double b, double c, double d, double e, double f, double g, double h,
                   double i) {
  return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

/// Lorentz normal of span(x, y, z): <n, v> = det(v, x, y, z).
inline Vec4 lorentz_normal(const Vec4& x, const Vec4& y, const Vec4& z) {
  Vec4 c;
  for (int col = 0; col < 4; ++col) {
    int idx[3], m = 0;
    for (int k = 0; k < 4; ++k) {
      if (k != col) idx[m++] = k;
    }
    const double minor = det3(x[idx[0]], x[idx[1]], x[idx[2]], y[idx[0]], y[idx[1]], y[idx[2]],
                              z[idx[0]], z[idx[1]], z[idx[2]]);
    c[col] = (col % 2 == 0 ? 1.0 : -1.0) * minor;
  }
  // Raise the index with the inverse metric.
  return {-2.0 * c[1], -2.0 * c[0], c[2], c[3]};
}

/// Circle w tangent to v and u, at inversive product -coth(h_w) with the unit
/// circle exterior, on the left of the directed pair v -> u.
inline Circle third_circle(const Circle& cv, const Circle& cu, double coth_v, double coth_u,
                           double coth_w) {
  static const Vec4 unit_out{-1.0, 1.0, 0.0, 0.0};
  const Vec4 v = to_vec(cv), u = to_vec(cu);
  // Gram system for w0 = a v + b u + g U.
  Eigen::Matrix3d g;
  g << 1.0, -1.0, -coth_v, -1.0, 1.0, -coth_u, -coth_v, -coth_u, 1.0;
  const Eigen::Vector3d rhs(-1.0, -1.0, -coth_w);
  const Eigen::Vector3d abg = g.fullPivLu().solve(rhs);
  Vec4 w0;
  for (int k = 0; k < 4; ++k) w0[k] = abg[0] * v[k] + abg[1] * u[k] + abg[2] * unit_out[k];
  const Vec4 n = lorentz_normal(v, u, unit_out);
  const double nn = lorentz(n, n);
  const double t = std::sqrt(std::max(0.0, (1.0 - lorentz(w0, w0)) / nn));
  const Complex pv = cv.center(), pu = cu.center();
  Circle best{};
  double best_side = -std::numeric_limits<double>::infinity();
  for (double sgn : {1.0, -1.0}) {
    Vec4 w;
    for (int k = 0; k < 4; ++k) w[k] = w0[k] + sgn * t * n[k];
    const Circle cw = from_vec(w);
    const Complex pw = cw.center();
    const double side = std::imag(std::conj(pu - pv) * (pw - pv));
    if (side > best_side) {
      best_side = side;
      best = cw;
    }
  }
  return best;
}

/// Gauss-Newton on the relative tangency equations, variables scaled by each
/// circle's radius. The exterior circle stays fixed; disk automorphisms are
/// damped by a small Tikhonov term.
inline void refine_layout(const PlaneComplex& tri, VertexId inf, std::vector<Circle>& circles,
                          int rounds = 6) {
  const std::size_t nv = tri.vertex_count();
  std::vector<int> index(nv, -1);
  int n = 0;
  for (VertexId v = 0; v < nv; ++v) {
    if (v != inf) index[v] = n++;
  }
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (EdgeId e = 0; e < tri.edge_count(); ++e) edges.push_back(tri.edge_ends(e));
  double previous = std::numeric_limits<double>::infinity();
  for (int round = 0; round < rounds; ++round) {
    std::vector<Complex> c(nv);
    std::vector<double> r(nv);
    for (VertexId v = 0; v < nv; ++v) {
      if (v != inf) c[v] = circles[v].center(), r[v] = circles[v].radius();
    }
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(3 * n);
    double worst = 0.0;
    for (auto [v, w] : edges) {
      if (w == inf) std::swap(v, w);
      std::array<std::pair<int, double>, 6> row{};
      double f;
      if (v == inf) {
        const double d = std::abs(c[w]);
        const Complex u = c[w] / d;
        f = (1.0 - d) / r[w] - 1.0;
        const int iw = 3 * index[w];
        row = {{{iw, -u.real()}, {iw + 1, -u.imag()}, {iw + 2, -(1.0 - d) / r[w]}, {-1, 0}, {-1, 0}, {-1, 0}}};
      } else {
        const Complex dv = c[v] - c[w];
        const double d = std::abs(dv), sum = r[v] + r[w];
        const Complex u = dv / d;
        f = d / sum - 1.0;
        const int iv = 3 * index[v], iw = 3 * index[w];
        row = {{{iv, r[v] * u.real() / sum}, {iv + 1, r[v] * u.imag() / sum}, {iv + 2, -r[v] * d / (sum * sum)},
                {iw, -r[w] * u.real() / sum}, {iw + 1, -r[w] * u.imag() / sum}, {iw + 2, -r[w] * d / (sum * sum)}}};
      }
      worst = std::max(worst, std::abs(f));
      for (const auto& [i, a] : row) {
        if (i < 0) continue;
        rhs[i] -= a * f;
        for (const auto& [j, b] : row) {
          if (j >= 0) trip.emplace_back(i, j, a * b);
        }
      }
    }
    if (worst < 1e-14 || worst >= previous) break;
    previous = worst;
    for (int i = 0; i < 3 * n; ++i) trip.emplace_back(i, i, 1e-12);
    Eigen::SparseMatrix<double> normal(3 * n, 3 * n);
    normal.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(normal);
    if (ldlt.info() != Eigen::Success) break;
    const Eigen::VectorXd step = ldlt.solve(rhs);
    std::vector<Circle> next = circles;
    for (VertexId v = 0; v < nv; ++v) {
      if (v == inf) continue;
      const int i = 3 * index[v];
      next[v] = Circle::from_center_radius(c[v] + r[v] * Complex(step[i], step[i + 1]),
                                           r[v] * (1.0 + step[i + 2]));
    }
    circles = std::move(next);
  }
}

}  // namespace detail

inline std::size_t max_level(const PlaneComplex& c) {
  int m = 0;
  for (const auto& v : c.vertices()) m = std::max(m, v.level);
  return static_cast<std::size_t>(m);
}

/// The distinguished vertex realized as the unit circle's exterior: the
/// external hub, else the hub of face 0, else vertex 0.
inline VertexId infinity_vertex(const PlaneComplex& original, const Augmentation& aug) {
  if (aug.external_hub) return *aug.external_hub;
  if (original.face(0).walk.size() > 3) return static_cast<VertexId>(original.vertex_count());
  return 0;
}

inline CirclePacking pack(const PlaneComplex& c, const PackOptions& opt = {}) {
  if (const auto w = simplicity_witness(c)) {
    throw Error(ErrorCode::NotSimple, "edge " + std::to_string(w->first) + "-" +
                                          std::to_string(w->second) + " is a loop or multi-edge");
  }
  Augmentation aug = augment(c, opt.seed);
  const VertexId inf = infinity_vertex(c, aug);
  auto tri = std::make_shared<const PlaneComplex>(std::move(aug.complex));
  if (!is_simple(*tri)) throw Error(ErrorCode::NotSimple, "augmented triangulation is not simple");

  detail::MaximalPackingSolver solver(*tri, inf);
  CirclePacking p;
  p.complex = tri;
  p.iterations = solver.solve(opt);
  p.residual = solver.residual();
  p.infinity_vertex = inf;
  p.anchors = default_anchors(c);
  const std::size_t nv = tri->vertex_count();
  p.circles.assign(nv, Circle{});
  p.marked.assign(nv, true);

  auto coth_of = [&](VertexId v) {
    const auto r = solver.radius(v);
    return r.horocycle ? 1.0 : detail::coth(r.h);
  };
  std::vector<bool> placed(nv, false);
  p.circles[inf] = Circle{-1.0, 1.0, 0.0};
  placed[inf] = true;

  const auto& tris = solver.triangles();
  if (tris.empty()) {
    // Every face meets the distinguished vertex: two horocycles tangent at 0.
    std::vector<VertexId> rest;
    for (VertexId v = 0; v < nv; ++v) {
      if (v != inf) rest.push_back(v);
    }
    if (rest.size() != 2) throw Error(ErrorCode::NotSimple, "no triangle avoids the distinguished vertex");
    p.circles[rest[0]] = Circle::from_center_radius(-0.5, 0.5);
    p.circles[rest[1]] = Circle::from_center_radius(0.5, 0.5);
    return p;
  }
  // Start at the first triangle carrying the first anchor edge (or its non-infinite end).
  std::size_t start = 0;
  {
    const auto [a, b] = p.anchors[0];
    bool found = false;
    for (std::size_t t = 0; t < tris.size() && !found; ++t) {
      const auto& v = tris[t].v;
      const bool ha = std::find(v.begin(), v.end(), a) != v.end();
      const bool hb = std::find(v.begin(), v.end(), b) != v.end();
      if (ha && hb) start = t, found = true;
    }
    for (std::size_t t = 0; t < tris.size() && !found; ++t) {
      const auto& v = tris[t].v;
      const VertexId x = a == inf ? b : a;
      if (std::find(v.begin(), v.end(), x) != v.end()) start = t, found = true;
    }
  }
  {
    const auto& v = tris[start].v;
    const auto ra = solver.radius(v[0]), rb = solver.radius(v[1]);
    if (ra.horocycle) {
      p.circles[v[0]] = Circle::from_center_radius(-0.5, 0.5);
      const double b = rb.horocycle ? 1.0 : std::tanh(rb.h);
      p.circles[v[1]] = Circle::from_center_radius(0.5 * b, 0.5 * b);
    } else {
      const double a = std::tanh(0.5 * ra.h);
      p.circles[v[0]] = Circle::from_center_radius(0.0, a);
      const double b = rb.horocycle ? 1.0 : std::tanh(0.5 * ra.h + rb.h);
      p.circles[v[1]] = Circle::from_center_radius(0.5 * (a + b), 0.5 * (b - a));
    }
    placed[v[0]] = placed[v[1]] = true;
  }
  // Face adjacency over shared edges, visited in face-id order.
  std::map<VertexPair, std::vector<std::size_t>> by_edge;
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (int i = 0; i < 3; ++i) {
      VertexId a = tris[t].v[i], b = tris[t].v[(i + 1) % 3];
      by_edge[{std::min(a, b), std::max(a, b)}].push_back(t);
    }
  }
  std::vector<bool> visited(tris.size(), false);
  std::deque<std::size_t> queue{start};
  visited[start] = true;
  while (!queue.empty()) {
    const std::size_t t = queue.front();
    queue.pop_front();
    const auto& v = tris[t].v;
    int missing = -1;
    for (int i = 0; i < 3; ++i) {
      if (!placed[v[i]]) missing = i;
    }
    if (missing >= 0) {
      const VertexId a = v[(missing + 1) % 3], b = v[(missing + 2) % 3], w = v[missing];
      p.circles[w] = detail::third_circle(p.circles[a], p.circles[b], coth_of(a), coth_of(b),
                                          coth_of(w));
      placed[w] = true;
    }
    std::vector<std::size_t> next;
    for (int i = 0; i < 3; ++i) {
      VertexId a = v[i], b = v[(i + 1) % 3];
      for (std::size_t s : by_edge[{std::min(a, b), std::max(a, b)}]) {
        if (!visited[s]) next.push_back(s);
      }
    }
    std::sort(next.begin(), next.end());
    for (std::size_t s : next) {
      if (!visited[s]) {
        visited[s] = true;
        queue.push_back(s);
      }
    }
  }
  for (VertexId v = 0; v < nv; ++v) {
    if (!placed[v]) throw Error(ErrorCode::NonConvergent, "layout did not reach every vertex");
  }
  detail::refine_layout(*tri, inf, p.circles);
  return p;
}

/// Tangency point of an anchor edge in a packing.
inline SpherePoint anchor_point(const CirclePacking& p, const VertexPair& e) {
  if (!p.complex->adjacent(e.first, e.second)) {
    throw Error(ErrorCode::DegenerateTriple, "anchor " + std::to_string(e.first) + "-" +
                                                 std::to_string(e.second) + " is not an edge");
  }
  try {
    return tangency_point(p.circles[e.first], p.circles[e.second], 1e-6);
  } catch (const Error&) {
    throw Error(ErrorCode::DegenerateTriple, "anchor circles are not tangent");
  }
}

inline CirclePacking apply_mobius(const CirclePacking& p, const MobiusMap& m) {
  CirclePacking q = p;
  for (auto& c : q.circles) c = m(c);
  return q;
}

/// Sends the anchors' tangency points to 0, 1 and infinity.
inline CirclePacking mobius_normalize(const CirclePacking& p, const std::array<VertexPair, 3>& anchors) {
  const std::array<SpherePoint, 3> from{anchor_point(p, anchors[0]), anchor_point(p, anchors[1]),
                                        anchor_point(p, anchors[2])};
  const MobiusMap m = mobius_from_three_points(
      from, {SpherePoint::finite(0.0), SpherePoint::finite(1.0), SpherePoint::infinity()});
  CirclePacking q = apply_mobius(p, m);
  q.anchors = anchors;
  return q;
}

inline CirclePacking mobius_normalize(const CirclePacking& p) { return mobius_normalize(p, p.anchors); }

/// Sub-packing of the vertices created at level <= k, hubs excluded.
inline CirclePacking extract_subpacking(const CirclePacking& p, int k) {
  if (k < 0 || static_cast<std::size_t>(k) > max_level(*p.complex)) {
    throw Error(ErrorCode::LevelOutOfRange, "level " + std::to_string(k) + " exceeds packing depth");
  }
  CirclePacking q = p;
  for (VertexId v = 0; v < q.circles.size(); ++v) {
    const auto& info = p.complex->vertex(v);
    q.marked[v] = p.marked[v] && !info.hub && info.level <= k;
  }
  return q;
}

// ---- audits ----

inline double tangency_error(const Circle& a, const Circle& b) {
  if (a.is_line() || b.is_line()) return std::abs(inversive_product(a, b) + 1.0);
  const double d = std::abs(a.center() - b.center());
  const double ra = a.radius(), rb = b.radius();
  if (ra > 0 && rb > 0) return std::abs(d - (ra + rb)) / (ra + rb);
  // One exterior disk: internal tangency.
  const double big = std::max(std::abs(ra), std::abs(rb)), small = std::min(std::abs(ra), std::abs(rb));
  return std::abs(d - (big - small)) / (big + small);
}

inline double tangency_audit(const CirclePacking& p) {
  double worst = 0.0;
  for (EdgeId e = 0; e < p.complex->edge_count(); ++e) {
    const auto [u, v] = p.complex->edge_ends(e);
    worst = std::max(worst, tangency_error(p.circles[u], p.circles[v]));
  }
  return worst;
}

/// All 4-cliques of the triangulation (a triangle plus a common neighbour).
inline std::vector<std::array<VertexId, 4>> tangent_quadruples(const PlaneComplex& tri) {
  std::set<std::array<VertexId, 4>> out;
  for (const auto& f : tri.faces()) {
    if (f.walk.size() != 3) continue;
    const auto na = tri.neighbors(f.walk[0]);
    for (VertexId d : na) {
      if (d == f.walk[1] || d == f.walk[2]) continue;
      if (tri.adjacent(d, f.walk[1]) && tri.adjacent(d, f.walk[2])) {
        std::array<VertexId, 4> q{f.walk[0], f.walk[1], f.walk[2], d};
        std::sort(q.begin(), q.end());
        out.insert(q);
      }
    }
  }
  return {out.begin(), out.end()};
}

inline double descartes_audit(const CirclePacking& p) {
  double worst = 0.0;
  for (const auto& q : tangent_quadruples(*p.complex)) {
    worst = std::max(worst, std::abs(descartes_residual_scaled(
                                p.circles[q[0]].k, p.circles[q[1]].k, p.circles[q[2]].k,
                                p.circles[q[3]].k)));
  }
  return worst;
}

}  // namespace packd
