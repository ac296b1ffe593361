#pragma once

// Circles in inversive coordinates, Moebius maps, cross-ratios and the
// Descartes relation. Circles and lines share one representation, and the
// Moebius action on circles is linear (conjugation of a Hermitian form).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "packd/error.hpp"

namespace packd {

using Complex = std::complex<double>;

inline constexpr double kTangencyTol = 1e-8;
inline constexpr double kParabolicTol = 1e-6;

/// A point of the Riemann sphere.
struct SpherePoint {
  Complex z{};
  bool at_infinity = false;

  static SpherePoint infinity() { return {Complex{}, true}; }
  static SpherePoint finite(Complex w) { return {w, false}; }

  /// Unit-sphere coordinates; 0 goes to the south pole, infinity to the north.
  std::array<double, 3> on_sphere() const {
    if (at_infinity) return {0.0, 0.0, 1.0};
    const double n2 = std::norm(z);
    return {2.0 * z.real() / (n2 + 1.0), 2.0 * z.imag() / (n2 + 1.0), (n2 - 1.0) / (n2 + 1.0)};
  }
};

inline double chordal_distance(const SpherePoint& a, const SpherePoint& b) {
  const auto p = a.on_sphere();
  const auto q = b.on_sphere();
  return std::sqrt((p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) +
                   (p[2] - q[2]) * (p[2] - q[2]));
}

/// Oriented circle {z : k|z|^2 - 2 Re(conj(kc) z) + khat = 0}. The oriented disk
/// is where the form is negative. Unit Lorentz norm: |kc|^2 - k*khat = 1.
struct Circle {
  double k = 0.0;     // curvature, 1/radius (negative: the disk is the exterior)
  double khat = 0.0;  // co-curvature, (|c|^2 - r^2)/r
  Complex kc{};       // curvature times center

  static Circle from_center_radius(Complex center, double radius) {
    return {1.0 / radius, (std::norm(center) - radius * radius) / radius, center / radius};
  }

  /// Line {Re(conj(normal) z) = offset}; the disk is the side `normal` points to.
  static Circle line(Complex normal, double offset) {
    const Complex n = normal / std::abs(normal);
    return {0.0, 2.0 * offset, n};
  }

  bool is_line(double tol = 1e-14) const {
    return std::abs(k) <= tol * std::max({1.0, std::abs(kc), std::abs(khat)});
  }
  Complex center() const { return kc / k; }
  double radius() const { return 1.0 / k; }

  double lorentz_norm() const { return std::norm(kc) - k * khat; }

  Circle normalized() const {
    const double n = std::sqrt(std::abs(lorentz_norm()));
    return {k / n, khat / n, kc / n};
  }

  /// Value of the defining form at a finite point (negative inside the disk).
  double form(Complex z) const {
    return k * std::norm(z) - 2.0 * (std::conj(kc) * z).real() + khat;
  }

  /// Mirror image under z -> conj(z), keeping the disk side.
  Circle conjugated() const { return {k, khat, std::conj(kc)}; }

  /// Point of the circle at parameter angle theta (finite circles only).
  Complex point_at(double theta) const {
    return center() + std::abs(radius()) * std::polar(1.0, theta);
  }
};

/// Lorentz (inversive) product. For disks with disjoint interiors it is <= -1,
/// with equality exactly at tangency.
inline double inversive_product(const Circle& a, const Circle& b) {
  return (a.kc * std::conj(b.kc)).real() - 0.5 * (a.k * b.khat + a.khat * b.k);
}

/// Spherical cap of a circle: unit axis and angular radius in [0, pi/2].
struct SphereCap {
  std::array<double, 3> axis;
  double angle;
};

inline SphereCap sphere_cap(const Circle& c) {
  const double v0 = c.kc.real(), v1 = c.kc.imag(), v2 = 0.5 * (c.khat - c.k);
  const double v3 = 0.5 * (c.khat + c.k);
  const double len = std::sqrt(v0 * v0 + v1 * v1 + v2 * v2);
  std::array<double, 3> n{v0 / len, v1 / len, v2 / len};
  // |v_{0..2}| sin(rho) = 1 and cot(rho) = v3 sin(rho).
  double rho = std::atan2(1.0 / len, v3 / len);
  if (rho > std::numbers::pi / 2) {
    rho = std::numbers::pi - rho;
    n = {-n[0], -n[1], -n[2]};
  }
  return {n, rho};
}

/// Hausdorff distance between two circles as point sets on the unit sphere,
/// in the geodesic (angular) metric. Exact, not sampled.
inline double spherical_hausdorff(const Circle& a, const Circle& b) {
  const SphereCap ca = sphere_cap(a);
  const SphereCap cb = sphere_cap(b);
  const auto& n1 = ca.axis;
  const auto& n2 = cb.axis;
  const double dot = n1[0] * n2[0] + n1[1] * n2[1] + n1[2] * n2[2];
  const double cx = n1[1] * n2[2] - n1[2] * n2[1];
  const double cy = n1[2] * n2[0] - n1[0] * n2[2];
  const double cz = n1[0] * n2[1] - n1[1] * n2[0];
  const double sep = std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
  // Points of a circle with radius r whose axis sits at angle `sep` from an axis
  // n see n at angles ranging over [|sep - r|, min(sep + r, 2pi - sep - r)].
  auto one_sided = [sep](double r_from, double r_to) {
    const double lo = std::abs(sep - r_from);
    const double hi = std::min(sep + r_from, 2.0 * std::numbers::pi - sep - r_from);
    return std::max(std::abs(lo - r_to), std::abs(hi - r_to));
  };
  return std::max(one_sided(ca.angle, cb.angle), one_sided(cb.angle, ca.angle));
}

/// Inverse stereographic image of a unit vector (north pole is infinity).
inline SpherePoint from_sphere(const std::array<double, 3>& p) {
  if (p[2] > 0.0) {
    const Complex w(p[0], -p[1]);
    if (std::abs(w) <= 1e-300) return SpherePoint::infinity();
    return SpherePoint::finite((1.0 + p[2]) / w);
  }
  return SpherePoint::finite(Complex(p[0], p[1]) / (1.0 - p[2]));
}

/// Common point of two tangent circles, found on the sphere where it is well
/// conditioned for lines and near-lines alike.
inline SpherePoint tangency_point(const Circle& a, const Circle& b, double tol = kTangencyTol) {
  const double ip = inversive_product(a, b);
  if (std::abs(std::abs(ip) - 1.0) > tol) {
    throw Error(ErrorCode::NotTangent, "inversive product " + std::to_string(ip));
  }
  const SphereCap ca = sphere_cap(a), cb = sphere_cap(b);
  const auto& n = ca.axis;
  const auto& m = cb.axis;
  const double dot = n[0] * m[0] + n[1] * m[1] + n[2] * m[2];
  std::array<double, 3> u{m[0] - dot * n[0], m[1] - dot * n[1], m[2] - dot * n[2]};
  const double ul = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  if (ul <= 1e-15) throw Error(ErrorCode::NotTangent, "concentric circles");
  for (auto& x : u) x /= ul;
  SpherePoint best;
  double best_err = std::numeric_limits<double>::infinity();
  for (double sgn : {1.0, -1.0}) {
    const double c = std::cos(ca.angle), sn = sgn * std::sin(ca.angle);
    const std::array<double, 3> p{c * n[0] + sn * u[0], c * n[1] + sn * u[1], c * n[2] + sn * u[2]};
    const double pm = std::clamp(p[0] * m[0] + p[1] * m[1] + p[2] * m[2], -1.0, 1.0);
    const double err = std::abs(std::acos(pm) - cb.angle);
    if (err < best_err) {
      best_err = err;
      best = from_sphere(p);
    }
  }
  return best;
}

/// PSL(2,C) element, stored with determinant 1.
class MobiusMap {
 public:
  MobiusMap() = default;
  MobiusMap(Complex a, Complex b, Complex c, Complex d) : m_{a, b, c, d} { normalize(); }

  static MobiusMap identity() { return {1.0, 0.0, 0.0, 1.0}; }

  Complex a() const { return m_[0]; }
  Complex b() const { return m_[1]; }
  Complex c() const { return m_[2]; }
  Complex d() const { return m_[3]; }
  Complex det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }
  Complex trace() const { return m_[0] + m_[3]; }

  MobiusMap inverse() const { return {m_[3], -m_[1], -m_[2], m_[0]}; }

  friend MobiusMap operator*(const MobiusMap& x, const MobiusMap& y) {
    return {x.a() * y.a() + x.b() * y.c(), x.a() * y.b() + x.b() * y.d(),
            x.c() * y.a() + x.d() * y.c(), x.c() * y.b() + x.d() * y.d()};
  }

  SpherePoint operator()(const SpherePoint& p) const {
    if (p.at_infinity) {
      if (std::abs(c()) == 0.0) return SpherePoint::infinity();
      return SpherePoint::finite(a() / c());
    }
    const Complex den = c() * p.z + d();
    const Complex num = a() * p.z + b();
    if (std::abs(den) <= 1e-300 || std::abs(den) <= 1e-16 * std::abs(num)) {
      return SpherePoint::infinity();
    }
    return SpherePoint::finite(num / den);
  }

  /// Image circle: with H the Hermitian form of c, the image form is
  /// M^{-*} H M^{-1}. Orientation (disk side) is preserved.
  Circle operator()(const Circle& circ) const {
    const MobiusMap inv = inverse();
    // H = [[k, -kc], [-conj(kc), khat]]
    const Complex h11 = circ.k, h12 = -circ.kc, h21 = -std::conj(circ.kc), h22 = circ.khat;
    // X = H * inv
    const Complex x11 = h11 * inv.a() + h12 * inv.c();
    const Complex x12 = h11 * inv.b() + h12 * inv.d();
    const Complex x21 = h21 * inv.a() + h22 * inv.c();
    const Complex x22 = h21 * inv.b() + h22 * inv.d();
    // Y = inv^* X
    const Complex a_ = std::conj(inv.a()), b_ = std::conj(inv.b());
    const Complex c_ = std::conj(inv.c()), d_ = std::conj(inv.d());
    const Complex y11 = a_ * x11 + c_ * x21;
    const Complex y12 = a_ * x12 + c_ * x22;
    const Complex y22 = b_ * x12 + d_ * x22;
    return Circle{y11.real(), y22.real(), -y12};
  }

 private:
  void normalize() {
    const Complex s = std::sqrt(det());
    if (std::abs(s) == 0.0) throw Error(ErrorCode::DegenerateTriple, "singular Moebius matrix");
    for (auto& e : m_) e /= s;
  }

  std::array<Complex, 4> m_{1.0, 0.0, 0.0, 1.0};
};

namespace detail {

inline bool distinct(const SpherePoint& p, const SpherePoint& q) {
  return chordal_distance(p, q) > 1e-12;
}

/// Map sending (z1, z2, z3) to (0, 1, infinity).
inline MobiusMap to_zero_one_infinity(const SpherePoint& z1, const SpherePoint& z2,
                                      const SpherePoint& z3) {
  if (!distinct(z1, z2) || !distinct(z2, z3) || !distinct(z1, z3)) {
    throw Error(ErrorCode::DegenerateTriple, "triple points are not pairwise distinct");
  }
  if (z1.at_infinity) return {0.0, z2.z - z3.z, 1.0, -z3.z};
  if (z2.at_infinity) return {1.0, -z1.z, 1.0, -z3.z};
  if (z3.at_infinity) return {1.0, -z1.z, 0.0, z2.z - z1.z};
  return {z2.z - z3.z, -z1.z * (z2.z - z3.z), z2.z - z1.z, -z3.z * (z2.z - z1.z)};
}

}  // namespace detail

/// The unique Moebius map sending (a, b, c) to (a', b', c').
inline MobiusMap mobius_from_three_points(const std::array<SpherePoint, 3>& from,
                                          const std::array<SpherePoint, 3>& to) {
  const MobiusMap s = detail::to_zero_one_infinity(from[0], from[1], from[2]);
  const MobiusMap t = detail::to_zero_one_infinity(to[0], to[1], to[2]);
  return t.inverse() * s;
}

/// ((z - z1)(z2 - z3)) / ((z - z3)(z2 - z1)), i.e. the image of z under the map
/// sending (z1, z2, z3) to (0, 1, infinity).
inline SpherePoint cross_ratio(const SpherePoint& z, const SpherePoint& z1, const SpherePoint& z2,
                               const SpherePoint& z3) {
  return detail::to_zero_one_infinity(z1, z2, z3)(z);
}

inline double descartes_residual(double k1, double k2, double k3, double k4) {
  const double s = k1 + k2 + k3 + k4;
  return s * s - 2.0 * (k1 * k1 + k2 * k2 + k3 * k3 + k4 * k4);
}

/// Descartes residual after dividing all curvatures by the largest magnitude.
inline double descartes_residual_scaled(double k1, double k2, double k3, double k4) {
  const double m = std::max({std::abs(k1), std::abs(k2), std::abs(k3), std::abs(k4)});
  if (m == 0.0) return 0.0;
  return descartes_residual(k1 / m, k2 / m, k3 / m, k4 / m);
}

enum class MobiusClass { Identity, Parabolic, Elliptic, Loxodromic };

inline std::string to_string(MobiusClass c) {
  switch (c) {
    case MobiusClass::Identity: return "identity";
    case MobiusClass::Parabolic: return "parabolic";
    case MobiusClass::Elliptic: return "elliptic";
    case MobiusClass::Loxodromic: return "loxodromic";
  }
  return "unknown";
}

struct MobiusClassification {
  MobiusClass kind = MobiusClass::Identity;
  Complex trace_sq{};
  std::vector<SpherePoint> fixed_points;
  /// Derivative at the repelling fixed point: lambda^2 with |lambda| >= 1.
  Complex multiplier{1.0, 0.0};
  std::optional<SpherePoint> repelling;
};

inline MobiusClassification classify_and_multiplier(const MobiusMap& m,
                                                    double parabolic_tol = kParabolicTol) {
  MobiusClassification out;
  const Complex tr = m.trace();
  out.trace_sq = tr * tr;
  const double scale = std::max({1.0, std::abs(m.a()), std::abs(m.d())});
  if (std::abs(m.b()) < 1e-14 * scale && std::abs(m.c()) < 1e-14 * scale &&
      std::abs(m.a() - m.d()) < 1e-14 * scale) {
    out.kind = MobiusClass::Identity;
    return out;
  }
  const Complex t = out.trace_sq;
  if (std::abs(t - 4.0) < parabolic_tol) {
    out.kind = MobiusClass::Parabolic;
  } else if (std::abs(t.imag()) < 1e-12 && t.real() >= 0.0 && t.real() < 4.0) {
    out.kind = MobiusClass::Elliptic;
  } else {
    out.kind = MobiusClass::Loxodromic;
  }

  const Complex disc = std::sqrt(t - 4.0);
  Complex lambda = 0.5 * (tr + disc);
  if (std::abs(lambda) < 1.0) lambda = 0.5 * (tr - disc);
  out.multiplier = lambda * lambda;
  if (out.kind == MobiusClass::Parabolic) out.multiplier = 1.0;

  // Fixed points and derivative 1/(cz + d)^2 at each.
  std::vector<std::pair<SpherePoint, Complex>> fixed;
  if (std::abs(m.c()) > 1e-14 * scale) {
    if (out.kind == MobiusClass::Parabolic) {
      fixed.push_back({SpherePoint::finite((m.a() - m.d()) / (2.0 * m.c())), 1.0});
    } else {
      for (double sgn : {1.0, -1.0}) {
        const Complex z = (m.a() - m.d() + sgn * disc) / (2.0 * m.c());
        const Complex e = m.c() * z + m.d();
        fixed.push_back({SpherePoint::finite(z), 1.0 / (e * e)});
      }
    }
  } else {
    // z -> (a z + b)/d fixes infinity with derivative d/a there.
    fixed.push_back({SpherePoint::infinity(), m.d() / m.a()});
    if (std::abs(m.a() - m.d()) > 1e-14 * scale) {
      fixed.push_back({SpherePoint::finite(m.b() / (m.d() - m.a())), m.a() / m.d()});
    }
  }
  for (const auto& [p, deriv] : fixed) out.fixed_points.push_back(p);
  if (out.kind == MobiusClass::Loxodromic) {
    const auto it = std::max_element(fixed.begin(), fixed.end(), [](const auto& x, const auto& y) {
      return std::abs(x.second) < std::abs(y.second);
    });
    out.repelling = it->first;
  } else if (out.kind == MobiusClass::Parabolic && !fixed.empty()) {
    out.repelling = fixed.front().first;
  }
  return out;
}

}  // namespace packd
