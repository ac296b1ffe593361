#pragma once

// Deterministic SVG figures of circle packings.
//
// The image plane is the packing plane with the y axis flipped. Numbers are
// printed with a fixed format, so equal inputs give byte-identical documents.

#include <array>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "packd/metrics.hpp"
#include "packd/packer.hpp"

namespace packd {

struct RenderOptions {
  bool color_by_level = true;
  bool show_hubs = false;
  std::optional<std::vector<VertexId>> highlight_face;  // vertex walk of a face to fill
  double width_px = 800.0;
};

namespace detail {

inline constexpr std::array<const char*, 8> kLevelPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool empty = true;
  void add(double x, double y, double r) {
    if (empty) {
      x0 = x - r, x1 = x + r, y0 = y - r, y1 = y + r;
      empty = false;
      return;
    }
    x0 = std::min(x0, x - r), x1 = std::max(x1, x + r);
    y0 = std::min(y0, y - r), y1 = std::max(y1, y + r);
  }
};

}  // namespace detail

/// Arc path of the interstice bounded by the circles of `walk`: from each
/// tangency point to the next along the shared circle.
inline std::string interstice_path(const CirclePacking& p, const std::vector<VertexId>& walk) {
  using detail::fmt;
  const std::size_t e = walk.size();
  auto t = [&](std::size_t i) {
    return tangency_point(p.circles[walk[i % e]], p.circles[walk[(i + 1) % e]], 1e-6).z;
  };
  std::string d = "M " + fmt(t(0).real()) + " " + fmt(-t(0).imag());
  for (std::size_t i = 1; i <= e; ++i) {
    const Circle& c = p.circles[walk[i % e]];
    const Complex to = t(i);
    const double frac = interstice_arc_fraction(p.circles[walk[i - 1]], c, p.circles[walk[(i + 1) % e]]);
    if (c.is_line(1e-12)) {
      d += " L " + fmt(to.real()) + " " + fmt(-to.imag());
      continue;
    }
    // Positive circles are traversed clockwise in the packing plane,
    // negative ones counterclockwise; the y flip swaps SVG's sweep sense.
    const int sweep = c.k > 0 ? 0 : 1;
    const int large = frac > 0.5 ? 1 : 0;
    const std::string r = fmt(std::abs(c.radius()));
    d += " A " + r + " " + r + " 0 " + std::to_string(large) + " " + std::to_string(sweep) + " " +
         fmt(to.real()) + " " + fmt(-to.imag());
  }
  return d + " Z";
}

/// SVG document with one `disk` element per drawn vertex, in vertex-id order.
/// Lines (circles through infinity) are clipped to the view box.
inline std::string render_packing(const CirclePacking& p, const RenderOptions& opt = {}) {
  using detail::fmt;
  std::vector<VertexId> drawn;
  for (VertexId v = 0; v < p.circles.size(); ++v) {
    const bool hub = p.is_hub(v);
    const bool marked = p.marked.empty() || p.marked[v];
    if ((hub && opt.show_hubs) || (!hub && marked)) drawn.push_back(v);
  }

  detail::Box box;
  double min_r = 0.0;
  for (VertexId v : drawn) {
    const Circle& c = p.circles[v];
    if (c.is_line(1e-12)) continue;
    const double r = std::abs(c.radius());
    box.add(c.center().real(), -c.center().imag(), r);
    min_r = min_r == 0.0 ? r : std::min(min_r, r);
  }
  if (box.empty) box.add(0.0, 0.0, 1.0);
  const double w0 = box.x1 - box.x0, h0 = box.y1 - box.y0;
  const double margin = 0.05 * std::max(w0, h0);
  const double x = box.x0 - margin, y = box.y0 - margin;
  const double w = w0 + 2.0 * margin, h = h0 + 2.0 * margin;
  const double extent = std::max(w, h);
  const double stroke = std::clamp(0.1 * min_r, 0.001 * extent, 0.004 * extent);

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt(opt.width_px) +
         "\" height=\"" + fmt(opt.width_px * h / w) + "\" viewBox=\"" + fmt(x) + " " + fmt(y) + " " + fmt(w) +
         " " + fmt(h) + "\">\n";
  out += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) +
         "\" fill=\"white\"/>\n";
  if (opt.highlight_face) {
    out += "<path class=\"interstice\" d=\"" + interstice_path(p, *opt.highlight_face) +
           "\" fill=\"#ffd54f\" fill-opacity=\"0.8\" stroke=\"none\"/>\n";
  }
  out += "<g fill=\"none\" stroke-width=\"" + fmt(stroke) + "\">\n";
  for (VertexId v : drawn) {
    const Circle& c = p.circles[v];
    const int level = p.complex ? p.complex->vertex(v).level : 0;
    const char* color = opt.color_by_level ? detail::kLevelPalette[level % 8] : "#000000";
    std::string attrs = " class=\"disk\" data-vertex=\"" + std::to_string(v) + "\" stroke=\"" + color + "\"";
    if (p.is_hub(v)) attrs += " stroke-dasharray=\"" + fmt(4.0 * stroke) + " " + fmt(2.0 * stroke) + "\"";
    if (c.is_line(1e-12)) {
      // Points z with Re(conj(kc) z) = khat / 2; clip to a disk enclosing the view box.
      const Complex n = c.kc;
      const Complex foot = n * (c.khat / (2.0 * std::norm(n)));
      const Complex dir = Complex(0.0, 1.0) * n / std::abs(n);
      const double reach = std::abs(Complex(x + 0.5 * w, -(y + 0.5 * h)) - foot) + extent;
      const Complex a = foot - reach * dir, b = foot + reach * dir;
      out += "<line" + attrs + " x1=\"" + fmt(a.real()) + "\" y1=\"" + fmt(-a.imag()) + "\" x2=\"" +
             fmt(b.real()) + "\" y2=\"" + fmt(-b.imag()) + "\"/>\n";
    } else {
      out += "<circle" + attrs + " cx=\"" + fmt(c.center().real()) + "\" cy=\"" + fmt(-c.center().imag()) +
             "\" r=\"" + fmt(std::abs(c.radius())) + "\"/>\n";
    }
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace packd
