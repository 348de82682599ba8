#include "qcdyn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include <fmt/format.h>

namespace qcdyn {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;
  double px0 = 0.0, px1 = 1.0;

  double map(double v) const {
    const double a = log ? std::log10(v) : v;
    const double b0 = log ? std::log10(lo) : lo;
    const double b1 = log ? std::log10(hi) : hi;
    return px0 + (a - b0) / (b1 - b0) * (px1 - px0);
  }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }

  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      for (int e = static_cast<int>(std::floor(std::log10(lo))); e <= static_cast<int>(std::ceil(std::log10(hi))); ++e) {
        const double v = std::pow(10.0, e);
        if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) t.push_back(v);
      }
    } else {
      for (int i = 0; i <= 4; ++i) t.push_back(lo + (hi - lo) * i / 4);
    }
    return t;
  }
};

void fit_range(Axis& ax, const std::vector<double>& vals) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : vals)
    if (ax.usable(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!std::isfinite(lo)) {
    lo = ax.log ? 1e-3 : 0.0;
    hi = 1.0;
  }
  if (ax.log) {
    lo = std::pow(10.0, std::floor(std::log10(lo)));
    hi = std::pow(10.0, std::ceil(std::log10(hi)));
    if (hi <= lo) hi = lo * 10.0;
  } else {
    if (lo > 0.0) lo = 0.0;
    if (hi <= lo) hi = lo + 1.0;
  }
  ax.lo = lo;
  ax.hi = hi;
}

// Perceptually ordered ramp from dark blue to yellow.
std::string ramp(double u) {
  static const double stops[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  u = std::clamp(u, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(u));
  const double f = u - i;
  int rgb[3];
  for (int k = 0; k < 3; ++k) rgb[k] = static_cast<int>(std::lround(stops[i][k] + f * (stops[i + 1][k] - stops[i][k])));
  return fmt::format("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2]);
}

std::string header(int w, int h) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
      w, h);
}

}  // namespace

std::string svg_line_chart(const std::vector<Series>& series, const ChartOptions& opt) {
  const double left = 70, right = 20, top = 40, bottom = 50;
  Axis ax{.log = opt.log_x, .px0 = left, .px1 = opt.width - right};
  Axis ay{.log = opt.log_y, .px0 = opt.height - bottom, .px1 = top};
  std::vector<double> xs, ys;
  for (const auto& s : series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  fit_range(ax, xs);
  fit_range(ay, ys);

  std::string out = header(opt.width, opt.height);
  out += fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                     opt.width / 2, escape(opt.title));
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
                     left, top, ax.px1 - left, ay.px0 - top);
  for (double t : ax.ticks()) {
    const double px = ax.map(t);
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#ddd\"/>\n", px, top, ay.px0);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n", px, ay.px0 + 16, t);
  }
  for (double t : ay.ticks()) {
    const double py = ay.map(t);
    out += fmt::format("<line x1=\"{1}\" y1=\"{0:.2f}\" x2=\"{2}\" y2=\"{0:.2f}\" stroke=\"#ddd\"/>\n", py, left, ax.px1);
    out += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n", left - 6, py + 4, t);
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", (left + ax.px1) / 2,
                     opt.height - 12, escape(opt.x_label));
  out += fmt::format("<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
                     (top + ay.px0) / 2, escape(opt.y_label));

  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      const double px = ax.map(s.x[i]), py = ay.map(s.y[i]);
      pts += fmt::format("{:.2f},{:.2f} ", px, py);
      if (s.markers)
        out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", px, py, s.color);
    }
    if (!s.markers && !pts.empty())
      out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", pts, s.color);
    const double ly = top + 16 + 16.0 * si;
    out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                       left + 10, ly - 4, left + 30, s.color);
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", left + 36, ly, escape(s.label));
  }
  out += "</svg>\n";
  return out;
}

std::string svg_polar_heatmap(const PolarGrid& grid, const std::vector<double>& values,
                              const std::string& title) {
  const int w = 520, h = 560;
  const double cx = 260, cy = 290, r_out = 220, r_hole = 30;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values)
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  const double span = hi > lo ? hi - lo : 1.0;

  // Ring i spans between the geometric midpoints to its neighbours.
  const std::size_t rings = grid.radii.size();
  std::vector<double> edges(rings + 1);
  for (std::size_t i = 1; i < rings; ++i) edges[i] = std::log(std::sqrt(grid.radii[i - 1] * grid.radii[i]));
  const double first = std::log(grid.radii.front()), last = std::log(grid.radii.back());
  const double pad = rings > 1 ? (last - first) / (2.0 * (rings - 1)) : 0.5;
  edges[0] = first - pad;
  edges[rings] = last + pad;
  auto to_px = [&](double lr) { return r_hole + (lr - edges[0]) / (edges[rings] - edges[0]) * (r_out - r_hole); };

  std::string out = header(w, h);
  out += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", w / 2, escape(title));
  const int n = grid.angles_per_ring;
  const double dth = 2.0 * std::numbers::pi / n;
  for (std::size_t i = 0; i < grid.size() && i < values.size(); ++i) {
    const std::size_t ring = grid.ring_of(i);
    const double r0 = to_px(edges[ring]), r1 = to_px(edges[ring + 1]);
    const double t0 = grid.angle_of(i) - dth / 2, t1 = t0 + dth;
    const std::string fill = std::isfinite(values[i]) ? ramp((values[i] - lo) / span) : "#999999";
    out += fmt::format(
        "<path d=\"M{:.2f},{:.2f} L{:.2f},{:.2f} A{:.2f},{:.2f} 0 0 0 {:.2f},{:.2f} L{:.2f},{:.2f} "
        "A{:.2f},{:.2f} 0 0 1 {:.2f},{:.2f} Z\" fill=\"{}\"/>\n",
        cx + r0 * std::cos(t0), cy - r0 * std::sin(t0), cx + r1 * std::cos(t0), cy - r1 * std::sin(t0), r1, r1,
        cx + r1 * std::cos(t1), cy - r1 * std::sin(t1), cx + r0 * std::cos(t1), cy - r0 * std::sin(t1), r0, r0,
        cx + r0 * std::cos(t0), cy - r0 * std::sin(t0), fill);
  }
  out += fmt::format("<text x=\"20\" y=\"{}\">min {:.4g}</text>\n", h - 12, lo);
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">max {:.4g}</text>\n", w - 20, h - 12, hi);
  for (int i = 0; i < 20; ++i)
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"10\" fill=\"{}\"/>\n", 160 + 10 * i, h - 22,
                       ramp(i / 19.0));
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">radius {:.3g} .. {:.3g} (log scale)</text>\n",
                     w / 2, 44, grid.radii.front(), grid.radii.back());
  out += "</svg>\n";
  return out;
}

std::string svg_modulus_curve(const ModulusCurve& curve) {
  Series omega{.label = "omega(t)", .x = curve.t, .y = curve.omega, .color = "#1f77b4"};
  Series integrand{.label = "omega(t)/t", .x = curve.t, .color = "#d62728"};
  for (std::size_t i = 0; i < curve.t.size(); ++i) integrand.y.push_back(curve.omega[i] / curve.t[i]);
  std::string title = fmt::format("modulus of conformality, integral {:.6g}{}", curve.integral_value,
                                  curve.divergent ? " (divergent head)" : "");
  return svg_line_chart({omega, integrand},
                        {.title = title, .x_label = "t", .y_label = "value", .log_x = true, .log_y = true});
}

std::string svg_mu_heatmap(const BeltramiField& field) {
  std::vector<double> v(field.mu.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = field.valid[i] ? std::abs(field.mu[i]) : std::numeric_limits<double>::quiet_NaN();
  return svg_polar_heatmap(field.grid, v, "|mu| on the polar grid");
}

std::string svg_residual_heatmap(const CoordinateGrid& grid) {
  std::vector<double> v(grid.residual.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = grid.residual[i] > 0.0 ? std::log10(grid.residual[i]) : std::numeric_limits<double>::quiet_NaN();
  return svg_polar_heatmap(grid.grid, v, "log10 residual");
}

std::string svg_motion_k(const ExtendedMotion& ext) {
  // Several samples share each |c|; keep the largest measured_k per modulus.
  std::map<double, double> worst;
  for (std::size_t ci = 0; ci < ext.base.c_samples.size(); ++ci) {
    const double a = std::abs(ext.base.c_samples[ci]);
    if (a == 0.0) continue;
    worst[a] = std::max(worst[a], ext.measured_k[ci]);
  }
  Series measured{.label = "measured k", .color = "#1f77b4", .markers = true};
  Series bound{.label = "bound k = |c|, K = (1+|c|)/(1-|c|)", .color = "#d62728"};
  for (auto [a, k] : worst) {
    measured.x.push_back(a);
    measured.y.push_back(k);
  }
  for (int i = 1; i <= 50; ++i) {
    bound.x.push_back(0.9 * i / 50);
    bound.y.push_back(0.9 * i / 50);
  }
  return svg_line_chart({bound, measured}, {.title = "extension dilatation vs |c|", .x_label = "|c|", .y_label = "k"});
}

}  // namespace qcdyn
