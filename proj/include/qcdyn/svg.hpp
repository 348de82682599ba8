#pragma once

#include <string>
#include <vector>

#include "qcdyn/dilatation.hpp"
#include "qcdyn/koenigs.hpp"
#include "qcdyn/motion.hpp"

namespace qcdyn {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool markers = false;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

std::string svg_line_chart(const std::vector<Series>& series, const ChartOptions& opt);

// Colored annular cells, one per grid node, on a log-radius scale.
// Non-finite values are drawn grey.
std::string svg_polar_heatmap(const PolarGrid& grid, const std::vector<double>& values,
                              const std::string& title);

// omega(t) and the integrand omega(t)/t on log-log axes.
std::string svg_modulus_curve(const ModulusCurve& curve);
std::string svg_mu_heatmap(const BeltramiField& field);
std::string svg_residual_heatmap(const CoordinateGrid& grid);
// measured_k against |c| with the bound k = |c|, i.e. K = (1+|c|)/(1-|c|).
std::string svg_motion_k(const ExtendedMotion& ext);

}  // namespace qcdyn
