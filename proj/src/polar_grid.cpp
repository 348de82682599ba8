#include "qcdyn/polar_grid.hpp"

#include <cmath>
#include <numbers>

#include "qcdyn/error.hpp"

namespace qcdyn {

PolarGrid PolarGrid::log_spaced(double r_min, double r_max, int rings, int angles, cplx center) {
  if (!(r_min > 0.0) || !(r_max > r_min) || rings < 2)
    throw Error(ErrorKind::Config, "log-spaced grid needs 0 < r_min < r_max and rings >= 2");
  PolarGrid g;
  g.center = center;
  g.angles_per_ring = angles;
  g.radii.resize(static_cast<std::size_t>(rings));
  const double a = std::log(r_min);
  const double b = std::log(r_max);
  for (int i = 0; i < rings; ++i)
    g.radii[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (rings - 1));
  g.radii.front() = r_min;
  g.radii.back() = r_max;
  g.validate();
  return g;
}

void PolarGrid::validate() const {
  if (radii.empty()) throw Error(ErrorKind::Config, "grid has no rings");
  if (angles_per_ring < 8) throw Error(ErrorKind::Config, "grid needs at least 8 angles per ring");
  if (!(radii.front() > 0.0)) throw Error(ErrorKind::Config, "grid radii must be positive");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1]))
      throw Error(ErrorKind::Config, "grid radii must be strictly increasing");
}

double PolarGrid::angle_of(std::size_t i) const {
  const auto a = i % static_cast<std::size_t>(angles_per_ring);
  return 2.0 * std::numbers::pi * static_cast<double>(a) / angles_per_ring;
}

cplx PolarGrid::node(std::size_t i) const { return center + std::polar(radius_of(i), angle_of(i)); }

std::vector<cplx> PolarGrid::nodes() const {
  std::vector<cplx> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = node(i);
  return out;
}

}  // namespace qcdyn
