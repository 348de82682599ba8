#pragma once

#include <cstddef>
#include <vector>

#include "qcdyn/map_model.hpp"

namespace qcdyn {

// Rings of equally spaced nodes around a center. Node i lives on ring
// i / angles_per_ring at angle 2*pi*(i % angles_per_ring) / angles_per_ring.
struct PolarGrid {
  cplx center{0.0, 0.0};
  std::vector<double> radii;
  int angles_per_ring = 16;

  static PolarGrid log_spaced(double r_min, double r_max, int rings, int angles,
                              cplx center = {0.0, 0.0});

  void validate() const;

  std::size_t size() const { return radii.size() * static_cast<std::size_t>(angles_per_ring); }
  std::size_t ring_of(std::size_t i) const { return i / static_cast<std::size_t>(angles_per_ring); }
  double radius_of(std::size_t i) const { return radii[ring_of(i)]; }
  double angle_of(std::size_t i) const;
  cplx node(std::size_t i) const;
  std::vector<cplx> nodes() const;
  double outer_radius() const { return radii.back(); }
};

}  // namespace qcdyn
