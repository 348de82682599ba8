#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qcdyn/map_model.hpp"
#include "qcdyn/polar_grid.hpp"

namespace qcdyn {

enum class MotionKind { Koenig, Boettcher, Custom };

std::string_view to_string(MotionKind k) noexcept;

// h(c, z) for z on one of the two circles of E.
using MotionFn = std::function<cplx(cplx c, cplx z)>;

// A motion of E = (inner circle) U (outer circle), sampled at equally spaced
// angles on each circle and at a set of parameters c in the unit disk.
struct MotionSample {
  MotionKind kind = MotionKind::Custom;
  double r = 0.0;             // radius of S_r
  double inner_radius = 0.0;
  double outer_radius = 0.0;
  int per_circle = 0;
  std::vector<cplx> e_points;  // inner circle first, then outer
  std::vector<cplx> c_samples;
  std::vector<cplx> values;    // values[ci * e_points.size() + zi]
  MotionFn motion;

  std::size_t e_size() const { return e_points.size(); }
  cplx value(std::size_t ci, std::size_t zi) const { return values[ci * e_size() + zi]; }
  bool is_inner(std::size_t zi) const { return zi < static_cast<std::size_t>(per_circle); }
};

// c = 0 plus 8 rays at |c| in {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 0.9}.
std::vector<cplx> default_c_samples();

MotionSample make_motion(MotionFn fn, double inner_radius, double outer_radius, double r,
                         int per_circle, std::vector<cplx> c_samples,
                         MotionKind kind = MotionKind::Custom);

// h(c, z) = z on S_r and (r / (c delta)) f(c delta z / (r lambda)) on T_r = |lambda| S_r.
MotionSample build_motion_koenig(const MapSpec& f, double r, double delta, int samples,
                                 std::vector<cplx> c_samples = default_c_samples());

// h(c, z) = z on S_r and (r^(1/n) / c) h(c z / r^(1/n)) on T_r = {|z| = r^(1/n)},
// with h the normalized lift g(h(z)) = z^n. The map is normalized to a_n = 1
// first. Throws NonCrossingViolated if some |h(c, z)| <= r on T_r.
MotionSample build_motion_boettcher(const MapSpec& g, double r, int samples,
                                    std::vector<cplx> c_samples = default_c_samples());

struct MotionAxiomReport {
  bool identity_at_zero = true;   // exact equality at c = 0
  double min_separation = 0.0;    // smallest pairwise distance of images, over c
  bool injective = true;
  double crossing_margin = 0.0;   // min |h(outer)| - max |h(inner)|, over c
  bool non_crossing = true;
  double max_cr_residual = 0.0;   // |dh/dcbar| on the c-stencil
  bool holomorphic = true;
  std::vector<std::string> failures;

  bool passed() const { return identity_at_zero && injective && non_crossing && holomorphic; }
};

inline constexpr double kCrStep = 1e-4;
inline constexpr double kCrThreshold = 1e-6;

MotionAxiomReport check_motion_axioms(const MotionSample& ms);

// H(c, .) on the annulus between the two circles of E:
//   H(c, z) = z exp((1 - s) L_in(theta) + s L_out(theta)),
// s the log-radial position, L_in/L_out trigonometric interpolants of
// Log(h(c, .)/id) on each circle.
class RadialExtension {
 public:
  RadialExtension(const MotionSample& ms, cplx c);

  cplx operator()(cplx z) const;
  cplx c() const { return c_; }

 private:
  cplx interpolate(const std::vector<cplx>& coef, cplx unit) const;

  cplx c_;
  double log_in_;
  double log_span_;
  int n_;
  std::vector<cplx> coef_in_;   // Fourier coefficients, index k + n/2
  std::vector<cplx> coef_out_;
};

struct ExtendedMotion {
  MotionSample base;
  PolarGrid annulus;
  std::vector<cplx> H;                 // H[ci * annulus.size() + node]
  std::vector<double> measured_k;      // sup |mu_H| per c
  std::vector<double> measured_K;      // (1 + k) / (1 - k)
  std::vector<double> bound_K;         // (1 + |c|) / (1 - |c|), reported only
  double boundary_reproduction_error = 0.0;
};

// Annulus grid strictly between the two circles of the motion.
PolarGrid annulus_grid(const MotionSample& ms, int rings = 12, int angles = 64);

ExtendedMotion extend_motion_radial(const MotionSample& ms, const PolarGrid& grid);

// sup |mu| of H(c, .) over the grid nodes.
double measure_extension_k(const MotionSample& ms, cplx c, const PolarGrid& grid);

// Upper bound (1 + |c|) / (1 - |c|) for the dilatation of an optimal extension.
double motion_dilatation_bound(cplx c);

}  // namespace qcdyn
