#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qcdyn/map_model.hpp"
#include "qcdyn/polar_grid.hpp"

namespace qcdyn {

using PlaneMap = std::function<cplx(cplx)>;

// Four-point central stencil:
//   Dx = (f(z+h) - f(z-h)) / 2h,  Dy = (f(z+ih) - f(z-ih)) / 2ih
//   f_z = (Dx + Dy) / 2,          f_zbar = (Dx - Dy) / 2
Jet wirtinger(const PlaneMap& f, cplx z, double h);

// |mu| values at or below this level are indistinguishable from stencil
// error and count as zero in modulus curves and fits.
inline constexpr double kMuNoiseFloor = 1e-8;

struct BeltramiField {
  PolarGrid grid;
  std::vector<cplx> mu;
  std::vector<std::uint8_t> valid;  // 0 where |f_z| < 10 h or |mu| >= 1
  double fd_step = 0.0;
  std::size_t invalid_count = 0;

  double sup_abs() const;  // over valid nodes
};

// Default step 1e-5 * outer radius. Throws TooManyInvalidNodes when more than
// 1% of the nodes are invalid.
BeltramiField beltrami_field(const MapSpec& m, const PolarGrid& grid,
                             std::optional<double> h = std::nullopt);
BeltramiField beltrami_field(const PlaneMap& f, const PolarGrid& grid, double h);

// Sampled modulus of asymptotic conformality, omega(t) = sup |mu| on |z| <= t.
struct ModulusCurve {
  std::vector<double> t;
  std::vector<double> omega;
  double integral_value = 0.0;  // integral of omega(s)/s over (0, t_max]; +inf when divergent
  bool divergent = false;
  double head_exponent = 0.0;   // beta of omega ~ c t^beta on the smallest decade
  double head_integral = 0.0;   // contribution of (0, t_1]

  // Builds a curve from raw samples: clamps noise to zero, enforces
  // monotonicity by cumulative max, fits the head and integrates.
  static ModulusCurve from_samples(std::vector<double> t, std::vector<double> omega,
                                   double noise_floor = 0.0);

  double t_max() const { return t.back(); }

  // Log-linear interpolation between samples (linear where a sample is zero),
  // power-law head below t_1. Throws ExtrapolationNeeded above t_max.
  double at(double s) const;

  // Integral of at(u)/u over (0, s], exact for the interpolant.
  double integral_to(double s) const;
};

ModulusCurve omega_curve(const BeltramiField& field);

struct TildeOmega {
  double sum = 0.0;
  double bound = 0.0;
  int terms = 0;
};

// sum_{n>=0} omega(C sigma^n t), truncated once a term drops below 1e-12, and
// the majorant omega(Ct) + (1 / -log sigma) * int_0^{Ct} omega(s)/s ds.
TildeOmega tilde_omega(const ModulusCurve& curve, double C, double sigma, double t);

// Beltrami coefficient of G o F from mu_F, mu_G evaluated at F(z), and F_z.
cplx compose_dilatation(cplx mu_F, cplx mu_G_at_Fz, cplx F_z);

// Maximal dilatation (1 + k) / (1 - k).
double dilatation_K(double k);

struct HolderFit {
  double c_prime = 0.0;
  double alpha_fit = 0.0;
  std::optional<double> declared_alpha;
  bool passed = false;  // |alpha_fit - declared| <= 0.1
  std::size_t points = 0;
};

// Least-squares fit of log|mu| against log|z| over the grid.
HolderFit holder_mu_bound_check(const MapSpec& m, const PolarGrid& grid);

}  // namespace qcdyn
