#include "qcdyn/dilatation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qcdyn/error.hpp"
#include "qcdyn/parallel.hpp"

namespace qcdyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDivergenceExponent = 0.01;
constexpr double kTermCutoff = 1e-12;

struct Line {
  double slope;
  double intercept;
};

Line fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) throw Error(ErrorKind::FitFailed, "degenerate abscissae");
  const double slope = (n * sxy - sx * sy) / den;
  return {slope, (sy - slope * sx) / n};
}

// Integral of omega(u)/u over [a, x] for the segment interpolating
// (a, wa) and (b, wb), a <= x <= b.
double segment_integral(double a, double wa, double b, double wb, double x) {
  if (x <= a) return 0.0;
  if (wa > 0.0 && wb > 0.0) {
    const double beta = std::log(wb / wa) / std::log(b / a);
    if (std::abs(beta) < 1e-12) return wa * std::log(x / a);
    return wa * (std::pow(x / a, beta) - 1.0) / beta;
  }
  const double m = (wb - wa) / (b - a);
  return (wa - m * a) * std::log(x / a) + m * (x - a);
}

double segment_value(double a, double wa, double b, double wb, double x) {
  if (wa > 0.0 && wb > 0.0) return wa * std::pow(wb / wa, std::log(x / a) / std::log(b / a));
  return wa + (wb - wa) * (x - a) / (b - a);
}

}  // namespace

Jet wirtinger(const PlaneMap& f, cplx z, double h) {
  const cplx ih{0.0, h};
  const cplx dx = (f(z + h) - f(z - h)) / (2.0 * h);
  const cplx dy = (f(z + ih) - f(z - ih)) / (2.0 * ih);
  return {0.5 * (dx + dy), 0.5 * (dx - dy)};
}

double BeltramiField::sup_abs() const {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (valid[i]) s = std::max(s, std::abs(mu[i]));
  return s;
}

BeltramiField beltrami_field(const PlaneMap& f, const PolarGrid& grid, double h) {
  grid.validate();
  if (!(h > 0.0)) throw Error(ErrorKind::Config, "finite-difference step must be positive");
  BeltramiField out;
  out.grid = grid;
  out.fd_step = h;
  out.mu.assign(grid.size(), cplx{});
  out.valid.assign(grid.size(), 0);
  parallel_for(grid.size(), [&](std::size_t i) {
    const Jet j = wirtinger(f, grid.node(i), h);
    if (std::abs(j.dz) < 10.0 * h) return;
    const cplx mu = j.dzbar / j.dz;
    if (!(std::abs(mu) < 1.0)) return;
    out.mu[i] = mu;
    out.valid[i] = 1;
  });
  out.invalid_count = static_cast<std::size_t>(std::count(out.valid.begin(), out.valid.end(), 0));
  if (out.invalid_count * 100 > grid.size())
    throw Error(ErrorKind::TooManyInvalidNodes,
                std::to_string(out.invalid_count) + " of " + std::to_string(grid.size()) +
                    " nodes have degenerate f_z or |mu| >= 1");
  return out;
}

BeltramiField beltrami_field(const MapSpec& m, const PolarGrid& grid, std::optional<double> h) {
  grid.validate();
  const double step = h.value_or(1e-5 * grid.outer_radius());
  if (std::abs(grid.center) + grid.outer_radius() + step > m.validity_radius())
    throw Error(ErrorKind::Domain, "grid extends past the validity radius");
  return beltrami_field(PlaneMap([&m](cplx z) { return evaluate(m, z); }), grid, step);
}

ModulusCurve ModulusCurve::from_samples(std::vector<double> t, std::vector<double> omega,
                                        double noise_floor) {
  if (t.size() < 2 || t.size() != omega.size())
    throw Error(ErrorKind::Config, "modulus curve needs at least two (t, omega) samples");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || (i > 0 && !(t[i] > t[i - 1])))
      throw Error(ErrorKind::Config, "thresholds must be positive and increasing");
    if (!(omega[i] >= 0.0)) throw Error(ErrorKind::Config, "omega values must be nonnegative");
  }

  ModulusCurve c;
  c.t = std::move(t);
  c.omega = std::move(omega);
  double running = 0.0;
  for (double& w : c.omega) {
    if (w <= noise_floor) w = 0.0;
    running = std::max(running, w);
    w = running;
  }

  const double t1 = c.t.front();
  const double w1 = c.omega.front();
  if (w1 == 0.0) {
    c.head_exponent = kInf;
    c.head_integral = 0.0;
  } else {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < c.t.size() && (c.t[i] <= 10.0 * t1 || lx.size() < 2); ++i) {
      lx.push_back(std::log(c.t[i]));
      ly.push_back(std::log(c.omega[i]));
    }
    c.head_exponent = fit_line(lx, ly).slope;
    if (c.head_exponent <= kDivergenceExponent) {
      c.divergent = true;
      c.head_integral = kInf;
    } else {
      c.head_integral = w1 / c.head_exponent;
    }
  }

  double body = 0.0;
  for (std::size_t i = 0; i + 1 < c.t.size(); ++i)
    body += 0.5 * (c.omega[i] + c.omega[i + 1]) * std::log(c.t[i + 1] / c.t[i]);
  c.integral_value = c.divergent ? kInf : c.head_integral + body;
  return c;
}

double ModulusCurve::at(double s) const {
  if (!(s > 0.0)) return 0.0;
  if (s > t_max() * (1.0 + 1e-12))
    throw Error(ErrorKind::ExtrapolationNeeded, "argument beyond sampled range of omega");
  const double t1 = t.front();
  if (s <= t1) {
    if (omega.front() == 0.0) return 0.0;
    return omega.front() * std::pow(s / t1, std::max(head_exponent, 0.0));
  }
  const auto it = std::lower_bound(t.begin(), t.end(), s);
  if (it == t.end()) return omega.back();
  const auto i = static_cast<std::size_t>(it - t.begin());
  return segment_value(t[i - 1], omega[i - 1], t[i], omega[i], s);
}

double ModulusCurve::integral_to(double s) const {
  if (!(s > 0.0)) return 0.0;
  if (s > t_max() * (1.0 + 1e-12))
    throw Error(ErrorKind::ExtrapolationNeeded, "argument beyond sampled range of omega");
  if (divergent) return kInf;
  const double t1 = t.front();
  if (s <= t1) return head_integral == 0.0 ? 0.0 : at(s) / head_exponent;
  double acc = head_integral;
  for (std::size_t i = 0; i + 1 < t.size() && t[i] < s; ++i)
    acc += segment_integral(t[i], omega[i], t[i + 1], omega[i + 1], std::min(s, t[i + 1]));
  return acc;
}

ModulusCurve omega_curve(const BeltramiField& field) {
  const auto& grid = field.grid;
  std::vector<double> ring_sup(grid.radii.size(), 0.0);
  for (std::size_t i = 0; i < field.mu.size(); ++i)
    if (field.valid[i])
      ring_sup[grid.ring_of(i)] = std::max(ring_sup[grid.ring_of(i)], std::abs(field.mu[i]));
  // nested disks: the cumulative max in from_samples turns ring sups into disk sups
  return ModulusCurve::from_samples(grid.radii, std::move(ring_sup), kMuNoiseFloor);
}

TildeOmega tilde_omega(const ModulusCurve& curve, double C, double sigma, double t) {
  if (!(C > 0.0) || !(sigma > 0.0 && sigma < 1.0) || !(t > 0.0))
    throw Error(ErrorKind::OutOfRange, "need C > 0, 0 < sigma < 1, t > 0");
  const double ct = C * t;
  if (ct > curve.t_max() * (1.0 + 1e-12))
    throw Error(ErrorKind::ExtrapolationNeeded, "C t exceeds the sampled range of omega");
  TildeOmega out;
  if (curve.divergent) {
    out.sum = kInf;
    out.bound = kInf;
    return out;
  }
  double s = ct;
  for (int n = 0; n < 1'000'000; ++n) {
    const double term = curve.at(s);
    if (term < kTermCutoff) break;
    out.sum += term;
    out.terms = n + 1;
    s *= sigma;
  }
  out.bound = curve.at(ct) + curve.integral_to(ct) / -std::log(sigma);
  return out;
}

cplx compose_dilatation(cplx mu_F, cplx mu_G_at_Fz, cplx F_z) {
  if (!(std::abs(mu_F) < 1.0) || !(std::abs(mu_G_at_Fz) < 1.0))
    throw Error(ErrorKind::DegenerateInput, "Beltrami coefficients must lie in the unit disk");
  if (F_z == cplx{0.0, 0.0}) throw Error(ErrorKind::DegenerateInput, "F_z vanishes");
  const cplx gamma = std::conj(F_z) / F_z;
  const cplx num = mu_F + gamma * mu_G_at_Fz;
  const cplx den = 1.0 + std::conj(mu_F) * gamma * mu_G_at_Fz;
  if (std::abs(den) < 1e-12) throw Error(ErrorKind::DegenerateInput, "denominator vanishes");
  return num / den;
}

double dilatation_K(double k) {
  if (!(k >= 0.0 && k < 1.0)) throw Error(ErrorKind::OutOfRange, "k must lie in [0, 1)");
  return (1.0 + k) / (1.0 - k);
}

HolderFit holder_mu_bound_check(const MapSpec& m, const PolarGrid& grid) {
  const BeltramiField field = beltrami_field(m, grid);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < field.mu.size(); ++i) {
    if (!field.valid[i]) continue;
    const double a = std::abs(field.mu[i]);
    if (a <= kMuNoiseFloor) continue;
    lx.push_back(std::log(std::abs(grid.node(i) - grid.center)));
    ly.push_back(std::log(a));
  }
  if (lx.size() < 3) throw Error(ErrorKind::FitFailed, "|mu| is below the noise floor everywhere");
  const Line line = fit_line(lx, ly);
  HolderFit out;
  out.alpha_fit = line.slope;
  out.c_prime = std::exp(line.intercept);
  out.points = lx.size();
  if (const auto* p = std::get_if<Perturbed>(&m.node().v)) out.declared_alpha = p->alpha;
  out.passed = out.declared_alpha && std::abs(out.alpha_fit - *out.declared_alpha) <= 0.1;
  return out;
}

}  // namespace qcdyn
