#include "qcdyn/motion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qcdyn/boettcher.hpp"
#include "qcdyn/dilatation.hpp"
#include "qcdyn/error.hpp"
#include "qcdyn/koenigs.hpp"
#include "qcdyn/parallel.hpp"

namespace qcdyn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool on_outer(cplx z, double inner, double outer) {
  const double rho = std::abs(z);
  return std::abs(rho - outer) < std::abs(rho - inner);
}

// Coefficients c_k, k = -N/2 .. N/2, of the trigonometric interpolant of
// equally spaced samples (N even; the Nyquist pair shares c_{N/2}).
std::vector<cplx> fourier_coefficients(const std::vector<cplx>& samples) {
  const int n = static_cast<int>(samples.size());
  std::vector<cplx> coef(static_cast<std::size_t>(n) + 1);
  for (int k = -n / 2; k <= n / 2; ++k) {
    cplx acc{0.0, 0.0};
    for (int m = 0; m < n; ++m)
      acc += samples[static_cast<std::size_t>(m)] * std::polar(1.0, -kTwoPi * k * m / n);
    coef[static_cast<std::size_t>(k + n / 2)] = acc / static_cast<double>(n);
  }
  return coef;
}

}  // namespace

std::string_view to_string(MotionKind k) noexcept {
  switch (k) {
    case MotionKind::Koenig: return "koenig";
    case MotionKind::Boettcher: return "boettcher";
    case MotionKind::Custom: return "custom";
  }
  return "unknown";
}

std::vector<cplx> default_c_samples() {
  std::vector<cplx> cs{cplx{0.0, 0.0}};
  for (double rho : {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 0.9})
    for (int a = 0; a < 8; ++a) cs.push_back(std::polar(rho, kTwoPi * a / 8));
  return cs;
}

MotionSample make_motion(MotionFn fn, double inner_radius, double outer_radius, double r,
                         int per_circle, std::vector<cplx> c_samples, MotionKind kind) {
  if (per_circle < 8 || per_circle % 2 != 0)
    throw Error(ErrorKind::Config, "motion needs an even number (>= 8) of points per circle");
  if (!(inner_radius > 0.0) || !(outer_radius > inner_radius))
    throw Error(ErrorKind::Config, "motion circles need 0 < inner < outer");
  for (cplx c : c_samples)
    if (!(std::abs(c) < 1.0)) throw Error(ErrorKind::OutOfRange, "parameters must lie in the unit disk");

  MotionSample ms;
  ms.kind = kind;
  ms.r = r;
  ms.inner_radius = inner_radius;
  ms.outer_radius = outer_radius;
  ms.per_circle = per_circle;
  ms.c_samples = std::move(c_samples);
  ms.motion = std::move(fn);
  for (double rho : {inner_radius, outer_radius})
    for (int a = 0; a < per_circle; ++a) ms.e_points.push_back(std::polar(rho, kTwoPi * a / per_circle));

  const std::size_t e = ms.e_size();
  ms.values.assign(ms.c_samples.size() * e, cplx{});
  parallel_for(ms.values.size(), [&](std::size_t idx) {
    ms.values[idx] = ms.motion(ms.c_samples[idx / e], ms.e_points[idx % e]);
  });
  return ms;
}

MotionSample build_motion_koenig(const MapSpec& f, double r, double delta, int samples,
                                 std::vector<cplx> c_samples) {
  const FixedPointReport rep = classify_fixed_point(f, EvalBudget{});
  if (rep.cls != FixedPointClass::Attracting)
    throw Error(ErrorKind::WrongClass, "Koenigs motion needs an attracting fixed point");
  if (!(r > 0.0) || !(r <= delta)) throw Error(ErrorKind::Config, "need 0 < r <= delta");
  if (delta > f.validity_radius()) throw Error(ErrorKind::Domain, "delta exceeds validity radius");
  for (int i = 1; i <= 8; ++i)
    for (int a = 0; a < 64; ++a) {
      const cplx z = std::polar(delta * i / 8, kTwoPi * a / 64);
      if (!(std::abs(evaluate(f, z)) < std::abs(z)))
        throw Error(ErrorKind::Domain, "|f(z)| < |z| fails on the closed delta-disk");
    }

  const cplx lambda = rep.multiplier;
  const double inner = std::abs(lambda) * r;
  MotionFn fn = [f, lambda, r, delta, inner](cplx c, cplx z) -> cplx {
    if (on_outer(z, inner, r) || c == cplx{0.0, 0.0}) return z;
    return (r / (c * delta)) * evaluate(f, c * delta * z / (r * lambda));
  };
  return make_motion(std::move(fn), inner, r, r, samples, std::move(c_samples), MotionKind::Koenig);
}

MotionSample build_motion_boettcher(const MapSpec& g, double r, int samples,
                                    std::vector<cplx> c_samples) {
  const NormalizedMap norm = normalize_leading(g);
  const int n = norm.n;
  if (!(r > 0.0) || r > std::pow(0.5, static_cast<double>(n) / (n - 1)))
    throw Error(ErrorKind::Config, "need 0 < r <= (1/2)^(n/(n-1))");
  const double rho = std::exp(std::log(r) / n);
  const MapSpec gt = norm.g_tilde;
  MotionFn fn = [gt, n, r, rho](cplx c, cplx z) -> cplx {
    if (!on_outer(z, r, rho) || c == cplx{0.0, 0.0}) return z;
    return (rho / c) * boettcher_lift_h(gt, n, c * z / rho);
  };
  MotionSample ms =
      make_motion(std::move(fn), r, rho, r, samples, std::move(c_samples), MotionKind::Boettcher);
  for (std::size_t ci = 0; ci < ms.c_samples.size(); ++ci)
    for (std::size_t zi = ms.per_circle; zi < ms.e_size(); ++zi)
      if (!(std::abs(ms.value(ci, zi)) > r)) {
        std::ostringstream os;
        os << "|h(c, z)| = " << std::abs(ms.value(ci, zi)) << " <= r at c = " << ms.c_samples[ci];
        throw Error(ErrorKind::NonCrossingViolated, os.str());
      }
  return ms;
}

MotionAxiomReport check_motion_axioms(const MotionSample& ms) {
  MotionAxiomReport rep;
  const std::size_t e = ms.e_size();

  for (std::size_t zi = 0; zi < e; ++zi)
    if (ms.motion(cplx{0.0, 0.0}, ms.e_points[zi]) != ms.e_points[zi]) rep.identity_at_zero = false;
  for (std::size_t ci = 0; ci < ms.c_samples.size(); ++ci)
    if (ms.c_samples[ci] == cplx{0.0, 0.0})
      for (std::size_t zi = 0; zi < e; ++zi)
        if (ms.value(ci, zi) != ms.e_points[zi]) rep.identity_at_zero = false;
  if (!rep.identity_at_zero) rep.failures.emplace_back("h(0, z) != z");

  std::vector<double> sep(ms.c_samples.size());
  std::vector<double> margin(ms.c_samples.size());
  parallel_for(ms.c_samples.size(), [&](std::size_t ci) {
    double best = std::numeric_limits<double>::infinity();
    double inner_max = 0.0;
    double outer_min = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < e; ++a) {
      const cplx va = ms.value(ci, a);
      for (std::size_t b = a + 1; b < e; ++b) best = std::min(best, std::abs(va - ms.value(ci, b)));
      if (ms.is_inner(a))
        inner_max = std::max(inner_max, std::abs(va));
      else
        outer_min = std::min(outer_min, std::abs(va));
    }
    sep[ci] = best;
    margin[ci] = outer_min - inner_max;
  });
  rep.min_separation = *std::min_element(sep.begin(), sep.end());
  rep.crossing_margin = *std::min_element(margin.begin(), margin.end());
  rep.injective = rep.min_separation > 0.0;
  rep.non_crossing = rep.crossing_margin > 0.0;
  if (!rep.injective) rep.failures.emplace_back("two points of E collide");
  if (!rep.non_crossing) rep.failures.emplace_back("images of the two circles cross");

  std::vector<double> cr(ms.values.size(), 0.0);
  parallel_for(cr.size(), [&](std::size_t idx) {
    const cplx c = ms.c_samples[idx / e];
    if (!(std::abs(c) + kCrStep < 1.0)) return;
    const cplx z = ms.e_points[idx % e];
    const cplx ih{0.0, kCrStep};
    const cplx dx = (ms.motion(c + kCrStep, z) - ms.motion(c - kCrStep, z)) / (2.0 * kCrStep);
    const cplx dy = (ms.motion(c + ih, z) - ms.motion(c - ih, z)) / (2.0 * kCrStep);
    cr[idx] = 0.5 * std::abs(dx + cplx{0.0, 1.0} * dy);
  });
  rep.max_cr_residual = *std::max_element(cr.begin(), cr.end());
  rep.holomorphic = rep.max_cr_residual < kCrThreshold;
  if (!rep.holomorphic) {
    std::ostringstream os;
    os << "Cauchy-Riemann residual " << rep.max_cr_residual << " >= " << kCrThreshold;
    rep.failures.push_back(os.str());
  }
  return rep;
}

RadialExtension::RadialExtension(const MotionSample& ms, cplx c)
    : c_(c),
      log_in_(std::log(ms.inner_radius)),
      log_span_(std::log(ms.outer_radius / ms.inner_radius)),
      n_(ms.per_circle) {
  // Log(h/z) along each circle with the argument unwrapped from sample to
  // sample; h/z must not wind around 0.
  auto log_ratio = [&](int side) {
    std::vector<cplx> out(static_cast<std::size_t>(n_));
    cplx prev{};
    double arg = 0.0;
    for (int m = 0; m <= n_; ++m) {
      const cplx z = ms.e_points[static_cast<std::size_t>(side * n_ + m % n_)];
      const cplx q = ms.motion(c, z) / z;
      if (!(std::abs(q) > 0.0) || !std::isfinite(std::abs(q)))
        throw Error(ErrorKind::BranchFailure, "h(c, z) / z is zero or not finite");
      if (m > 0) {
        const double step = std::arg(q / prev);
        if (std::abs(step) > std::numbers::pi / 2)
          throw Error(ErrorKind::BranchFailure, "argument of h/z jumps between samples; refine the circle");
        arg += step;
      } else {
        arg = std::arg(q);
      }
      if (m < n_) out[static_cast<std::size_t>(m)] = {std::log(std::abs(q)), arg};
      else if (std::abs(arg - out[0].imag()) > std::numbers::pi) {
        std::ostringstream os;
        os << "h/z winds around 0 at c = " << c;
        throw Error(ErrorKind::BranchFailure, os.str());
      }
      prev = q;
    }
    return out;
  };
  const std::vector<cplx> l_in = log_ratio(0);
  const std::vector<cplx> l_out = log_ratio(1);
  coef_in_ = fourier_coefficients(l_in);
  coef_out_ = fourier_coefficients(l_out);
}

cplx RadialExtension::interpolate(const std::vector<cplx>& coef, cplx unit) const {
  const int half = n_ / 2;
  cplx acc = coef[static_cast<std::size_t>(half)];
  cplx p{1.0, 0.0};
  for (int k = 1; k < half; ++k) {
    p *= unit;
    acc += coef[static_cast<std::size_t>(half + k)] * p + coef[static_cast<std::size_t>(half - k)] * std::conj(p);
  }
  p *= unit;
  return acc + coef[static_cast<std::size_t>(2 * half)] * p.real();
}

cplx RadialExtension::operator()(cplx z) const {
  const double rho = std::abs(z);
  if (rho == 0.0) return z;
  const cplx unit = z / rho;
  const double s = (std::log(rho) - log_in_) / log_span_;
  const cplx l = (1.0 - s) * interpolate(coef_in_, unit) + s * interpolate(coef_out_, unit);
  return z * std::exp(l);
}

PolarGrid annulus_grid(const MotionSample& ms, int rings, int angles) {
  PolarGrid g;
  g.angles_per_ring = angles;
  const double lo = std::log(ms.inner_radius);
  const double hi = std::log(ms.outer_radius);
  for (int i = 0; i < rings; ++i) g.radii.push_back(std::exp(lo + (hi - lo) * (i + 0.5) / rings));
  g.validate();
  return g;
}

double measure_extension_k(const MotionSample& ms, cplx c, const PolarGrid& grid) {
  const RadialExtension ext(ms, c);
  const PlaneMap fn = [&ext](cplx z) { return ext(z); };
  const double h = 1e-5 * ms.outer_radius;
  std::vector<double> k(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t i) {
    const Jet j = wirtinger(fn, grid.node(i), h);
    k[i] = std::abs(j.dzbar) / std::abs(j.dz);
  });
  return *std::max_element(k.begin(), k.end());
}

ExtendedMotion extend_motion_radial(const MotionSample& ms, const PolarGrid& grid) {
  grid.validate();
  ExtendedMotion out;
  out.base = ms;
  out.annulus = grid;
  const std::size_t nodes = grid.size();
  out.H.assign(ms.c_samples.size() * nodes, cplx{});
  for (std::size_t ci = 0; ci < ms.c_samples.size(); ++ci) {
    const cplx c = ms.c_samples[ci];
    const RadialExtension ext(ms, c);
    parallel_for(nodes, [&](std::size_t i) { out.H[ci * nodes + i] = ext(grid.node(i)); });
    for (std::size_t zi = 0; zi < ms.e_size(); ++zi)
      out.boundary_reproduction_error = std::max(
          out.boundary_reproduction_error, std::abs(ext(ms.e_points[zi]) - ms.value(ci, zi)));
    const double k = measure_extension_k(ms, c, grid);
    out.measured_k.push_back(k);
    out.measured_K.push_back(k < 1.0 ? (1.0 + k) / (1.0 - k) : std::numeric_limits<double>::infinity());
    out.bound_K.push_back(motion_dilatation_bound(c));
  }
  return out;
}

double motion_dilatation_bound(cplx c) {
  const double a = std::abs(c);
  if (!(a < 1.0)) throw Error(ErrorKind::OutOfRange, "|c| must be < 1");
  return (1.0 + a) / (1.0 - a);
}

}  // namespace qcdyn
