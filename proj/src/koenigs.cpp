#include "qcdyn/koenigs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qcdyn/error.hpp"
#include "qcdyn/parallel.hpp"

namespace qcdyn {

namespace {

using Step = std::function<cplx(cplx)>;

constexpr int kCircleSamples = 64;

cplx circle_mean(const std::function<cplx(cplx)>& fn, double rho) {
  cplx acc{0.0, 0.0};
  for (int a = 0; a < kCircleSamples; ++a)
    acc += fn(std::polar(rho, 2.0 * std::numbers::pi * a / kCircleSamples));
  return acc / static_cast<double>(kCircleSamples);
}

double probe_radius(const MapSpec& m) { return std::min(1e-3, 0.1 * m.validity_radius()); }

// Estimated exponent n in |g(z)| ~ |a_n| |z|^n from the mean of log|g| on two
// concentric circles a decade apart.
double degree_estimate(const MapSpec& g) {
  const double t1 = probe_radius(g);
  const double t2 = t1 / 10.0;
  auto mean_log = [&g](double t) {
    double acc = 0.0;
    for (int a = 0; a < kCircleSamples; ++a)
      acc += std::log(std::abs(evaluate(g, std::polar(t, 2.0 * std::numbers::pi * a / kCircleSamples))));
    return acc / kCircleSamples;
  };
  return (mean_log(t1) - mean_log(t2)) / std::log(t1 / t2);
}

Step forward_step(const MapSpec& m) {
  const double radius = m.validity_radius();
  return [m, radius](cplx w) {
    const cplx next = evaluate(m, w);
    if (!(std::abs(next) <= radius)) throw Error(ErrorKind::OrbitEscape, "orbit left the domain");
    return next;
  };
}

Step inverse_step(const MapSpec& m, cplx lambda, const EvalBudget& budget) {
  return [m, lambda, budget](cplx w) { return local_inverse(m, w, w / lambda, budget); };
}

struct NodeValue {
  cplx psi;
  int depth;
};

// psi_k = step^k(z) / mu^k until two successive values agree to tolerance.
NodeValue linearize_point(const Step& step, cplx mu, cplx z, const EvalBudget& budget) {
  if (z == cplx{0.0, 0.0}) return {z, 0};
  cplx w = z;
  cplx psi = z;
  cplx mu_pow{1.0, 0.0};
  double delta = 0.0;
  for (int k = 1; k <= budget.max_iterations; ++k) {
    w = step(w);
    mu_pow *= mu;
    const cplx next = w / mu_pow;
    delta = std::abs(next - psi);
    psi = next;
    if (delta < budget.tolerance) return {psi, k};
  }
  std::ostringstream os;
  os << "depth cap " << budget.max_iterations << " reached at z = " << z << ", last delta "
     << delta;
  throw Error(ErrorKind::NoConvergence, os.str());
}

ControlReport control_scan(const Step& step, cplx mu, double delta, int n_max, int samples) {
  if (!(delta > 0.0) || n_max < 0 || samples < 1)
    throw Error(ErrorKind::Config, "control scan needs delta > 0, n_max >= 0, samples >= 1");
  ControlReport rep;
  rep.delta = delta;
  rep.max_n_checked = n_max;
  const int angles = std::max(8, samples);
  for (int i = 1; i <= samples; ++i) {
    const double rho = delta * i / samples;
    for (int a = 0; a < angles; ++a) {
      const cplx z = std::polar(rho, 2.0 * std::numbers::pi * a / angles);
      cplx w = z;
      cplx lin = z;
      for (int n = 1; n <= n_max; ++n) {
        w = step(w);
        lin = mu * lin;
        const double ratio = std::abs(w) / std::abs(lin);
        if (!std::isfinite(ratio) || ratio < 1e-12 || ratio > 1e12) {
          rep.violated = true;
          rep.ratio_min = std::min(rep.ratio_min, std::isfinite(ratio) ? ratio : 0.0);
          break;
        }
        rep.ratio_min = std::min(rep.ratio_min, ratio);
        rep.ratio_max = std::max(rep.ratio_max, ratio);
      }
    }
  }
  rep.c_hat = rep.violated ? std::numeric_limits<double>::infinity()
                           : std::max(rep.ratio_max, 1.0 / rep.ratio_min);
  return rep;
}

void require_class(const FixedPointReport& rep, FixedPointClass want) {
  if (rep.cls == FixedPointClass::Neutral)
    throw Error(ErrorKind::NeutralFixedPoint, "neutral fixed points are not linearized");
  if (rep.cls != want)
    throw Error(ErrorKind::WrongClass, std::string("expected ") + std::string(to_string(want)) +
                                           " fixed point, found " +
                                           std::string(to_string(rep.cls)));
}


CoordinateGrid linearize_nodes(const MapSpec& m, std::vector<cplx> nodes, const Step& step, cplx mu,
                               const FixedPointReport& rep, const EvalBudget& budget) {
  CoordinateGrid out;
  out.nodes = std::move(nodes);
  out.psi.assign(out.nodes.size(), cplx{});
  out.depth.assign(out.nodes.size(), 0);
  out.residual.assign(out.nodes.size(), 0.0);
  out.kind = CoordinateKind::Linearizer;
  out.multiplier = rep.multiplier;
  out.cls = rep.cls;
  out.tolerance = budget.tolerance;
  parallel_for(out.nodes.size(), [&](std::size_t i) {
    const cplx z = out.nodes[i];
    const NodeValue v = linearize_point(step, mu, z, budget);
    out.psi[i] = v.psi;
    out.depth[i] = v.depth;
    const cplx fz = evaluate(m, z);
    const NodeValue image = linearize_point(step, mu, fz, budget);
    out.residual[i] = std::abs(image.psi - rep.multiplier * v.psi);
  });
  out.normalization_error = innermost_normalization(out.nodes, out.psi);
  return out;
}

double max_modulus(std::span<const cplx> pts) {
  double r = 0.0;
  for (cplx z : pts) r = std::max(r, std::abs(z));
  return r;
}

CoordinateGrid forward_impl(const MapSpec& m, std::vector<cplx> nodes, const EvalBudget& budget) {
  budget.validate();
  const FixedPointReport rep = classify_fixed_point(m, budget);
  require_class(rep, FixedPointClass::Attracting);
  const Step step = forward_step(m);
  const ControlReport control = control_scan(step, rep.multiplier, max_modulus(nodes),
                                             std::min(60, budget.max_iterations), 12);
  if (control.violated)
    throw Error(ErrorKind::ControlViolated, "orbit ratios degenerate on the grid disk");
  return linearize_nodes(m, std::move(nodes), step, rep.multiplier, rep, budget);
}

CoordinateGrid backward_impl(const MapSpec& m, std::vector<cplx> nodes, const EvalBudget& budget) {
  budget.validate();
  const FixedPointReport rep = classify_fixed_point(m, budget);
  require_class(rep, FixedPointClass::Repelling);
  const cplx mu = 1.0 / rep.multiplier;
  const Step step = inverse_step(m, rep.multiplier, budget);
  const ControlReport control =
      control_scan(step, mu, max_modulus(nodes), std::min(60, budget.max_iterations), 12);
  if (control.violated)
    throw Error(ErrorKind::ControlViolated, "inverse orbit ratios degenerate on the grid disk");
  return linearize_nodes(m, std::move(nodes), step, mu, rep, budget);
}

}  // namespace

std::string_view to_string(FixedPointClass c) noexcept {
  switch (c) {
    case FixedPointClass::Attracting: return "attracting";
    case FixedPointClass::Repelling: return "repelling";
    case FixedPointClass::Superattracting: return "superattracting";
    case FixedPointClass::Neutral: return "neutral";
  }
  return "unknown";
}

std::string_view to_string(EstimationMethod m) noexcept {
  switch (m) {
    case EstimationMethod::Symbolic: return "symbolic";
    case EstimationMethod::FiniteDifference: return "finite-difference";
    case EstimationMethod::OrbitRatio: return "orbit-ratio";
  }
  return "unknown";
}

cplx leading_coefficient(const MapSpec& g, int n) {
  const double rho = std::min(1e-2, 0.1 * g.validity_radius());
  return circle_mean(
      [&](cplx z) {
        cplx zn{1.0, 0.0};
        for (int i = 0; i < n; ++i) zn *= z;
        return evaluate(g, z) / zn;
      },
      rho);
}

FixedPointReport classify_fixed_point(const MapSpec& m, const EvalBudget& budget) {
  budget.validate();
  if (evaluate(m, cplx{0.0, 0.0}) != cplx{0.0, 0.0})
    throw Error(ErrorKind::Domain, "map does not fix 0");

  FixedPointReport rep;
  if (m.is_analytic()) {
    rep.multiplier = derivative(m, cplx{0.0, 0.0});
    rep.method = EstimationMethod::Symbolic;
  } else {
    // f(z)/z averaged over shrinking circles; the average removes the
    // angular dependence of non-holomorphic corrections.
    const double t0 = probe_radius(m);
    for (double t = t0; t >= t0 * 1e-3 * (1.0 - 1e-9); t /= 10.0)
      rep.multiplier = circle_mean([&m](cplx z) { return evaluate(m, z) / z; }, t);
    rep.method = EstimationMethod::OrbitRatio;
  }

  const double mod = std::abs(rep.multiplier);
  if (mod < 1e-10) {
    const double n_est = degree_estimate(m);
    const double n_round = std::round(n_est);
    if (n_round >= 2.0 && std::abs(n_est - n_round) < 0.25) {
      rep.multiplier = {0.0, 0.0};
      rep.cls = FixedPointClass::Superattracting;
      rep.local_degree = static_cast<int>(n_round);
      rep.leading_coefficient = leading_coefficient(m, rep.local_degree);
      return rep;
    }
  }
  if (std::abs(mod - 1.0) <= 1e-9) {
    rep.cls = FixedPointClass::Neutral;
    rep.inconclusive = true;
  } else if (mod < 1.0) {
    rep.cls = FixedPointClass::Attracting;
  } else {
    rep.cls = FixedPointClass::Repelling;
  }
  return rep;
}

double CoordinateGrid::max_residual() const {
  double r = 0.0;
  for (double x : residual) r = std::max(r, x);
  return r;
}

int CoordinateGrid::max_depth() const {
  int d = 0;
  for (int x : depth) d = std::max(d, std::abs(x));
  return d;
}

ControlReport control_condition(const MapSpec& m, double delta, int n_max, int samples) {
  const FixedPointReport rep = classify_fixed_point(m, EvalBudget{});
  require_class(rep, FixedPointClass::Attracting);
  if (delta > m.validity_radius()) throw Error(ErrorKind::Domain, "delta exceeds validity radius");
  return control_scan(forward_step(m), rep.multiplier, delta, n_max, samples);
}

CoordinateGrid koenigs_forward(const MapSpec& m, const PolarGrid& grid, const EvalBudget& budget) {
  grid.validate();
  CoordinateGrid out = forward_impl(m, grid.nodes(), budget);
  out.grid = grid;
  return out;
}

CoordinateGrid koenigs_forward(const MapSpec& m, std::span<const cplx> points,
                               const EvalBudget& budget) {
  return forward_impl(m, std::vector<cplx>(points.begin(), points.end()), budget);
}

CoordinateGrid koenigs_backward(const MapSpec& m, const PolarGrid& grid, const EvalBudget& budget) {
  grid.validate();
  CoordinateGrid out = backward_impl(m, grid.nodes(), budget);
  out.grid = grid;
  return out;
}

CoordinateGrid koenigs_backward(const MapSpec& m, std::span<const cplx> points,
                                const EvalBudget& budget) {
  return backward_impl(m, std::vector<cplx>(points.begin(), points.end()), budget);
}

KoenigsLift::KoenigsLift(MapSpec m, std::function<cplx(cplx)> boundary_map, double r, int k,
                         EvalBudget budget)
    : m_(std::move(m)), boundary_(std::move(boundary_map)), r_(r), k_(k), budget_(budget) {
  budget_.validate();
  if (!(r_ > 0.0) || k_ < 0) throw Error(ErrorKind::Config, "lift needs r > 0 and k >= 0");
  const FixedPointReport rep = classify_fixed_point(m_, budget_);
  require_class(rep, FixedPointClass::Attracting);
  lambda_ = rep.multiplier;
  if (outer_radius() > m_.validity_radius())
    throw Error(ErrorKind::Domain, "lifted disk exceeds validity radius");
}

double KoenigsLift::outer_radius() const { return r_ * std::pow(std::abs(lambda_), -k_); }

int KoenigsLift::annulus_index(cplx z) const {
  const double rho = std::abs(z);
  if (rho > outer_radius() * (1.0 + 1e-12))
    throw Error(ErrorKind::Domain, "point outside the lifted disk");
  const int j = static_cast<int>(std::floor(std::log(rho / r_) / std::log(std::abs(lambda_))));
  return std::max(j, -k_);
}

cplx KoenigsLift::evaluate_in(cplx z, int j) const {
  cplx lam_pow{1.0, 0.0};
  for (int i = 0; i < std::abs(j); ++i) lam_pow *= lambda_;
  if (j >= 0) {
    cplx v = boundary_(z / lam_pow);
    for (int i = 0; i < j; ++i) v = evaluate(m_, v);
    return v;
  }
  cplx v = boundary_(z * lam_pow);
  for (int i = 0; i < -j; ++i) v = local_inverse(m_, v, v / lambda_, budget_);
  return v;
}

cplx KoenigsLift::operator()(cplx z) const {
  if (z == cplx{0.0, 0.0}) return z;
  return evaluate_in(z, annulus_index(z));
}

CoordinateGrid annulus_lift_phi(const MapSpec& m, const std::function<cplx(cplx)>& boundary_map,
                                double r, int k, const EvalBudget& budget,
                                const LiftLayout& layout) {
  if (layout.rings_per_annulus < 1 || layout.inner_depth < 0)
    throw Error(ErrorKind::Config, "lift layout needs rings_per_annulus >= 1, inner_depth >= 0");
  const KoenigsLift lift(m, boundary_map, r, k, budget);
  const double lam = std::abs(lift.multiplier());

  PolarGrid grid;
  grid.angles_per_ring = layout.angles;
  for (int j = layout.inner_depth; j >= -k; --j)
    for (int i = layout.rings_per_annulus - 1; i >= 0; --i)
      grid.radii.push_back(r * std::pow(lam, j + (i + 0.5) / layout.rings_per_annulus));
  grid.validate();

  CoordinateGrid out;
  out.grid = grid;
  out.nodes = grid.nodes();
  out.kind = CoordinateKind::Conjugacy;
  out.multiplier = lift.multiplier();
  out.cls = FixedPointClass::Attracting;
  out.tolerance = budget.tolerance;
  out.psi.assign(out.nodes.size(), cplx{});
  out.depth.assign(out.nodes.size(), 0);
  out.residual.assign(out.nodes.size(), 0.0);
  parallel_for(out.nodes.size(), [&](std::size_t i) {
    const cplx z = out.nodes[i];
    const int j = lift.annulus_index(z);
    out.psi[i] = lift.evaluate_in(z, j);
    out.depth[i] = j;
    out.residual[i] = std::abs(evaluate(m, out.psi[i]) - lift(lift.multiplier() * z));
  });
  out.normalization_error = innermost_normalization(out.nodes, out.psi);

  // shared circles between A_{r,j} and A_{r,j+1}
  const int circles = layout.inner_depth + k;
  std::vector<double> mismatch(static_cast<std::size_t>(circles) * layout.angles, 0.0);
  parallel_for(mismatch.size(), [&](std::size_t idx) {
    const int j = -k + static_cast<int>(idx / static_cast<std::size_t>(layout.angles));
    const auto a = static_cast<int>(idx % static_cast<std::size_t>(layout.angles));
    const cplx z = std::polar(r * std::pow(lam, j + 1), 2.0 * std::numbers::pi * a / layout.angles);
    mismatch[idx] = std::abs(lift.evaluate_in(z, j) - lift.evaluate_in(z, j + 1));
  });
  for (double x : mismatch) out.boundary_mismatch = std::max(out.boundary_mismatch, x);
  if (out.boundary_mismatch > layout.mismatch_tolerance) {
    std::ostringstream os;
    os << "boundary mismatch " << out.boundary_mismatch << " exceeds "
       << layout.mismatch_tolerance;
    throw Error(ErrorKind::ContinuityBreach, os.str());
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> match_nodes(std::span<const cplx> a,
                                                             std::span<const cplx> b) {
  std::vector<std::size_t> order(b.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return std::abs(b[x]) < std::abs(b[y]); });
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ra = std::abs(a[i]);
    const double eps = 1e-12 * std::max(ra, 1e-300);
    auto lo = std::lower_bound(order.begin(), order.end(), ra - eps,
                               [&](std::size_t x, double v) { return std::abs(b[x]) < v; });
    for (auto it = lo; it != order.end() && std::abs(b[*it]) <= ra + eps; ++it) {
      if (std::abs(b[*it] - a[i]) <= eps) {
        pairs.emplace_back(i, *it);
        break;
      }
    }
  }
  return pairs;
}

CoordinateGrid invert_conjugacy(const CoordinateGrid& phi) {
  CoordinateGrid out = phi;
  out.grid = PolarGrid{};
  out.nodes = phi.psi;
  out.psi = phi.nodes;
  out.kind = CoordinateKind::Linearizer;
  return out;
}

double innermost_normalization(std::span<const cplx> nodes, std::span<const cplx> psi) {
  double rmin = std::numeric_limits<double>::infinity();
  for (cplx z : nodes)
    if (std::abs(z) > 0.0) rmin = std::min(rmin, std::abs(z));
  cplx sum{};
  std::size_t count = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (std::abs(nodes[i]) > 0.0 && std::abs(nodes[i]) <= rmin * (1.0 + 1e-9)) {
      sum += psi[i] / nodes[i];
      ++count;
    }
  return count == 0 ? 0.0 : std::abs(sum / static_cast<double>(count) - 1.0);
}

UniquenessReport uniqueness_check(const CoordinateGrid& psi1, const CoordinateGrid& psi2) {
  const auto pairs = match_nodes(psi1.nodes, psi2.nodes);
  std::vector<cplx> ratios;
  ratios.reserve(pairs.size());
  for (auto [i, j] : pairs)
    if (psi1.psi[i] != cplx{0.0, 0.0}) ratios.push_back(psi2.psi[j] / psi1.psi[i]);
  if (ratios.size() < 100)
    throw Error(ErrorKind::GridMismatch,
                "grids share only " + std::to_string(ratios.size()) + " nodes (need 100)");
  UniquenessReport rep;
  rep.overlap = ratios.size();
  for (cplx q : ratios) rep.ratio_mean += q;
  rep.ratio_mean /= static_cast<double>(ratios.size());
  for (cplx q : ratios) rep.ratio_dev = std::max(rep.ratio_dev, std::abs(q - rep.ratio_mean));
  rep.ratio_dev /= std::abs(rep.ratio_mean);
  return rep;
}

}  // namespace qcdyn
