#include "qcdyn/boettcher.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qcdyn/error.hpp"
#include "qcdyn/parallel.hpp"

namespace qcdyn {

namespace {

cplx ipow(cplx z, int n) {
  cplx acc{1.0, 0.0};
  for (int i = 0; i < n; ++i) acc *= z;
  return acc;
}

struct ProductValue {
  cplx psi;
  int depth;
  double max_factor_distance;
};

ProductValue boettcher_point(const MapSpec& g, int n, cplx z, const EvalBudget& budget) {
  if (z == cplx{0.0, 0.0}) return {z, 0, 0.0};
  cplx w = z;
  cplx log_sum{0.0, 0.0};
  cplx psi = z;
  double weight = 1.0 / n;
  double max_dist = 0.0;
  double delta = 0.0;
  for (int j = 0; j < budget.max_iterations; ++j) {
    const cplx gw = evaluate(g, w);
    if (gw == cplx{0.0, 0.0}) return {psi, j, max_dist};
    const cplx factor = gw / ipow(w, n);
    if (!(factor.real() > 0.0)) {
      std::ostringstream os;
      os << "factor " << factor << " at depth " << j << " from z = " << z
         << " leaves the right half-plane";
      throw Error(ErrorKind::BranchAmbiguity, os.str());
    }
    max_dist = std::max(max_dist, std::abs(factor - 1.0));
    log_sum += std::log(factor) * weight;
    weight /= n;
    const cplx next = z * std::exp(log_sum);
    delta = std::abs(next - psi);
    psi = next;
    w = gw;
    if (delta < budget.tolerance) return {psi, j + 1, max_dist};
  }
  std::ostringstream os;
  os << "depth cap reached at z = " << z << ", last delta " << delta;
  throw Error(ErrorKind::NoConvergence, os.str());
}

BoettcherResult coordinate_impl(const MapSpec& g, std::vector<cplx> nodes,
                                const EvalBudget& budget) {
  budget.validate();
  const NormalizedMap norm = normalize_leading(g, budget);
  const MapSpec& gt = norm.g_tilde;
  for (cplx z : nodes)
    if (!(std::abs(evaluate(gt, z)) < std::abs(z)))
      throw Error(ErrorKind::Domain, "grid node outside the immediate basin (|g(z)| >= |z|)");

  BoettcherResult out;
  out.n = norm.n;
  out.b = norm.b;
  CoordinateGrid& cg = out.psi;
  cg.nodes = std::move(nodes);
  cg.psi.assign(cg.nodes.size(), cplx{});
  cg.depth.assign(cg.nodes.size(), 0);
  cg.residual.assign(cg.nodes.size(), 0.0);
  cg.kind = CoordinateKind::Linearizer;
  cg.cls = FixedPointClass::Superattracting;
  cg.tolerance = budget.tolerance;
  std::vector<double> dist(cg.nodes.size(), 0.0);
  parallel_for(cg.nodes.size(), [&](std::size_t i) {
    const cplx z = cg.nodes[i];
    const ProductValue v = boettcher_point(gt, norm.n, z, budget);
    cg.psi[i] = v.psi;
    cg.depth[i] = v.depth;
    const ProductValue image = boettcher_point(gt, norm.n, evaluate(gt, z), budget);
    cg.residual[i] = std::abs(image.psi - ipow(v.psi, norm.n));
    dist[i] = std::max(v.max_factor_distance, image.max_factor_distance);
  });
  for (double d : dist) out.max_factor_distance = std::max(out.max_factor_distance, d);

  cg.normalization_error = innermost_normalization(cg.nodes, cg.psi);
  return out;
}

}  // namespace

NormalizedMap normalize_leading(const MapSpec& g, const EvalBudget& budget) {
  const FixedPointReport rep = classify_fixed_point(g, budget);
  if (rep.cls != FixedPointClass::Superattracting)
    throw Error(ErrorKind::WrongClass, "normalization needs a superattracting fixed point");
  const cplx an = rep.leading_coefficient;
  if (std::abs(an) < 1e-12) throw Error(ErrorKind::DegenerateLeading, "leading coefficient vanishes");

  NormalizedMap out{rep.local_degree, cplx{1.0, 0.0}, g};
  if (std::abs(an - 1.0) <= 1e-13) return out;
  out.b = std::exp(std::log(an) / static_cast<double>(rep.local_degree - 1));
  const double radius = g.validity_radius();
  out.g_tilde = MapSpec::composite({MapSpec::linear(out.b), g,
                                    MapSpec::linear(1.0 / out.b, radius * std::abs(out.b))});
  return out;
}

BoettcherResult boettcher_coordinate(const MapSpec& g, const PolarGrid& grid,
                                     const EvalBudget& budget) {
  grid.validate();
  BoettcherResult out = coordinate_impl(g, grid.nodes(), budget);
  out.psi.grid = grid;
  return out;
}

BoettcherResult boettcher_coordinate(const MapSpec& g, std::span<const cplx> points,
                                     const EvalBudget& budget) {
  return coordinate_impl(g, std::vector<cplx>(points.begin(), points.end()), budget);
}

cplx boettcher_lift_h(const MapSpec& g, int n, cplx z, const EvalBudget& budget) {
  const double target_radius = std::abs(z);
  if (target_radius == 0.0) return z;
  const cplx dir = z / target_radius;
  double rho = std::min(target_radius, 1e-4);
  cplx u = dir * rho;
  cplx w = local_inverse(g, ipow(u, n), u, budget);
  while (rho < target_radius) {
    const double next = std::min(target_radius, rho * 1.5);
    const cplx u_next = (next == target_radius) ? z : dir * next;
    w = local_inverse(g, ipow(u_next, n), w * (u_next / u), budget);
    u = u_next;
    rho = next;
  }
  return w;
}

BoettcherLift::BoettcherLift(MapSpec g, int n, std::function<cplx(cplx)> boundary_map, double r,
                             int k, EvalBudget budget)
    : g_(std::move(g)), n_(n), boundary_(std::move(boundary_map)), r_(r), k_(k), budget_(budget) {
  budget_.validate();
  if (n_ < 2) throw Error(ErrorKind::Config, "covering lift needs degree n >= 2");
  if (!(r_ > 0.0 && r_ < 1.0) || k_ < 1)
    throw Error(ErrorKind::Config, "covering lift needs 0 < r < 1 and k >= 1");
  if (outer_radius() > g_.validity_radius())
    throw Error(ErrorKind::Domain, "lifted disk exceeds validity radius");
}

double BoettcherLift::ring_radius(int j) const {
  return std::exp(std::log(r_) / std::pow(static_cast<double>(n_), j));
}

int BoettcherLift::annulus_index(cplx z) const {
  const double rho = std::abs(z);
  if (rho <= r_) return -1;
  if (rho > outer_radius() * (1.0 + 1e-12))
    throw Error(ErrorKind::Domain, "point outside the lifted disk");
  const double s = std::log(std::log(r_) / std::log(rho)) / std::log(static_cast<double>(n_));
  return std::clamp(static_cast<int>(std::floor(s)), 0, k_ - 1);
}

cplx BoettcherLift::evaluate_in(cplx z, int j) const {
  if (j < 0) return z;
  if (j == 0) return boundary_(z);
  const cplx target = evaluate_in(ipow(z, n_), j - 1);
  const double rho_in = ring_radius(j);
  const cplx z_in = z * (rho_in / std::abs(z));
  const cplx seed = evaluate_in(z_in, j - 1) * (z / z_in);
  return local_inverse(g_, target, seed, budget_);
}

cplx BoettcherLift::operator()(cplx z) const { return evaluate_in(z, annulus_index(z)); }

CoordinateGrid covering_lift_phi(const MapSpec& g, const std::function<cplx(cplx)>& boundary_map,
                                 double r, int k, const EvalBudget& budget,
                                 const LiftLayout& layout) {
  const FixedPointReport rep = classify_fixed_point(g, budget);
  if (rep.cls != FixedPointClass::Superattracting)
    throw Error(ErrorKind::WrongClass, "covering lift needs a superattracting fixed point");
  const BoettcherLift lift(g, rep.local_degree, boundary_map, r, k, budget);
  const int n = rep.local_degree;

  PolarGrid grid;
  grid.angles_per_ring = layout.angles;
  for (int j = 0; j < k; ++j) {
    const double lo = std::log(lift.ring_radius(j));
    const double hi = std::log(lift.ring_radius(j + 1));
    for (int i = 0; i < layout.rings_per_annulus; ++i)
      grid.radii.push_back(std::exp(lo + (hi - lo) * (i + 0.5) / layout.rings_per_annulus));
  }
  grid.validate();

  CoordinateGrid out;
  out.grid = grid;
  out.nodes = grid.nodes();
  out.kind = CoordinateKind::Conjugacy;
  out.cls = FixedPointClass::Superattracting;
  out.tolerance = budget.tolerance;
  out.psi.assign(out.nodes.size(), cplx{});
  out.depth.assign(out.nodes.size(), 0);
  out.residual.assign(out.nodes.size(), 0.0);
  parallel_for(out.nodes.size(), [&](std::size_t i) {
    const cplx z = out.nodes[i];
    const int j = lift.annulus_index(z);
    out.psi[i] = lift.evaluate_in(z, j);
    out.depth[i] = j;
    if (j >= 1) out.residual[i] = std::abs(evaluate(g, out.psi[i]) - lift(ipow(z, n)));
  });
  out.normalization_error = innermost_normalization(out.nodes, out.psi);

  // shared circles: S_r between Delta_r and A_{r,0}, then between A_{r,j} and A_{r,j+1}
  std::vector<double> mismatch(static_cast<std::size_t>(k) * layout.angles, 0.0);
  parallel_for(mismatch.size(), [&](std::size_t idx) {
    const int j = static_cast<int>(idx / static_cast<std::size_t>(layout.angles)) - 1;
    const auto a = static_cast<int>(idx % static_cast<std::size_t>(layout.angles));
    const cplx z = std::polar(lift.ring_radius(j + 1), 2.0 * std::numbers::pi * a / layout.angles);
    mismatch[idx] = std::abs(lift.evaluate_in(z, j) - lift.evaluate_in(z, j + 1));
  });
  for (double x : mismatch) out.boundary_mismatch = std::max(out.boundary_mismatch, x);
  if (out.boundary_mismatch > 10.0 * layout.mismatch_tolerance) {
    std::ostringstream os;
    os << "boundary mismatch " << out.boundary_mismatch << " suggests the lift changed sheets";
    throw Error(ErrorKind::BranchAmbiguity, os.str());
  }
  return out;
}

RootOfUnityMatch boettcher_uniqueness(const CoordinateGrid& psi1, const CoordinateGrid& psi2,
                                      int n) {
  if (n < 2) throw Error(ErrorKind::Config, "degree must be >= 2");
  const auto pairs = match_nodes(psi1.nodes, psi2.nodes);
  if (pairs.size() < 100)
    throw Error(ErrorKind::GridMismatch,
                "grids share only " + std::to_string(pairs.size()) + " nodes (need 100)");
  RootOfUnityMatch best;
  best.dev = std::numeric_limits<double>::infinity();
  best.overlap = pairs.size();
  for (int m = 0; m < n - 1; ++m) {
    const cplx u = (m == 0) ? cplx{1.0, 0.0} : std::polar(1.0, 2.0 * std::numbers::pi * m / (n - 1));
    double dev = 0.0;
    for (auto [i, j] : pairs) dev = std::max(dev, std::abs(psi2.psi[j] - u * psi1.psi[i]));
    if (dev < best.dev) {
      best.dev = dev;
      best.root_index = m;
    }
  }
  return best;
}

}  // namespace qcdyn
