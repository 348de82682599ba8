#pragma once

#include <functional>
#include <span>

#include "qcdyn/koenigs.hpp"

namespace qcdyn {

struct NormalizedMap {
  int n = 2;
  cplx b{1.0, 0.0};  // principal (n-1)-th root of a_n
  MapSpec g_tilde;    // b g(z / b), leading coefficient 1
};

// Conjugates a superattracting germ by z -> b z so that a_n = 1. When a_n is
// already 1 to within 1e-13 the map is returned unchanged with b = 1.
NormalizedMap normalize_leading(const MapSpec& g, const EvalBudget& budget = {});

struct BoettcherResult {
  int n = 2;
  cplx b{1.0, 0.0};
  CoordinateGrid psi;  // nodes are in the rescaled coordinate
  double max_factor_distance = 0.0;  // max |g~(w)/w^n - 1| over all factors used
};

// psi(z) = z prod_j (g~(w_j) / w_j^n)^(1/n^(j+1)), w_j = g~^j(z), principal
// branch per factor, adaptive depth per node.
BoettcherResult boettcher_coordinate(const MapSpec& g, const PolarGrid& grid,
                                     const EvalBudget& budget);
BoettcherResult boettcher_coordinate(const MapSpec& g, std::span<const cplx> points,
                                     const EvalBudget& budget);

// Branch of g^{-1} o q_n with h(z)/z -> 1, i.e. g(h(z)) = z^n. Followed by
// continuation along the ray from a small radius so the branch stays the
// principal one. g must have leading coefficient 1.
cplx boettcher_lift_h(const MapSpec& g, int n, cplx z, const EvalBudget& budget = {});

// Ring-by-ring covering lift. A_{r,0} = {r <= |z| <= r^(1/n)} carries the
// boundary map, Delta_r the identity, and on A_{r,j} (j >= 1) phi solves
// g(phi(z)) = phi(z^n) on the branch continuing the previous ring.
class BoettcherLift {
 public:
  BoettcherLift(MapSpec g, int n, std::function<cplx(cplx)> boundary_map, double r, int k,
                EvalBudget budget = {});

  cplx operator()(cplx z) const;
  cplx evaluate_in(cplx z, int j) const;
  int annulus_index(cplx z) const;  // -1 inside Delta_r
  double ring_radius(int j) const;  // r^(1/n^j)
  double outer_radius() const { return ring_radius(k_); }
  int degree() const { return n_; }

 private:
  MapSpec g_;
  int n_;
  std::function<cplx(cplx)> boundary_;
  double r_;
  int k_;
  EvalBudget budget_;
};

// Samples the lift on ring interiors. residual holds |g(phi(z)) - phi(z^n)| on
// rings j >= 1, where the conjugacy is claimed, and 0 on A_{r,0}. Throws
// BranchAmbiguity when a shared-circle mismatch exceeds 10x the layout
// tolerance.
CoordinateGrid covering_lift_phi(const MapSpec& g, const std::function<cplx(cplx)>& boundary_map,
                                 double r, int k, const EvalBudget& budget = {},
                                 const LiftLayout& layout = {});

struct RootOfUnityMatch {
  int root_index = 0;  // u = exp(2 pi i root_index / (n - 1))
  double dev = 0.0;    // sup |psi2 - u psi1|
  std::size_t overlap = 0;
};

RootOfUnityMatch boettcher_uniqueness(const CoordinateGrid& psi1, const CoordinateGrid& psi2,
                                      int n);

}  // namespace qcdyn
