#pragma once

#include <functional>
#include <span>
#include <vector>

#include "qcdyn/map_model.hpp"
#include "qcdyn/polar_grid.hpp"

namespace qcdyn {

enum class FixedPointClass { Attracting, Repelling, Superattracting, Neutral };
enum class EstimationMethod { Symbolic, FiniteDifference, OrbitRatio };

std::string_view to_string(FixedPointClass c) noexcept;
std::string_view to_string(EstimationMethod m) noexcept;

struct FixedPointReport {
  cplx multiplier{0.0, 0.0};
  FixedPointClass cls = FixedPointClass::Neutral;
  int local_degree = 1;  // >= 2 only for superattracting points
  cplx leading_coefficient{0.0, 0.0};  // a_n = lim g(z)/z^n when superattracting
  EstimationMethod method = EstimationMethod::Symbolic;
  bool inconclusive = false;  // |lambda| within 1e-9 of 1
};

FixedPointReport classify_fixed_point(const MapSpec& m, const EvalBudget& budget);

// Leading coefficient lim g(z)/z^n from the mean of g(z)/z^n over a small
// circle (discrete Cauchy integral).
cplx leading_coefficient(const MapSpec& g, int n);

enum class CoordinateKind {
  Linearizer,  // psi with psi o f = lambda psi (or psi o g = psi^n)
  Conjugacy,   // phi with f o phi = phi o (lambda z) (or g o phi = phi o q_n)
};

// A normal-form coordinate sampled at a set of nodes. Nodes come from a polar
// grid when one is given, otherwise they are explicit points.
struct CoordinateGrid {
  PolarGrid grid;
  std::vector<cplx> nodes;
  std::vector<cplx> psi;
  std::vector<int> depth;
  std::vector<double> residual;
  CoordinateKind kind = CoordinateKind::Linearizer;
  cplx multiplier{0.0, 0.0};
  FixedPointClass cls = FixedPointClass::Attracting;
  double tolerance = 0.0;
  double normalization_error = 0.0;  // |psi'(0) - 1| estimated on the innermost ring
  double boundary_mismatch = 0.0;    // lift constructions only

  std::size_t size() const { return nodes.size(); }
  double max_residual() const;
  int max_depth() const;
};

struct ControlReport {
  double delta = 0.0;
  double c_hat = 1.0;
  int max_n_checked = 0;
  bool violated = false;
  double ratio_min = 1.0;
  double ratio_max = 1.0;
};

// Scans |f^n(z) / (lambda^n z)| over a polar sample of the closed disk of
// radius delta for n = 0..n_max. The reference lambda^n z is built by the
// same repeated multiplication as a linear orbit.
ControlReport control_condition(const MapSpec& m, double delta, int n_max, int samples);

// psi(z) = lim f^k(z) / lambda^k with a per-node adaptive depth.
CoordinateGrid koenigs_forward(const MapSpec& m, const PolarGrid& grid, const EvalBudget& budget);
CoordinateGrid koenigs_forward(const MapSpec& m, std::span<const cplx> points,
                               const EvalBudget& budget);

// Repelling case: forward scheme on the local inverse branch fixing 0.
CoordinateGrid koenigs_backward(const MapSpec& m, const PolarGrid& grid, const EvalBudget& budget);
CoordinateGrid koenigs_backward(const MapSpec& m, std::span<const cplx> points,
                                const EvalBudget& budget);

// Propagates a conjugacy given on the fundamental annulus
// A_{r,0} = {|lambda| r <= |z| <= r} to the rings A_{r,j} by
//   phi(z) = f^j(phi(lambda^{-j} z)),
// using local inverses for negative j.
class KoenigsLift {
 public:
  KoenigsLift(MapSpec m, std::function<cplx(cplx)> boundary_map, double r, int k,
              EvalBudget budget = {});

  cplx operator()(cplx z) const;
  // Evaluates with the ring index forced, for continuity checks on shared circles.
  cplx evaluate_in(cplx z, int j) const;
  int annulus_index(cplx z) const;

  cplx multiplier() const { return lambda_; }
  double r() const { return r_; }
  int k() const { return k_; }
  double outer_radius() const;

 private:
  MapSpec m_;
  std::function<cplx(cplx)> boundary_;
  double r_;
  int k_;
  EvalBudget budget_;
  cplx lambda_;
};

struct LiftLayout {
  int inner_depth = 4;        // rings j = -k .. inner_depth
  int rings_per_annulus = 4;
  int angles = 32;
  double mismatch_tolerance = 1e-9;
};

// Samples a KoenigsLift on the interior of each ring, recording the conjugacy
// residual |f(phi(z)) - phi(lambda z)| and the largest mismatch across shared
// ring boundaries. Throws ContinuityBreach when that mismatch exceeds the
// layout tolerance.
CoordinateGrid annulus_lift_phi(const MapSpec& m, const std::function<cplx(cplx)>& boundary_map,
                                double r, int k, const EvalBudget& budget = {},
                                const LiftLayout& layout = {});

struct UniquenessReport {
  cplx ratio_mean{0.0, 0.0};
  double ratio_dev = 0.0;  // max |ratio - mean| / |mean|
  std::size_t overlap = 0;
};

// Swaps nodes and values of a conjugacy phi, giving samples of psi = phi^{-1}
// at the points phi(z). The result has no polar layout.
CoordinateGrid invert_conjugacy(const CoordinateGrid& phi);

// Compares two linearizers on their common nodes (matched by position).
// |mean of psi(z)/z over the innermost ring - 1|. On a full ring of equally
// spaced nodes the mean is psi'(0) up to aliasing of order r^angles.
double innermost_normalization(std::span<const cplx> nodes, std::span<const cplx> psi);

UniquenessReport uniqueness_check(const CoordinateGrid& psi1, const CoordinateGrid& psi2);

// Pairs of node indices (i in a, j in b) at the same position.
std::vector<std::pair<std::size_t, std::size_t>> match_nodes(std::span<const cplx> a,
                                                             std::span<const cplx> b);

}  // namespace qcdyn
