#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qcdyn/koenigs.hpp"
#include "qcdyn/motion.hpp"
#include "test_util.hpp"

using namespace qcdyn;
using testutil::error_kind;

namespace {

const MapSpec kMoebius = MapSpec::rational({0.0, 0.5}, {1.0, 1.0});

EvalBudget budget(int depth = 80, double tol = 1e-13) {
  EvalBudget b;
  b.max_iterations = depth;
  b.tolerance = tol;
  return b;
}

}  // namespace

TEST_CASE("classify: one germ of each class") {
  FixedPointReport r = classify_fixed_point(kMoebius, EvalBudget{});
  CHECK(r.cls == FixedPointClass::Attracting);
  CHECK(std::abs(r.multiplier - 0.5) < 1e-15);
  CHECK(r.method == EstimationMethod::Symbolic);

  r = classify_fixed_point(MapSpec::power(3), EvalBudget{});
  CHECK(r.cls == FixedPointClass::Superattracting);
  CHECK(r.local_degree == 3);
  CHECK(std::abs(r.leading_coefficient - 1.0) < 1e-12);

  r = classify_fixed_point(MapSpec::power_series({2.0, 1.0}, kInfiniteRadius), EvalBudget{});
  CHECK(r.cls == FixedPointClass::Repelling);
  CHECK(std::abs(r.multiplier - 2.0) < 1e-15);
}

TEST_CASE("classify: neutral points are flagged") {
  const FixedPointReport r = classify_fixed_point(MapSpec::power_series({cplx(0.6, 0.8), 1.0}, 1.0), EvalBudget{});
  CHECK(r.cls == FixedPointClass::Neutral);
  CHECK(r.inconclusive);
  CHECK(error_kind([] {
          koenigs_forward(MapSpec::power_series({cplx(0.6, 0.8), 1.0}, 1.0), PolarGrid::log_spaced(1e-3, 0.1, 4, 8),
                          EvalBudget{});
        }) == ErrorKind::NeutralFixedPoint);
}

TEST_CASE("classify: non-analytic map by orbit ratio") {
  const MapSpec p = MapSpec::perturbed(MapSpec::linear(cplx(0.3, 0.4)), 0.1, 1.0);
  const FixedPointReport r = classify_fixed_point(p, EvalBudget{});
  CHECK(r.method == EstimationMethod::OrbitRatio);
  CHECK(r.cls == FixedPointClass::Attracting);
  CHECK(std::abs(r.multiplier - cplx(0.3, 0.4)) < 1e-6);
}

TEST_CASE("leading coefficient of superattracting maps") {
  CHECK(std::abs(leading_coefficient(MapSpec::power_series({0.0, 4.0, 1.0}, kInfiniteRadius), 2) - 4.0) < 1e-10);
  const FixedPointReport r =
      classify_fixed_point(MapSpec::power_series({0.0, 0.0, -8.0, 0.5}, kInfiniteRadius), EvalBudget{});
  CHECK(r.local_degree == 3);
  CHECK(std::abs(r.leading_coefficient + 8.0) < 1e-9);
}

TEST_CASE("koenigs_forward: linear map is exact") {
  const PolarGrid g = PolarGrid::log_spaced(1e-3, 0.1, 6, 16);
  const CoordinateGrid c = koenigs_forward(MapSpec::linear(cplx(0.3, 0.2)), g, budget());
  for (std::size_t i = 0; i < c.size(); ++i) {
    // lambda z / lambda reproduces z up to rounding
    CHECK(std::abs(c.psi[i] - c.nodes[i]) <= 4e-16 * std::abs(c.nodes[i]));
    CHECK(c.depth[i] == 1);
    CHECK(c.residual[i] <= 4e-16 * std::abs(c.nodes[i]));
  }
}

TEST_CASE("koenigs_forward: Moebius closed form") {
  const std::vector<cplx> pts{0.1};
  const CoordinateGrid one = koenigs_forward(kMoebius, pts, budget());
  CHECK(std::abs(one.psi[0] - 0.1 / 1.2) < 1e-9);
  CHECK(std::abs(one.psi[0] - 0.0833333) < 1e-7);

  const PolarGrid g = PolarGrid::log_spaced(1e-3, 0.1, 10, 32);
  const CoordinateGrid c = koenigs_forward(kMoebius, g, budget());
  for (std::size_t i = 0; i < c.size(); ++i)
    CHECK(std::abs(c.psi[i] - oracle::moebius_psi(0.5, 1.0, c.nodes[i])) < 1e-12);
  CHECK(c.normalization_error < 1e-6);
  CHECK(c.max_residual() <= 10 * 1e-13);
  CHECK(c.max_depth() <= 80);
}

TEST_CASE("koenigs_forward: quadratic against the series oracle") {
  const MapSpec f = MapSpec::power_series({0.5, 1.0}, kInfiniteRadius);
  const oracle::Series series = oracle::koenigs_series({0.0, 0.5, 1.0}, 30);
  const PolarGrid g = PolarGrid::log_spaced(1e-3, 0.05, 8, 32);
  const CoordinateGrid c = koenigs_forward(f, g, budget());
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(c.psi[i] - oracle::eval(series, c.nodes[i])) < 1e-9);
}

TEST_CASE("koenigs_forward: depth cap") {
  const PolarGrid g = PolarGrid::log_spaced(1e-3, 0.1, 4, 8);
  CHECK(error_kind([&] { koenigs_forward(MapSpec::rational({0.0, 0.9}, {1.0, 1.0}), g, budget(5)); }) ==
        ErrorKind::NoConvergence);
  CHECK(error_kind([&] { koenigs_forward(MapSpec::power_series({2.0, 1.0}, kInfiniteRadius), g, budget()); }) ==
        ErrorKind::WrongClass);
}

TEST_CASE("koenigs_backward: linear, Moebius and 2z + z^2") {
  const PolarGrid g = PolarGrid::log_spaced(1e-3, 0.05, 8, 32);
  CoordinateGrid c = koenigs_backward(MapSpec::linear(2.0), g, budget());
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(c.psi[i] - c.nodes[i]) < 1e-15);

  // f(z) = 2z / (1 + z): c = a / (lambda - 1) = 1, psi = z / (1 - z)
  c = koenigs_backward(MapSpec::rational({0.0, 2.0}, {1.0, 1.0}), g, budget());
  for (std::size_t i = 0; i < c.size(); ++i)
    CHECK(std::abs(c.psi[i] - oracle::moebius_psi(2.0, 1.0, c.nodes[i])) < 1e-12);

  const oracle::Series series = oracle::koenigs_series({0.0, 2.0, 1.0}, 30);
  c = koenigs_backward(MapSpec::power_series({2.0, 1.0}, kInfiniteRadius), g, budget());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(std::abs(c.psi[i] - oracle::eval(series, c.nodes[i])) < 1e-9);
    CHECK(std::abs(c.psi[i] - std::log(1.0 + c.nodes[i])) < 1e-12);
  }
  CHECK(c.max_residual() <= 10 * 1e-13);
}

TEST_CASE("control condition") {
  ControlReport r = control_condition(MapSpec::linear(0.5), 0.1, 60, 12);
  CHECK(r.c_hat == 1.0);
  CHECK_FALSE(r.violated);
  r = control_condition(MapSpec::linear(cplx(0.3, -0.4)), 0.2, 60, 12);
  CHECK(r.c_hat == 1.0);

  r = control_condition(kMoebius, 0.1, 60, 12);
  CHECK(r.c_hat <= 1.3);
  CHECK(r.c_hat >= 1.0);
  CHECK(r.max_n_checked == 60);
  CHECK_FALSE(r.violated);

  const MapSpec p = MapSpec::perturbed(MapSpec::linear(0.5), 0.1, 1.0);
  r = control_condition(p, 0.05, 60, 12);
  CHECK_FALSE(r.violated);
  CHECK(r.c_hat < 1.5);
}

TEST_CASE("uniqueness_check") {
  const PolarGrid g = PolarGrid::log_spaced(1e-3, 0.1, 8, 16);
  const CoordinateGrid a = koenigs_forward(kMoebius, g, budget());
  CoordinateGrid b = a;
  for (cplx& v : b.psi) v *= 3.0;
  UniquenessReport u = uniqueness_check(a, b);
  CHECK(std::abs(u.ratio_mean - 3.0) < 1e-15);
  CHECK(u.ratio_dev < 1e-15);
  CHECK(u.overlap == g.size());

  PolarGrid g2 = g;
  g2.angles_per_ring = 32;
  const CoordinateGrid c = koenigs_forward(kMoebius, g2, budget(60, 1e-15));
  u = uniqueness_check(a, c);
  CHECK(u.ratio_dev < 1e-8);
  CHECK(std::abs(u.ratio_mean - 1.0) < 1e-8);

  const CoordinateGrid small = koenigs_forward(kMoebius, PolarGrid::log_spaced(1e-3, 0.1, 2, 16), budget());
  CHECK(error_kind([&] { uniqueness_check(small, small); }) == ErrorKind::GridMismatch);
}

TEST_CASE("annulus lift: identity boundary for a linear map") {
  const MapSpec f = MapSpec::linear(0.5);
  const CoordinateGrid phi = annulus_lift_phi(f, [](cplx z) { return z; }, 0.05, 3);
  for (std::size_t i = 0; i < phi.size(); ++i) CHECK(std::abs(phi.psi[i] - phi.nodes[i]) < 1e-15);
  CHECK(phi.boundary_mismatch == 0.0);
}

TEST_CASE("annulus lift: Moebius with interpolated boundary") {
  const double r = 0.05, delta = 0.1;
  const MotionSample ms = build_motion_koenig(kMoebius, r, delta, 64, {0.0, r / delta});
  const RadialExtension ext(ms, r / delta);
  const CoordinateGrid phi = annulus_lift_phi(kMoebius, [&](cplx z) { return ext(z); }, r, 3);
  CHECK(phi.boundary_mismatch < 1e-10);
  CHECK(phi.max_residual() < 1e-9);

  const KoenigsLift lift(kMoebius, [&](cplx z) { return ext(z); }, r, 3);
  CHECK(lift.annulus_index(cplx(0.04, 0.0)) == 0);
  CHECK(lift.annulus_index(cplx(0.06, 0.0)) == -1);
  CHECK(lift.annulus_index(cplx(0.02, 0.0)) == 1);
  CHECK(std::abs(lift.outer_radius() - 0.4) < 1e-15);
}

TEST_CASE("annulus lift agrees with the forward linearizer up to a constant") {
  // The deviation comes from the non-holomorphic boundary map and scales like
  // r / delta, so a small r is needed for the 1e-3 level.
  const double r = 1e-4, delta = 0.1;
  const MotionSample ms = build_motion_koenig(kMoebius, r, delta, 64, {0.0, r / delta});
  const RadialExtension ext(ms, r / delta);
  const CoordinateGrid phi = annulus_lift_phi(kMoebius, [&](cplx z) { return ext(z); }, r, 3);
  const CoordinateGrid lifted = invert_conjugacy(phi);
  const CoordinateGrid fwd = koenigs_forward(kMoebius, lifted.nodes, budget());
  const UniquenessReport u = uniqueness_check(lifted, fwd);
  CHECK(u.ratio_dev < 1e-3);
}

TEST_CASE("normalization is checked through the ring mean, not pointwise") {
  // psi(z) = z + z^2 on a ring of radius 0.1: pointwise |psi/z - 1| = 0.1,
  // while the ring mean of psi/z is exactly psi'(0) = 1.
  const PolarGrid g = PolarGrid::log_spaced(0.1, 0.2, 2, 16);
  std::vector<cplx> nodes = g.nodes(), psi;
  for (cplx z : nodes) psi.push_back(z + z * z);
  CHECK(innermost_normalization(nodes, psi) < 1e-15);
  for (cplx& p : psi) p *= 1.01;
  CHECK(innermost_normalization(nodes, psi) == doctest::Approx(0.01));
}
