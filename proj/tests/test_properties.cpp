// Randomized invariants. Every generator is seeded so failures reproduce.
#include <doctest.h>

#include <algorithm>
#include <random>

#include <nlohmann/json.hpp>

#include "qcdyn/boettcher.hpp"
#include "qcdyn/dilatation.hpp"
#include "qcdyn/koenigs.hpp"
#include "qcdyn/map_model.hpp"
#include "qcdyn/motion.hpp"
#include "qcdyn/parallel.hpp"
#include "test_util.hpp"

using namespace qcdyn;
using testutil::random_in_disk;

namespace {

// lambda z + small higher terms, radius 1.
MapSpec random_attracting(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mod(0.2, 0.8);
  std::uniform_real_distribution<double> arg(-3.0, 3.0);
  std::vector<cplx> a{std::polar(mod(rng), arg(rng))};
  for (int j = 2; j <= 4; ++j) a.push_back(random_in_disk(rng, 0.5));
  return MapSpec::power_series(a, 1.0);
}

// z^n (1 + small terms) with a_n = 1, radius 1.
MapSpec random_superattracting(std::mt19937_64& rng, int n) {
  std::vector<cplx> a(static_cast<std::size_t>(n - 1), cplx{});
  a.push_back(1.0);
  for (int j = 1; j <= 2; ++j) a.push_back(random_in_disk(rng, 0.5));
  return MapSpec::power_series(a, 1.0);
}

}  // namespace

TEST_CASE("iterate: splitting an orbit gives the same point") {
  std::mt19937_64 rng(11);
  EvalBudget b;
  for (int trial = 0; trial < 50; ++trial) {
    const MapSpec m = random_attracting(rng);
    const cplx z = random_in_disk(rng, 0.2);
    std::uniform_int_distribution<int> len(1, 20);
    const int p = len(rng), q = len(rng);
    const cplx whole = iterate(m, z, p + q, b).back();
    const cplx split = iterate(m, iterate(m, z, p, b).back(), q, b).back();
    CHECK(std::abs(whole - split) <= 1e-14 * std::max(1e-300, std::abs(whole)));
  }
}

TEST_CASE("derivative agrees with a central difference") {
  std::mt19937_64 rng(12);
  std::vector<MapSpec> maps;
  for (int i = 0; i < 10; ++i) maps.push_back(random_attracting(rng));
  maps.push_back(MapSpec::moebius_power(2, cplx{0.7, -0.2}));
  maps.push_back(MapSpec::rational({0, 0.5}, {1, 1}));
  maps.push_back(MapSpec::composite({maps[0], maps[10]}));
  for (const MapSpec& m : maps)
    for (int k = 0; k < 10; ++k) {
      const cplx z = random_in_disk(rng, 0.2);
      const double h = 1e-6;
      const cplx fd = (m(z + h) - m(z - h)) / (2.0 * h);
      CHECK(std::abs(derivative(m, z) - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
}

TEST_CASE("symbolic Wirtinger derivatives match finite differences") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const MapSpec base = random_attracting(rng);
    const MapSpec m = MapSpec::perturbed(base, random_in_disk(rng, 0.3), trial % 2 ? 1.0 : 1.5);
    const MapSpec c = MapSpec::composite({base, m});
    for (const MapSpec* f : {&m, &c}) {
      const cplx z = random_in_disk(rng, 0.2) + 0.01;
      const Jet s = symbolic_wirtinger(*f, z);
      const Jet n = wirtinger(PlaneMap([f](cplx w) { return evaluate(*f, w); }), z, 1e-6);
      CHECK(std::abs(s.dz - n.dz) < 1e-7);
      CHECK(std::abs(s.dzbar - n.dzbar) < 1e-7);
    }
  }
}

TEST_CASE("local_inverse round trips") {
  std::mt19937_64 rng(14);
  EvalBudget b;
  for (int trial = 0; trial < 50; ++trial) {
    const MapSpec m = random_attracting(rng);
    const cplx z = random_in_disk(rng, 0.1);
    const cplx w = m(z);
    const cplx back = local_inverse(m, w, z * 1.01, b);
    CHECK(std::abs(back - z) <= 1e-12 * std::max(1.0, std::abs(z)));
  }
}

TEST_CASE("map JSON round trip preserves values") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const MapSpec base = random_attracting(rng);
    const MapSpec m = MapSpec::composite(
        {MapSpec::perturbed(base, random_in_disk(rng, 0.2), 0.5), MapSpec::moebius_power(2, random_in_disk(rng, 1.0))});
    nlohmann::json j;
    to_json(j, m);
    const MapSpec back = map_from_json(nlohmann::json::parse(j.dump()));
    for (int k = 0; k < 5; ++k) {
      const cplx z = random_in_disk(rng, 0.2);
      CHECK(back(z) == m(z));
    }
  }
}

TEST_CASE("koenigs: functional equation and normalization on random maps") {
  std::mt19937_64 rng(16);
  EvalBudget b;
  for (int trial = 0; trial < 20; ++trial) {
    const MapSpec m = random_attracting(rng);
    const cplx lambda = derivative(m, 0.0);
    std::vector<cplx> z, fz;
    for (int k = 0; k < 16; ++k) {
      z.push_back(random_in_disk(rng, 0.05));
      fz.push_back(m(z.back()));
    }
    const CoordinateGrid pz = koenigs_forward(m, z, b);
    const CoordinateGrid pf = koenigs_forward(m, fz, b);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(pf.psi[i] - lambda * pz.psi[i]) < 1e-12);
    const cplx tiny = 1e-7;
    const cplx p0 = koenigs_forward(m, std::span<const cplx>(&tiny, 1), b).psi[0];
    CHECK(std::abs(p0 / tiny - 1.0) < 1e-5);
  }
}

TEST_CASE("koenigs: depth grows with the radius") {
  std::mt19937_64 rng(17);
  EvalBudget b;
  for (int trial = 0; trial < 10; ++trial) {
    const MapSpec m = random_attracting(rng);
    const CoordinateGrid g = koenigs_forward(m, PolarGrid::log_spaced(1e-4, 0.1, 6, 8), b);
    // adaptive depth cannot decrease outward along a ray
    for (std::size_t a = 0; a < 8; ++a)
      for (std::size_t ring = 1; ring < 6; ++ring) CHECK(g.depth[ring * 8 + a] + 1 >= g.depth[(ring - 1) * 8 + a]);
  }
}

TEST_CASE("koenigs: covariance under linear rescaling") {
  std::mt19937_64 rng(18);
  EvalBudget b;
  for (int trial = 0; trial < 10; ++trial) {
    const MapSpec f = random_attracting(rng);
    const double s = 0.5;
    // g(z) = f(s z) / s
    const MapSpec g = MapSpec::composite({MapSpec::linear(1.0 / s), f, MapSpec::linear(s)});
    CHECK(std::abs(classify_fixed_point(g, b).multiplier - classify_fixed_point(f, b).multiplier) < 1e-12);
    std::vector<cplx> z, sz;
    for (int k = 0; k < 8; ++k) {
      z.push_back(random_in_disk(rng, 0.05));
      sz.push_back(s * z.back());
    }
    const CoordinateGrid pg = koenigs_forward(g, z, b);
    const CoordinateGrid pf = koenigs_forward(f, sz, b);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(pg.psi[i] - pf.psi[i] / s) < 1e-12);
  }
}

TEST_CASE("control ratio estimate does not grow as delta shrinks") {
  const MapSpec m = MapSpec::rational({0, 0.5}, {1, 1});
  double prev = std::numeric_limits<double>::infinity();
  for (double delta : {0.2, 0.1, 0.05, 0.02}) {
    const ControlReport r = control_condition(m, delta, 60, 12);
    CHECK(r.c_hat <= prev + 1e-12);
    prev = r.c_hat;
  }
}

TEST_CASE("boettcher: rescaled map has the same normalized coordinate") {
  std::mt19937_64 rng(19);
  EvalBudget b;
  const PolarGrid grid = PolarGrid::log_spaced(1e-3, 0.1, 5, 8);
  for (int n : {2, 3}) {
    const MapSpec g = random_superattracting(rng, n);
    const MapSpec g2 = MapSpec::composite({MapSpec::linear(2.0), g, MapSpec::linear(0.5)});
    const BoettcherResult r1 = boettcher_coordinate(g, grid, b);
    const BoettcherResult r2 = boettcher_coordinate(g2, grid, b);
    CHECK(std::abs(r2.b - 0.5) < 1e-12);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(r1.psi.psi[i] - r2.psi.psi[i]) < 1e-8);
  }
}

TEST_CASE("boettcher: functional equation and factor contraction") {
  std::mt19937_64 rng(20);
  EvalBudget b;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 2;
    const MapSpec g = random_superattracting(rng, n);
    std::vector<cplx> z, gz;
    for (int k = 0; k < 8; ++k) {
      z.push_back(random_in_disk(rng, 0.05));
      gz.push_back(g(z.back()));
    }
    const BoettcherResult pz = boettcher_coordinate(g, z, b);
    const BoettcherResult pg = boettcher_coordinate(g, gz, b);
    for (std::size_t i = 0; i < z.size(); ++i)
      CHECK(std::abs(pg.psi.psi[i] - std::pow(pz.psi.psi[i], n)) < 1e-12);
  }
}

TEST_CASE("boettcher: consecutive orbit factors contract for Moebius powers") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 3;
    const cplx c = random_in_disk(rng, 1.0);
    const MapSpec g = MapSpec::moebius_power(n, c);
    cplx w = random_in_disk(rng, 0.05);
    double prev = std::abs(g(w) / std::pow(w, n) - 1.0);
    for (int j = 0; j < 3 && prev > 1e-12; ++j) {
      w = g(w);
      const double d = std::abs(g(w) / std::pow(w, n) - 1.0);
      if (d < 1e-13) break;
      CHECK(d / prev < 0.9);
      prev = d;
    }
  }
}

TEST_CASE("local degree recovered from log|g| / log|z|") {
  std::mt19937_64 rng(22);
  for (int n : {2, 3, 4}) {
    const MapSpec g = random_superattracting(rng, n);
    const cplx z = std::polar(1e-4, 0.7);
    CHECK(std::log(std::abs(g(z))) / std::log(std::abs(z)) == doctest::Approx(n).epsilon(0.01));
    const FixedPointReport rep = classify_fixed_point(g, EvalBudget{});
    CHECK(rep.cls == FixedPointClass::Superattracting);
    CHECK(rep.local_degree == n);
  }
}

TEST_CASE("compose_dilatation: identity and norm bound") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const cplx a = random_in_disk(rng, 0.95), c = random_in_disk(rng, 0.95);
    const cplx fz = random_in_disk(rng, 2.0) + 0.1;
    CHECK(std::abs(compose_dilatation(a, 0.0, fz) - a) < 1e-15);
    const double na = std::abs(a), nc = std::abs(c);
    CHECK(std::abs(compose_dilatation(a, c, fz)) <= (na + nc) / (1.0 + na * nc) + 1e-12);
  }
}

TEST_CASE("modulus curve: monotone, integral consistent, majorant holds") {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> t, w;
    const double beta = 0.3 + u(rng);
    for (int i = 0; i < 20; ++i) {
      t.push_back(1e-4 * std::pow(10.0, 4.0 * i / 19.0));
      w.push_back(0.5 * std::pow(t.back(), beta) * (1.0 + 0.1 * u(rng)));
    }
    const ModulusCurve c = ModulusCurve::from_samples(t, w);
    CHECK(std::is_sorted(c.omega.begin(), c.omega.end()));
    REQUIRE_FALSE(c.divergent);
    CHECK(c.integral_to(c.t_max()) == doctest::Approx(c.integral_value).epsilon(0.05));
    for (double s : {1.0, 0.1, 0.01, 1e-3}) {
      const TildeOmega tw = tilde_omega(c, 1.0, 0.5, s);
      CHECK(tw.sum <= tw.bound + 1e-12);
    }
  }
}

TEST_CASE("motion extension: k grows with |c| and the boundary is reproduced") {
  const MotionSample ms = build_motion_koenig(MapSpec::rational({0, 0.5}, {1, 1}), 0.05, 0.1, 64);
  const PolarGrid grid = annulus_grid(ms, 6, 64);
  double prev = 0.0;
  for (double a : {0.05, 0.1, 0.2, 0.4}) {
    const double k = measure_extension_k(ms, std::polar(a, 0.3), grid);
    CHECK(k >= prev);
    prev = k;
  }
  const ExtendedMotion ext = extend_motion_radial(ms, grid);
  CHECK(ext.boundary_reproduction_error <= 1e-12);
}

TEST_CASE("results do not depend on the thread count") {
  std::mt19937_64 rng(25);
  const MapSpec m = random_attracting(rng);
  const PolarGrid grid = PolarGrid::log_spaced(1e-3, 0.1, 8, 16);
  const int saved = thread_count();
  set_thread_count(1);
  const CoordinateGrid a = koenigs_forward(m, grid, EvalBudget{});
  const BeltramiField fa = beltrami_field(MapSpec::perturbed(m, 0.1, 1.0), grid);
  set_thread_count(3);
  const CoordinateGrid b = koenigs_forward(m, grid, EvalBudget{});
  const BeltramiField fb = beltrami_field(MapSpec::perturbed(m, 0.1, 1.0), grid);
  set_thread_count(saved);
  CHECK(a.psi == b.psi);
  CHECK(a.depth == b.depth);
  CHECK(fa.mu == fb.mu);
}
