#pragma once

#include <complex>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace qcdyn {

using cplx = std::complex<double>;

inline constexpr double kInfiniteRadius = std::numeric_limits<double>::infinity();

struct MapNode;

// A map germ fixing 0. Cheap to copy; the underlying description is shared
// and immutable, so a MapSpec may be evaluated from any number of threads.
class MapSpec {
 public:
  // z -> a_1 z + a_2 z^2 + ... + a_J z^J, valid on |z| <= radius.
  static MapSpec power_series(std::vector<cplx> coeffs, double radius);
  // P(z) / Q(z) with coefficients listed from degree 0; P(0) = 0, Q(0) != 0.
  static MapSpec rational(std::vector<cplx> numerator, std::vector<cplx> denominator,
                          double radius = kInfiniteRadius);
  // M^{-1} o q_n o M with M(z) = z / (1 + c z).
  static MapSpec moebius_power(int n, cplx c);
  // z -> base(z) + eps * base'(0) * z * conj(z) * |z|^(alpha - 1).
  static MapSpec perturbed(MapSpec base, cplx eps, double alpha);
  // parts applied right to left: composite({a, b})(z) = a(b(z)).
  static MapSpec composite(std::vector<MapSpec> parts);

  static MapSpec linear(cplx lambda, double radius = kInfiniteRadius) {
    return power_series({lambda}, radius);
  }
  static MapSpec power(int n) { return moebius_power(n, cplx{0.0, 0.0}); }

  const MapNode& node() const { return *node_; }
  double validity_radius() const;
  bool is_analytic() const;

  cplx operator()(cplx z) const;

 private:
  explicit MapSpec(std::shared_ptr<const MapNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const MapNode> node_;
};

struct PowerSeries {
  std::vector<cplx> coeffs;  // a_1 .. a_J
  double radius;
};

struct Rational {
  std::vector<cplx> numerator;
  std::vector<cplx> denominator;
  double radius;
};

struct MoebiusPower {
  int n;
  cplx c;
};

struct Perturbed {
  MapSpec base;
  cplx eps;
  double alpha;
  cplx base_slope;  // base'(0), fixed at construction
};

struct Composite {
  std::vector<MapSpec> parts;
};

struct MapNode {
  std::variant<PowerSeries, Rational, MoebiusPower, Perturbed, Composite> v;
};

struct EvalBudget {
  int max_iterations = 200;
  double tolerance = 1e-13;
  int newton_max_steps = 60;
  double newton_tolerance = 1e-14;

  void validate() const;
};

// Both Wirtinger derivatives at a point.
struct Jet {
  cplx dz;
  cplx dzbar;
};

cplx evaluate(const MapSpec& m, cplx z);

// Orbit [z, m(z), ..., m^k(z)].
std::vector<cplx> iterate(const MapSpec& m, cplx z, int k, const EvalBudget& budget);

// Complex derivative for analytic variants; throws NotAnalytic otherwise.
cplx derivative(const MapSpec& m, cplx z);

// Closed-form (f_z, f_zbar) for every variant, using the chain rule for
// Wirtinger derivatives across composites.
Jet symbolic_wirtinger(const MapSpec& m, cplx z);

// Newton solve of m(z) = w starting from seed. Convergence is declared when
// |m(z) - w| <= newton_tolerance * min(1, |w|), so small targets are resolved
// to relative accuracy. Non-analytic maps use the real-linear Newton step
// built from both Wirtinger derivatives.
cplx local_inverse(const MapSpec& m, cplx w, cplx seed, const EvalBudget& budget);

std::string describe(const MapSpec& m);

void to_json(nlohmann::json& j, const MapSpec& m);
MapSpec map_from_json(const nlohmann::json& j);

}  // namespace qcdyn
