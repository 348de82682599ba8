#include "qcdyn/map_model.hpp"

#include <cmath>
#include <sstream>

#include "qcdyn/error.hpp"

namespace qcdyn {

namespace {

// Horner evaluation of sum_{k>=0} c_k z^k.
cplx horner(const std::vector<cplx>& c, cplx z) {
  cplx acc{0.0, 0.0};
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

cplx horner_derivative(const std::vector<cplx>& c, cplx z) {
  cplx acc{0.0, 0.0};
  for (std::size_t k = c.size(); k-- > 1;) acc = acc * z + static_cast<double>(k) * c[k];
  return acc;
}

// Sum of |c_k| |z|^k, used as the scale against which a denominator is
// declared to vanish.
double magnitude_scale(const std::vector<cplx>& c, double r) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * r + std::abs(*it);
  return acc;
}

constexpr double kPoleTolerance = 1e-14;

void check_radius(double radius, cplx z) {
  if (std::abs(z) > radius) {
    std::ostringstream os;
    os << "|z| = " << std::abs(z) << " exceeds validity radius " << radius;
    throw Error(ErrorKind::Domain, os.str());
  }
}

cplx checked_divide(cplx num, cplx den, double scale) {
  if (!(std::abs(den) > kPoleTolerance * std::max(1.0, scale)))
    throw Error(ErrorKind::Domain, "denominator vanishes");
  return num / den;
}

// |z|^(alpha+1) written as z * conj(z) * |z|^(alpha-1); zero at the origin.
double perturbation_modulus(cplx z, double alpha) {
  const double r = std::abs(z);
  if (r == 0.0) return 0.0;
  return std::pow(r, alpha + 1.0);
}

struct Evaluator {
  cplx z;

  cplx operator()(const PowerSeries& p) const {
    check_radius(p.radius, z);
    cplx acc{0.0, 0.0};
    for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) acc = (acc + *it) * z;
    return acc;
  }
  cplx operator()(const Rational& q) const {
    check_radius(q.radius, z);
    const cplx den = horner(q.denominator, z);
    return checked_divide(horner(q.numerator, z), den, magnitude_scale(q.denominator, std::abs(z)));
  }
  cplx operator()(const MoebiusPower& mp) const {
    const cplx d1 = 1.0 + mp.c * z;
    const cplx u = checked_divide(z, d1, 1.0 + std::abs(mp.c * z));
    cplx un = u;
    for (int i = 1; i < mp.n; ++i) un *= u;
    const cplx d2 = 1.0 - mp.c * un;
    return checked_divide(un, d2, 1.0 + std::abs(mp.c * un));
  }
  cplx operator()(const Perturbed& p) const {
    const cplx b = evaluate(p.base, z);
    return b + p.eps * p.base_slope * perturbation_modulus(z, p.alpha);
  }
  cplx operator()(const Composite& c) const {
    cplx w = z;
    for (auto it = c.parts.rbegin(); it != c.parts.rend(); ++it) w = evaluate(*it, w);
    return w;
  }
};

struct JetEvaluator {
  cplx z;

  Jet operator()(const PowerSeries& p) const {
    check_radius(p.radius, z);
    cplx acc{0.0, 0.0};
    for (std::size_t k = p.coeffs.size(); k-- > 0;)
      acc = acc * z + static_cast<double>(k + 1) * p.coeffs[k];
    return {acc, {0.0, 0.0}};
  }
  Jet operator()(const Rational& q) const {
    check_radius(q.radius, z);
    const cplx n = horner(q.numerator, z);
    const cplx d = horner(q.denominator, z);
    const cplx dn = horner_derivative(q.numerator, z);
    const cplx dd = horner_derivative(q.denominator, z);
    const double scale = magnitude_scale(q.denominator, std::abs(z));
    return {checked_divide(dn * d - n * dd, d * d, scale * scale), {0.0, 0.0}};
  }
  Jet operator()(const MoebiusPower& mp) const {
    // chain rule through M, q_n, M^{-1}
    const cplx d1 = 1.0 + mp.c * z;
    const cplx u = checked_divide(z, d1, 1.0 + std::abs(mp.c * z));
    cplx un1{1.0, 0.0};
    for (int i = 1; i < mp.n; ++i) un1 *= u;
    const cplx un = un1 * u;
    const cplx d2 = 1.0 - mp.c * un;
    checked_divide(un, d2, 1.0 + std::abs(mp.c * un));
    const cplx dm = 1.0 / (d1 * d1);
    const cplx dq = static_cast<double>(mp.n) * un1;
    const cplx dminv = 1.0 / (d2 * d2);
    return {dminv * dq * dm, {0.0, 0.0}};
  }
  Jet operator()(const Perturbed& p) const {
    const Jet b = symbolic_wirtinger(p.base, z);
    const double r = std::abs(z);
    if (r == 0.0) return b;
    // d/dz |z|^(a+1) = (a+1)/2 |z|^(a-1) conj(z), d/dzbar = (a+1)/2 |z|^(a-1) z
    const cplx k = p.eps * p.base_slope * (0.5 * (p.alpha + 1.0) * std::pow(r, p.alpha - 1.0));
    return {b.dz + k * std::conj(z), b.dzbar + k * z};
  }
  Jet operator()(const Composite& c) const {
    cplx w = z;
    Jet acc{{1.0, 0.0}, {0.0, 0.0}};
    for (auto it = c.parts.rbegin(); it != c.parts.rend(); ++it) {
      const Jet g = symbolic_wirtinger(*it, w);
      // (G o F)_z = G_w F_z + G_wbar conj(F_zbar); (G o F)_zbar = G_w F_zbar + G_wbar conj(F_z)
      acc = Jet{g.dz * acc.dz + g.dzbar * std::conj(acc.dzbar),
                g.dz * acc.dzbar + g.dzbar * std::conj(acc.dz)};
      w = evaluate(*it, w);
    }
    return acc;
  }
};

std::shared_ptr<const MapNode> make_node(auto&& alt) {
  return std::make_shared<const MapNode>(MapNode{std::forward<decltype(alt)>(alt)});
}

}  // namespace

MapSpec MapSpec::power_series(std::vector<cplx> coeffs, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::Config, "power series radius must be positive");
  if (coeffs.empty()) throw Error(ErrorKind::Config, "power series needs at least a_1");
  return MapSpec(make_node(PowerSeries{std::move(coeffs), radius}));
}

MapSpec MapSpec::rational(std::vector<cplx> numerator, std::vector<cplx> denominator,
                          double radius) {
  if (numerator.empty() || denominator.empty())
    throw Error(ErrorKind::Config, "rational map needs numerator and denominator");
  if (numerator.front() != cplx{0.0, 0.0})
    throw Error(ErrorKind::Config, "rational map must fix 0 (numerator constant term nonzero)");
  if (denominator.front() == cplx{0.0, 0.0})
    throw Error(ErrorKind::Config, "rational map denominator vanishes at 0");
  if (!(radius > 0.0)) throw Error(ErrorKind::Config, "rational radius must be positive");
  return MapSpec(make_node(Rational{std::move(numerator), std::move(denominator), radius}));
}

MapSpec MapSpec::moebius_power(int n, cplx c) {
  if (n < 1) throw Error(ErrorKind::Config, "Moebius power degree must be >= 1");
  return MapSpec(make_node(MoebiusPower{n, c}));
}

MapSpec MapSpec::perturbed(MapSpec base, cplx eps, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::Config, "perturbation exponent must be positive");
  const cplx slope = derivative(base, cplx{0.0, 0.0});
  return MapSpec(make_node(Perturbed{std::move(base), eps, alpha, slope}));
}

MapSpec MapSpec::composite(std::vector<MapSpec> parts) {
  if (parts.empty()) throw Error(ErrorKind::Config, "composite needs at least one part");
  return MapSpec(make_node(Composite{std::move(parts)}));
}

double MapSpec::validity_radius() const {
  return std::visit(
      [](const auto& alt) -> double {
        using T = std::decay_t<decltype(alt)>;
        if constexpr (std::is_same_v<T, PowerSeries> || std::is_same_v<T, Rational>)
          return alt.radius;
        else if constexpr (std::is_same_v<T, MoebiusPower>)
          return kInfiniteRadius;
        else if constexpr (std::is_same_v<T, Perturbed>)
          return alt.base.validity_radius();
        else
          return alt.parts.back().validity_radius();
      },
      node_->v);
}

bool MapSpec::is_analytic() const {
  return std::visit(
      [](const auto& alt) -> bool {
        using T = std::decay_t<decltype(alt)>;
        if constexpr (std::is_same_v<T, Perturbed>) {
          return alt.eps == cplx{0.0, 0.0} && alt.base.is_analytic();
        } else if constexpr (std::is_same_v<T, Composite>) {
          for (const auto& p : alt.parts)
            if (!p.is_analytic()) return false;
          return true;
        } else {
          return true;
        }
      },
      node_->v);
}

cplx MapSpec::operator()(cplx z) const { return evaluate(*this, z); }

void EvalBudget::validate() const {
  if (max_iterations <= 0 || newton_max_steps <= 0)
    throw Error(ErrorKind::Config, "iteration caps must be positive");
  if (!(tolerance > 0.0) || !(tolerance < 1.0))
    throw Error(ErrorKind::Config, "tolerance must lie in (0, 1)");
  if (!(newton_tolerance > 0.0)) throw Error(ErrorKind::Config, "newton tolerance must be positive");
}

cplx evaluate(const MapSpec& m, cplx z) { return std::visit(Evaluator{z}, m.node().v); }

std::vector<cplx> iterate(const MapSpec& m, cplx z, int k, const EvalBudget& budget) {
  if (k < 0) throw Error(ErrorKind::OutOfRange, "iteration count must be nonnegative");
  if (k > budget.max_iterations)
    throw Error(ErrorKind::OutOfRange, "iteration count exceeds budget");
  const double radius = m.validity_radius();
  std::vector<cplx> orbit;
  orbit.reserve(static_cast<std::size_t>(k) + 1);
  orbit.push_back(z);
  for (int j = 0; j < k; ++j) {
    const cplx next = evaluate(m, orbit.back());
    if (!(std::abs(next) <= radius)) {
      std::ostringstream os;
      os << "iterate " << j + 1 << " left the domain (|z| = " << std::abs(next) << ")";
      throw Error(ErrorKind::OrbitEscape, os.str());
    }
    orbit.push_back(next);
  }
  return orbit;
}

cplx derivative(const MapSpec& m, cplx z) {
  if (!m.is_analytic()) throw Error(ErrorKind::NotAnalytic, "map has a non-holomorphic part");
  return symbolic_wirtinger(m, z).dz;
}

Jet symbolic_wirtinger(const MapSpec& m, cplx z) { return std::visit(JetEvaluator{z}, m.node().v); }

cplx local_inverse(const MapSpec& m, cplx w, cplx seed, const EvalBudget& budget) {
  const double target = budget.newton_tolerance * std::min(1.0, std::abs(w));
  cplx z = seed;
  for (int step = 0; step <= budget.newton_max_steps; ++step) {
    const cplx r = w - evaluate(m, z);
    if (std::abs(r) <= target || r == cplx{0.0, 0.0}) return z;
    if (step == budget.newton_max_steps) break;
    const Jet j = symbolic_wirtinger(m, z);
    const double det = std::norm(j.dz) - std::norm(j.dzbar);
    if (!(std::abs(det) > 1e-300) || !(std::norm(j.dz) > 1e-28 * std::norm(z)))
      throw Error(ErrorKind::DerivativeVanished, "Jacobian degenerate during inversion");
    // solve f_z dz + f_zbar conj(dz) = r
    const cplx dz = (std::conj(j.dz) * r - j.dzbar * std::conj(r)) / det;
    z += dz;
    if (std::abs(dz) <= 1e-17 * std::abs(z) && std::abs(r) <= 16.0 * target) return z;
  }
  std::ostringstream os;
  os << "Newton did not converge for target " << w << " from seed " << seed;
  throw Error(ErrorKind::NoConvergence, os.str());
}

std::string describe(const MapSpec& m) {
  return std::visit(
      [](const auto& alt) -> std::string {
        using T = std::decay_t<decltype(alt)>;
        std::ostringstream os;
        if constexpr (std::is_same_v<T, PowerSeries>) {
          os << "power_series[" << alt.coeffs.size() << " terms]";
        } else if constexpr (std::is_same_v<T, Rational>) {
          os << "rational[" << alt.numerator.size() - 1 << "/" << alt.denominator.size() - 1 << "]";
        } else if constexpr (std::is_same_v<T, MoebiusPower>) {
          os << "moebius_power(n=" << alt.n << ", c=" << alt.c << ")";
        } else if constexpr (std::is_same_v<T, Perturbed>) {
          os << "perturbed(" << describe(alt.base) << ", eps=" << alt.eps << ", alpha=" << alt.alpha
             << ")";
        } else {
          os << "composite(";
          for (std::size_t i = 0; i < alt.parts.size(); ++i)
            os << (i ? ", " : "") << describe(alt.parts[i]);
          os << ")";
        }
        return os.str();
      },
      m.node().v);
}

}  // namespace qcdyn
