#include "qcdyn/export.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "qcdyn/error.hpp"

namespace qcdyn {

namespace {

// Non-finite values are spelled out so the CSV stays parseable.
std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

// JSON has no infinity; null marks a non-finite value.
nlohmann::json jnum(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

void append_row(std::string& out, std::initializer_list<double> cols) {
  bool first = true;
  for (double c : cols) {
    if (!first) out += ',';
    out += num(c);
    first = false;
  }
  out += '\n';
}

}  // namespace

nlohmann::json complex_json(cplx z) { return nlohmann::json::array({jnum(z.real()), jnum(z.imag())}); }

std::string modulus_curve_csv(const ModulusCurve& curve) {
  std::string out = "t,omega\n";
  for (std::size_t i = 0; i < curve.t.size(); ++i) append_row(out, {curve.t[i], curve.omega[i]});
  return out;
}

std::string beltrami_field_csv(const BeltramiField& field) {
  std::string out = "r,theta,re_mu,im_mu,abs_mu\n";
  for (std::size_t i = 0; i < field.mu.size(); ++i) {
    if (!field.valid[i]) continue;
    const cplx mu = field.mu[i];
    append_row(out, {field.grid.radius_of(i), field.grid.angle_of(i), mu.real(), mu.imag(), std::abs(mu)});
  }
  return out;
}

std::string coordinate_grid_csv(const CoordinateGrid& grid) {
  std::string out = "r,theta,re_psi,im_psi,depth,residual\n";
  const bool polar = grid.grid.size() == grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = polar ? grid.grid.radius_of(i) : std::abs(grid.nodes[i]);
    const double theta = polar ? grid.grid.angle_of(i) : std::arg(grid.nodes[i]);
    append_row(out, {r, theta, grid.psi[i].real(), grid.psi[i].imag(),
                     static_cast<double>(grid.depth[i]), grid.residual[i]});
  }
  return out;
}

std::string motion_csv(const MotionSample& ms) {
  std::string out = "c_re,c_im,r,theta,H_re,H_im\n";
  const double step = 2.0 * std::numbers::pi / ms.per_circle;
  for (std::size_t ci = 0; ci < ms.c_samples.size(); ++ci)
    for (std::size_t zi = 0; zi < ms.e_size(); ++zi) {
      const cplx h = ms.value(ci, zi);
      const double r = ms.is_inner(zi) ? ms.inner_radius : ms.outer_radius;
      const double theta = step * static_cast<double>(zi % ms.per_circle);
      append_row(out, {ms.c_samples[ci].real(), ms.c_samples[ci].imag(), r, theta, h.real(), h.imag()});
    }
  return out;
}

std::string motion_csv(const ExtendedMotion& ext) {
  std::string out = motion_csv(ext.base);
  const std::size_t nodes = ext.annulus.size();
  for (std::size_t ci = 0; ci < ext.base.c_samples.size(); ++ci)
    for (std::size_t i = 0; i < nodes; ++i) {
      const cplx h = ext.H[ci * nodes + i];
      const cplx c = ext.base.c_samples[ci];
      append_row(out, {c.real(), c.imag(), ext.annulus.radius_of(i), ext.annulus.angle_of(i), h.real(), h.imag()});
    }
  return out;
}

nlohmann::json summary_json(const ModulusCurve& curve) {
  return {{"samples", curve.t.size()},
          {"t_max", jnum(curve.t.empty() ? 0.0 : curve.t_max())},
          {"omega_max", jnum(curve.omega.empty() ? 0.0 : curve.omega.back())},
          {"integral_value", jnum(curve.integral_value)},
          {"divergent", curve.divergent},
          {"head_exponent", jnum(curve.head_exponent)},
          {"head_integral", jnum(curve.head_integral)}};
}

nlohmann::json summary_json(const CoordinateGrid& grid) {
  return {{"kind", grid.kind == CoordinateKind::Linearizer ? "linearizer" : "conjugacy"},
          {"nodes", grid.size()},
          {"multiplier", complex_json(grid.multiplier)},
          {"class", to_string(grid.cls)},
          {"tolerance", jnum(grid.tolerance)},
          {"max_residual", jnum(grid.max_residual())},
          {"max_depth", grid.max_depth()},
          {"normalization_error", jnum(grid.normalization_error)},
          {"boundary_mismatch", jnum(grid.boundary_mismatch)}};
}

nlohmann::json summary_json(const BoettcherResult& result) {
  nlohmann::json j = summary_json(result.psi);
  j["n"] = result.n;
  j["b"] = complex_json(result.b);
  j["max_factor_distance"] = jnum(result.max_factor_distance);
  return j;
}

nlohmann::json summary_json(const FixedPointReport& report) {
  nlohmann::json j{{"multiplier", complex_json(report.multiplier)},
                   {"abs_multiplier", jnum(std::abs(report.multiplier))},
                   {"class", to_string(report.cls)},
                   {"method", to_string(report.method)},
                   {"inconclusive", report.inconclusive}};
  if (report.cls == FixedPointClass::Superattracting) {
    j["n"] = report.local_degree;
    j["leading_coefficient"] = complex_json(report.leading_coefficient);
  }
  return j;
}

nlohmann::json summary_json(const ControlReport& report) {
  return {{"delta", jnum(report.delta)},         {"c_hat", jnum(report.c_hat)},
          {"max_n_checked", report.max_n_checked}, {"violated", report.violated},
          {"ratio_min", jnum(report.ratio_min)}, {"ratio_max", jnum(report.ratio_max)}};
}

nlohmann::json summary_json(const MotionAxiomReport& report) {
  return {{"identity_at_zero", report.identity_at_zero},
          {"min_separation", jnum(report.min_separation)},
          {"injective", report.injective},
          {"crossing_margin", jnum(report.crossing_margin)},
          {"non_crossing", report.non_crossing},
          {"max_cr_residual", jnum(report.max_cr_residual)},
          {"holomorphic", report.holomorphic},
          {"failures", report.failures},
          {"passed", report.passed()}};
}

nlohmann::json summary_json(const ExtendedMotion& ext) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t ci = 0; ci < ext.base.c_samples.size(); ++ci)
    rows.push_back({{"c", complex_json(ext.base.c_samples[ci])},
                    {"abs_c", jnum(std::abs(ext.base.c_samples[ci]))},
                    {"measured_k", jnum(ext.measured_k[ci])},
                    {"measured_K", jnum(ext.measured_K[ci])},
                    {"bound_K", jnum(ext.bound_K[ci])}});
  return {{"kind", to_string(ext.base.kind)},
          {"r", jnum(ext.base.r)},
          {"inner_radius", jnum(ext.base.inner_radius)},
          {"outer_radius", jnum(ext.base.outer_radius)},
          {"boundary_reproduction_error", jnum(ext.boundary_reproduction_error)},
          {"per_c", rows}};
}

nlohmann::json summary_json(const HolderFit& fit) {
  nlohmann::json j{{"c_prime", jnum(fit.c_prime)},
                   {"alpha_fit", jnum(fit.alpha_fit)},
                   {"points", fit.points},
                   {"passed", fit.passed}};
  j["declared_alpha"] = fit.declared_alpha ? nlohmann::json(*fit.declared_alpha) : nlohmann::json(nullptr);
  return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace qcdyn
