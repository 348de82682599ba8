#include <cmath>

#include <nlohmann/json.hpp>

#include "qcdyn/error.hpp"
#include "qcdyn/map_model.hpp"

namespace qcdyn {

namespace {

using nlohmann::json;

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2)
    throw Error(ErrorKind::Config, "complex numbers are written as [re, im]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json complex_list(const std::vector<cplx>& v) {
  json out = json::array();
  for (cplx z : v) out.push_back(complex_to_json(z));
  return out;
}

std::vector<cplx> complex_list_from(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::Config, "expected a list of complex numbers");
  std::vector<cplx> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(complex_from_json(e));
  return out;
}

// Infinite radii are written as null.
json radius_to_json(double r) { return std::isfinite(r) ? json(r) : json(nullptr); }

double radius_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return kInfiniteRadius;
  return j.at(key).get<double>();
}

}  // namespace

void to_json(json& j, const MapSpec& m) {
  std::visit(
      [&j](const auto& alt) {
        using T = std::decay_t<decltype(alt)>;
        if constexpr (std::is_same_v<T, PowerSeries>) {
          j = json{{"type", "power_series"},
                   {"coeffs", complex_list(alt.coeffs)},
                   {"radius", radius_to_json(alt.radius)}};
        } else if constexpr (std::is_same_v<T, Rational>) {
          j = json{{"type", "rational"},
                   {"numerator", complex_list(alt.numerator)},
                   {"denominator", complex_list(alt.denominator)},
                   {"radius", radius_to_json(alt.radius)}};
        } else if constexpr (std::is_same_v<T, MoebiusPower>) {
          j = json{{"type", "moebius_power"}, {"n", alt.n}, {"c", complex_to_json(alt.c)}};
        } else if constexpr (std::is_same_v<T, Perturbed>) {
          json base;
          to_json(base, alt.base);
          j = json{{"type", "perturbed"},
                   {"base", base},
                   {"eps", complex_to_json(alt.eps)},
                   {"alpha", alt.alpha}};
        } else {
          json parts = json::array();
          for (const auto& p : alt.parts) {
            json pj;
            to_json(pj, p);
            parts.push_back(pj);
          }
          j = json{{"type", "composite"}, {"parts", parts}};
        }
      },
      m.node().v);
}

MapSpec map_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw Error(ErrorKind::Config, "map description needs a \"type\" field");
  const auto type = j.at("type").get<std::string>();
  try {
    if (type == "power_series")
      return MapSpec::power_series(complex_list_from(j.at("coeffs")), radius_from(j, "radius"));
    if (type == "rational")
      return MapSpec::rational(complex_list_from(j.at("numerator")),
                               complex_list_from(j.at("denominator")), radius_from(j, "radius"));
    if (type == "moebius_power")
      return MapSpec::moebius_power(j.at("n").get<int>(),
                                    j.contains("c") ? complex_from_json(j.at("c")) : cplx{});
    if (type == "power") return MapSpec::power(j.at("n").get<int>());
    if (type == "perturbed")
      return MapSpec::perturbed(map_from_json(j.at("base")), complex_from_json(j.at("eps")),
                                j.value("alpha", 1.0));
    if (type == "composite") {
      std::vector<MapSpec> parts;
      for (const auto& p : j.at("parts")) parts.push_back(map_from_json(p));
      return MapSpec::composite(std::move(parts));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("malformed ") + type + " map: " + e.what());
  }
  throw Error(ErrorKind::Config, "unknown map type \"" + type + "\"");
}

}  // namespace qcdyn
