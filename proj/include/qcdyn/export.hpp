#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "qcdyn/boettcher.hpp"
#include "qcdyn/dilatation.hpp"
#include "qcdyn/koenigs.hpp"
#include "qcdyn/motion.hpp"

namespace qcdyn {

// All CSV numbers are written with 17 significant digits so a payload
// round-trips exactly and two runs can be compared byte for byte.
std::string modulus_curve_csv(const ModulusCurve& curve);
std::string beltrami_field_csv(const BeltramiField& field);
std::string coordinate_grid_csv(const CoordinateGrid& grid);
// One row per (c, point of E), then one per (c, annulus node) when an
// extension is given.
std::string motion_csv(const MotionSample& ms);
std::string motion_csv(const ExtendedMotion& ext);

nlohmann::json summary_json(const ModulusCurve& curve);
nlohmann::json summary_json(const CoordinateGrid& grid);
nlohmann::json summary_json(const BoettcherResult& result);
nlohmann::json summary_json(const FixedPointReport& report);
nlohmann::json summary_json(const ControlReport& report);
nlohmann::json summary_json(const MotionAxiomReport& report);
nlohmann::json summary_json(const ExtendedMotion& ext);
nlohmann::json summary_json(const HolderFit& fit);

nlohmann::json complex_json(cplx z);

// Writes the whole string or throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace qcdyn
