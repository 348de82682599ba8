#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcdyn/map_model.hpp"
#include "qcdyn/polar_grid.hpp"

namespace qcdyn {

inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr const char* kOutputRootEnv = "QCDYN_OUT";
inline constexpr const char* kManifestName = "manifest.json";

enum class Task { Classify, Koenig, Boettcher, Omega, Motion, Verify, All };

std::string_view to_string(Task t) noexcept;
Task task_from_string(std::string_view s);

struct GridConfig {
  double r_min = 1e-3;
  double r_max = 0.1;
  int rings = 12;
  int angles = 32;

  PolarGrid make() const { return PolarGrid::log_spaced(r_min, r_max, rings, angles); }
};

struct MotionConfig {
  std::string kind = "auto";  // auto, koenig or boettcher
  double r = 0.0;             // 0 picks a default for the kind
  double delta = 0.1;         // Koenig smallness radius
  int samples = 64;
  int annulus_rings = 12;
  int annulus_angles = 64;
};

struct ExperimentConfig {
  MapSpec map = MapSpec::linear(0.5);  // always replaced by from_json
  Task task = Task::All;
  GridConfig grid;
  EvalBudget budget;
  std::filesystem::path output_dir = "qcdyn_out";
  bool emit_svg = false;
  MotionConfig motion;
  double control_delta = 0.0;  // 0 uses grid.r_max
  int control_n_max = 60;
  std::optional<int> threads;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  // Throws ConfigError for an inconsistent configuration.
  void validate() const;
  // SHA-256 of the canonical config with output_dir and threads left out.
  std::string hash() const;
};

// A pass/fail check. When source is set the value can be recomputed from the
// stored artifact: the max of a CSV column, or a JSON pointer into a file.
struct Flag {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation = "<=";  // value <relation> threshold
  std::string source;
  std::string column;
  std::string pointer;
};

struct TaskRecord {
  std::string name;
  bool completed = false;
  std::string error;
  double wall_seconds = 0.0;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<Flag> flags;
  std::vector<std::string> files;

  bool passed() const;
};

struct FileEntry {
  std::string path;  // relative to the bundle directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string config_hash;
  std::string tool_version = kToolVersion;
  nlohmann::json config;
  std::vector<TaskRecord> tasks;
  std::vector<FileEntry> files;
  double wall_seconds = 0.0;

  bool passed() const;
  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

// Runs the task pipeline and writes artifacts plus manifest.json (last) into
// config.output_dir. Task failures are recorded and do not stop other tasks.
RunManifest run(const ExperimentConfig& config);

struct VerifyResult {
  bool ok = true;
  std::vector<std::string> problems;
};

// Recomputes checksums and recorded flags from the artifacts in dir.
// Throws IoError when there is no readable manifest and ManifestMismatch when
// it is malformed.
VerifyResult verify_bundle(const std::filesystem::path& dir);

std::string sha256_hex(const std::string& bytes);

bool check_relation(double value, const std::string& relation, double threshold);

}  // namespace qcdyn
