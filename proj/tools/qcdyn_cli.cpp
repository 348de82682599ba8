#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qcdyn/error.hpp"
#include "qcdyn/export.hpp"
#include "qcdyn/report.hpp"

namespace fs = std::filesystem;
using namespace qcdyn;

namespace {

struct Overrides {
  std::string map;
  std::string out;
  bool svg = false;
  std::optional<int> depth;
  std::optional<double> tol;
  std::optional<double> r_min, r_max;
  std::optional<int> rings, angles;
  std::optional<int> threads;
  std::string motion_kind;
  std::optional<double> motion_r, motion_delta;
};

fs::path output_root() {
  const char* env = std::getenv(kOutputRootEnv);
  return env && *env ? fs::path(env) : fs::path("qcdyn_out");
}

// A relative output directory lives under the output root.
fs::path resolve_out(const fs::path& p) { return p.is_absolute() ? p : output_root() / p; }

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--out", o.out, "Output directory (default: $" + std::string(kOutputRootEnv) + "/<task>)");
  cmd->add_flag("--svg", o.svg, "Also write SVG plots");
  cmd->add_option("--depth", o.depth, "Maximum iteration depth")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", o.tol, "Convergence tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
}

void add_map_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--map", o.map, "Map as a JSON file or inline JSON document")->required();
  cmd->add_option("--r-min", o.r_min, "Innermost grid radius");
  cmd->add_option("--r-max", o.r_max, "Outermost grid radius");
  cmd->add_option("--rings", o.rings, "Grid rings");
  cmd->add_option("--angles", o.angles, "Nodes per ring");
}

nlohmann::json load_map(const std::string& arg) {
  const bool inline_doc = !arg.empty() && (arg.front() == '{' || arg.front() == '[');
  const std::string text = inline_doc ? arg : read_text_file(arg);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("map: ") + e.what());
  }
}

void apply(nlohmann::json& cfg, const Overrides& o) {
  if (!o.map.empty()) cfg["map"] = load_map(o.map);
  if (o.depth) cfg["budget"]["max_iterations"] = *o.depth;
  if (o.tol) cfg["budget"]["tolerance"] = *o.tol;
  if (o.r_min) cfg["grid"]["r_min"] = *o.r_min;
  if (o.r_max) cfg["grid"]["r_max"] = *o.r_max;
  if (o.rings) cfg["grid"]["rings"] = *o.rings;
  if (o.angles) cfg["grid"]["angles"] = *o.angles;
  if (o.threads) cfg["threads"] = *o.threads;
  if (o.svg) cfg["emit_svg"] = true;
  if (!o.motion_kind.empty()) cfg["motion"]["kind"] = o.motion_kind;
  if (o.motion_r) cfg["motion"]["r"] = *o.motion_r;
  if (o.motion_delta) cfg["motion"]["delta"] = *o.motion_delta;
}

int report(const RunManifest& m, const fs::path& dir) {
  for (const TaskRecord& t : m.tasks) {
    std::cout << (t.passed() ? "PASS " : "FAIL ") << t.name;
    if (!t.error.empty()) std::cout << "  error: " << t.error;
    std::cout << "  (" << t.wall_seconds << " s)\n";
    for (const Flag& f : t.flags)
      std::cout << "  " << (f.passed ? "ok   " : "FAIL ") << f.name << " = " << f.value << " " << f.relation << " "
                << f.threshold << "\n";
  }
  std::cout << "wrote " << m.files.size() + 1 << " files to " << dir.string() << "\n";
  return m.passed() ? 0 : 1;
}

int run_config(nlohmann::json cfg, const Overrides& o, const std::string& default_dir) {
  apply(cfg, o);
  fs::path out = !o.out.empty() ? fs::path(o.out) : fs::path(cfg.value("output_dir", default_dir));
  cfg["output_dir"] = resolve_out(out).string();
  const ExperimentConfig config = ExperimentConfig::from_json(cfg);
  return report(run(config), config.output_dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcdyn: normal forms and holomorphic motions for map germs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  Overrides o;
  std::string config_path;
  std::string verify_dir;

  const std::pair<const char*, const char*> tasks[] = {
      {"classify", "Classify the fixed point at 0"},
      {"koenig", "Koenigs linearizer on a polar grid"},
      {"boettcher", "Boettcher coordinate on a polar grid"},
      {"omega", "Beltrami field, modulus curve and Holder fit"},
      {"motion", "Holomorphic motion, axioms and radial extension"}};
  for (auto [name, help] : tasks) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common(cmd, o);
    add_map_options(cmd, o);
    if (std::string(name) == "motion") {
      cmd->add_option("--kind", o.motion_kind, "auto, koenig or boettcher")
          ->check(CLI::IsMember({"auto", "koenig", "boettcher"}));
      cmd->add_option("--r", o.motion_r, "Radius of the inner circle");
      cmd->add_option("--delta", o.motion_delta, "Smallness radius for the Koenig motion");
    }
  }
  CLI::App* run_cmd = app.add_subcommand("run", "Run an experiment config");
  run_cmd->add_option("config", config_path, "Config JSON file")->required()->check(CLI::ExistingFile);
  add_common(run_cmd, o);
  CLI::App* verify_cmd = app.add_subcommand("verify", "Re-check a run directory against its manifest");
  verify_cmd->add_option("dir", verify_dir, "Run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*verify_cmd) {
      const VerifyResult res = verify_bundle(verify_dir);
      for (const std::string& p : res.problems) std::cout << "FAIL " << p << "\n";
      std::cout << (res.ok ? "bundle verified\n" : "bundle verification failed\n");
      return res.ok ? 0 : 1;
    }
    if (*run_cmd) {
      const std::string text = read_text_file(config_path);
      nlohmann::json cfg;
      try {
        cfg = nlohmann::json::parse(text);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, config_path + ": " + e.what());
      }
      return run_config(std::move(cfg), o, "run");
    }
    for (CLI::App* sub : app.get_subcommands()) {
      nlohmann::json cfg{{"task", sub->get_name()}};
      return run_config(std::move(cfg), o, sub->get_name());
    }
  } catch (const Error& e) {
    std::cerr << "qcdyn: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
