#include "qcdyn/report.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "qcdyn/boettcher.hpp"
#include "qcdyn/dilatation.hpp"
#include "qcdyn/error.hpp"
#include "qcdyn/export.hpp"
#include "qcdyn/koenigs.hpp"
#include "qcdyn/motion.hpp"
#include "qcdyn/parallel.hpp"
#include "qcdyn/svg.hpp"

namespace qcdyn {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::pair<Task, const char*> kTaskNames[] = {
    {Task::Classify, "classify"}, {Task::Koenig, "koenig"}, {Task::Boettcher, "boettcher"},
    {Task::Omega, "omega"},       {Task::Motion, "motion"}, {Task::Verify, "verify"},
    {Task::All, "all"}};

// Residual flags allow this multiple of the configured tolerance.
constexpr double kResidualFactor = 10.0;
constexpr double kUniquenessThreshold = 1e-7;
constexpr double kNormalizationThreshold = 1e-6;

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<T>() : fallback;
}

json budget_json(const EvalBudget& b) {
  return {{"max_iterations", b.max_iterations},
          {"tolerance", b.tolerance},
          {"newton_max_steps", b.newton_max_steps},
          {"newton_tolerance", b.newton_tolerance}};
}

EvalBudget budget_from(const json& j) {
  EvalBudget b;
  b.max_iterations = get_or(j, "max_iterations", b.max_iterations);
  b.tolerance = get_or(j, "tolerance", b.tolerance);
  b.newton_max_steps = get_or(j, "newton_max_steps", b.newton_max_steps);
  b.newton_tolerance = get_or(j, "newton_tolerance", b.newton_tolerance);
  return b;
}

// Collects every file of a bundle; all writes go through here.
class BundleWriter {
 public:
  explicit BundleWriter(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, const std::string& content, TaskRecord& task) {
    write_text_file(dir_ / name, content);
    entries_.push_back({name, sha256_hex(content), content.size()});
    task.files.push_back(name);
  }

  const std::vector<FileEntry>& entries() const { return entries_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<FileEntry> entries_;
};

Flag flag(std::string name, double value, std::string relation, double threshold) {
  Flag f;
  f.name = std::move(name);
  f.value = value;
  f.relation = std::move(relation);
  f.threshold = threshold;
  f.passed = check_relation(value, f.relation, threshold);
  return f;
}

Flag csv_flag(std::string name, double value, std::string relation, double threshold,
              std::string file, std::string column) {
  Flag f = flag(std::move(name), value, std::move(relation), threshold);
  f.source = std::move(file);
  f.column = std::move(column);
  return f;
}

Flag json_flag(std::string name, double value, std::string relation, double threshold,
               std::string file, std::string pointer) {
  Flag f = flag(std::move(name), value, std::move(relation), threshold);
  f.source = std::move(file);
  f.pointer = std::move(pointer);
  return f;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Same radii, twice the angular resolution: shares every node of the first
// grid while the iteration runs independently.
PolarGrid refined_grid(const PolarGrid& g) {
  PolarGrid out = g;
  out.angles_per_ring = 2 * g.angles_per_ring;
  return out;
}

// The second uniqueness run also stops at a tighter tolerance, so the two
// runs reach different depths.
EvalBudget tightened(EvalBudget b) {
  b.tolerance = std::max(b.tolerance / 10.0, 1e-15);
  return b;
}

struct Context {
  const ExperimentConfig& cfg;
  BundleWriter& out;
  bool tables;  // false for the checks-only pipeline
  PolarGrid grid;
  std::optional<FixedPointReport> fixed_point;

  const FixedPointReport& classification() {
    if (!fixed_point) fixed_point = classify_fixed_point(cfg.map, cfg.budget);
    return *fixed_point;
  }
};

void task_classify(Context& ctx, TaskRecord& rec) {
  const FixedPointReport& rep = ctx.classification();
  rec.summary = summary_json(rep);
  rec.flags.push_back(flag("classification_conclusive", rep.inconclusive ? 1.0 : 0.0, "==", 0.0));
  ctx.out.add("classify.json", dump(rec.summary), rec);
}

void task_koenig(Context& ctx, TaskRecord& rec) {
  const FixedPointReport& fp = ctx.classification();
  const bool repelling = fp.cls == FixedPointClass::Repelling;
  if (fp.cls != FixedPointClass::Attracting && !repelling)
    throw Error(ErrorKind::WrongClass, std::string("koenig needs an attracting or repelling point, got ") +
                                           std::string(to_string(fp.cls)));
  auto solve = [&](const PolarGrid& g, const EvalBudget& b) {
    return repelling ? koenigs_backward(ctx.cfg.map, g, b) : koenigs_forward(ctx.cfg.map, g, b);
  };
  const CoordinateGrid psi = solve(ctx.grid, ctx.cfg.budget);
  const CoordinateGrid psi2 = solve(refined_grid(ctx.grid), tightened(ctx.cfg.budget));
  const UniquenessReport uq = uniqueness_check(psi, psi2);

  json s = summary_json(psi);
  s["scheme"] = repelling ? "backward" : "forward";
  s["uniqueness"] = {{"ratio_mean", complex_json(uq.ratio_mean)},
                     {"ratio_dev", uq.ratio_dev},
                     {"mean_offset", std::abs(uq.ratio_mean - 1.0)},
                     {"overlap", uq.overlap}};
  const double limit = kResidualFactor * ctx.cfg.budget.tolerance;
  if (ctx.tables) {
    ctx.out.add("koenig.csv", coordinate_grid_csv(psi), rec);
    rec.flags.push_back(csv_flag("residual", psi.max_residual(), "<=", limit, "koenig.csv", "residual"));
  } else {
    rec.flags.push_back(flag("residual", psi.max_residual(), "<=", limit));
  }
  if (!repelling) {
    const double delta = ctx.cfg.control_delta > 0.0 ? ctx.cfg.control_delta : ctx.grid.outer_radius();
    const ControlReport cr = control_condition(ctx.cfg.map, delta, ctx.cfg.control_n_max, 12);
    s["control"] = summary_json(cr);
    rec.flags.push_back(json_flag("control_upper", cr.ratio_max, "<", 1e12, "koenig.json", "/control/ratio_max"));
    rec.flags.push_back(json_flag("control_lower", cr.ratio_min, ">", 1e-12, "koenig.json", "/control/ratio_min"));
  }
  rec.flags.push_back(json_flag("normalization", psi.normalization_error, "<=", kNormalizationThreshold, "koenig.json",
                                "/normalization_error"));
  rec.flags.push_back(
      json_flag("uniqueness_dev", uq.ratio_dev, "<", kUniquenessThreshold, "koenig.json", "/uniqueness/ratio_dev"));
  rec.flags.push_back(json_flag("uniqueness_normalized", std::abs(uq.ratio_mean - 1.0), "<", kUniquenessThreshold,
                                "koenig.json", "/uniqueness/mean_offset"));
  rec.summary = s;
  ctx.out.add("koenig.json", dump(s), rec);
  if (ctx.cfg.emit_svg && ctx.tables) ctx.out.add("koenig_residual.svg", svg_residual_heatmap(psi), rec);
}

void task_boettcher(Context& ctx, TaskRecord& rec) {
  const FixedPointReport& fp = ctx.classification();
  if (fp.cls != FixedPointClass::Superattracting)
    throw Error(ErrorKind::WrongClass, std::string("boettcher needs a superattracting point, got ") +
                                           std::string(to_string(fp.cls)));
  const BoettcherResult res = boettcher_coordinate(ctx.cfg.map, ctx.grid, ctx.cfg.budget);
  const BoettcherResult res2 = boettcher_coordinate(ctx.cfg.map, refined_grid(ctx.grid), tightened(ctx.cfg.budget));
  const RootOfUnityMatch match = boettcher_uniqueness(res.psi, res2.psi, res.n);

  json s = summary_json(res);
  s["uniqueness"] = {{"root_index", match.root_index}, {"dev", match.dev}, {"overlap", match.overlap}};
  const double limit = kResidualFactor * ctx.cfg.budget.tolerance;
  if (ctx.tables) {
    ctx.out.add("boettcher.csv", coordinate_grid_csv(res.psi), rec);
    rec.flags.push_back(csv_flag("residual", res.psi.max_residual(), "<=", limit, "boettcher.csv", "residual"));
  } else {
    rec.flags.push_back(flag("residual", res.psi.max_residual(), "<=", limit));
  }
  rec.flags.push_back(json_flag("normalization", res.psi.normalization_error, "<=", kNormalizationThreshold,
                                "boettcher.json", "/normalization_error"));
  rec.flags.push_back(
      json_flag("uniqueness_dev", match.dev, "<", kUniquenessThreshold, "boettcher.json", "/uniqueness/dev"));
  rec.flags.push_back(
      json_flag("uniqueness_root", match.root_index, "==", 0.0, "boettcher.json", "/uniqueness/root_index"));
  rec.summary = s;
  ctx.out.add("boettcher.json", dump(s), rec);
  if (ctx.cfg.emit_svg && ctx.tables) ctx.out.add("boettcher_residual.svg", svg_residual_heatmap(res.psi), rec);
}

void task_omega(Context& ctx, TaskRecord& rec) {
  const BeltramiField field = beltrami_field(ctx.cfg.map, ctx.grid);
  const ModulusCurve curve = omega_curve(field);
  json s = summary_json(curve);
  s["sup_abs_mu"] = field.sup_abs();
  s["invalid_nodes"] = field.invalid_count;
  s["fd_step"] = field.fd_step;

  // Majorant check on a decade ladder below t_max, C = 1, sigma = 1/2.
  if (!curve.divergent) {
    double excess = -std::numeric_limits<double>::infinity();
    json ladder = json::array();
    for (double t = curve.t_max(); t >= curve.t.front(); t /= 10.0) {
      const TildeOmega tw = tilde_omega(curve, 1.0, 0.5, t);
      ladder.push_back({{"t", t}, {"sum", tw.sum}, {"bound", tw.bound}});
      excess = std::max(excess, tw.sum - tw.bound);
    }
    s["tilde_omega"] = {{"C", 1.0}, {"sigma", 0.5}, {"ladder", ladder}, {"max_excess", excess}};
    rec.flags.push_back(json_flag("tilde_omega_majorant", excess, "<=", 1e-12, "omega.json", "/tilde_omega/max_excess"));
  }
  try {
    const HolderFit fit = holder_mu_bound_check(ctx.cfg.map, ctx.grid);
    json h = summary_json(fit);
    if (fit.declared_alpha) {
      const double err = std::abs(fit.alpha_fit - *fit.declared_alpha);
      h["alpha_error"] = err;
      rec.flags.push_back(json_flag("holder_alpha", err, "<=", 0.1, "omega.json", "/holder/alpha_error"));
    }
    s["holder"] = h;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::FitFailed) throw;
    s["holder"] = {{"skipped", e.what()}};
  }
  rec.flags.push_back(flag("invalid_fraction", static_cast<double>(field.invalid_count) / field.mu.size(), "<=", 0.01));

  rec.summary = s;
  if (ctx.tables) {
    ctx.out.add("omega_curve.csv", modulus_curve_csv(curve), rec);
    ctx.out.add("beltrami_field.csv", beltrami_field_csv(field), rec);
  }
  ctx.out.add("omega.json", dump(s), rec);
  if (ctx.cfg.emit_svg && ctx.tables) {
    ctx.out.add("omega_curve.svg", svg_modulus_curve(curve), rec);
    ctx.out.add("mu_heatmap.svg", svg_mu_heatmap(field), rec);
  }
}

void task_motion(Context& ctx, TaskRecord& rec) {
  const MotionConfig& mc = ctx.cfg.motion;
  std::string kind = mc.kind;
  if (kind == "auto") {
    const FixedPointClass cls = ctx.classification().cls;
    if (cls == FixedPointClass::Attracting)
      kind = "koenig";
    else if (cls == FixedPointClass::Superattracting)
      kind = "boettcher";
    else
      throw Error(ErrorKind::WrongClass, "motions need an attracting or superattracting point");
  }
  MotionSample ms = kind == "koenig"
                        ? build_motion_koenig(ctx.cfg.map, mc.r > 0.0 ? mc.r : mc.delta / 2, mc.delta, mc.samples)
                        : build_motion_boettcher(ctx.cfg.map, mc.r > 0.0 ? mc.r : 0.01, mc.samples);
  const MotionAxiomReport ax = check_motion_axioms(ms);
  const json axioms = summary_json(ax);
  ctx.out.add("motion_axioms.json", dump(axioms), rec);
  rec.flags.push_back(json_flag("identity_at_zero", ax.identity_at_zero ? 1.0 : 0.0, "==", 1.0,
                                "motion_axioms.json", "/identity_at_zero"));
  rec.flags.push_back(json_flag("injective", ax.min_separation, ">", 0.0, "motion_axioms.json", "/min_separation"));
  rec.flags.push_back(json_flag("non_crossing", ax.crossing_margin, ">", 0.0, "motion_axioms.json", "/crossing_margin"));
  rec.flags.push_back(
      json_flag("holomorphic", ax.max_cr_residual, "<", kCrThreshold, "motion_axioms.json", "/max_cr_residual"));

  json s{{"kind", kind}, {"axioms", axioms}};
  const ExtendedMotion ext = extend_motion_radial(ms, annulus_grid(ms, mc.annulus_rings, mc.annulus_angles));
  json es = summary_json(ext);
  double k_half = 0.0;
  for (std::size_t ci = 0; ci < ms.c_samples.size(); ++ci)
    if (std::abs(ms.c_samples[ci]) <= 0.5 + 1e-12) k_half = std::max(k_half, ext.measured_k[ci]);
  es["max_k_half_disk"] = k_half;
  s["extension"] = es;
  ctx.out.add("motion_extension.json", dump(es), rec);
  rec.flags.push_back(json_flag("extension_k_below_one", k_half, "<", 1.0, "motion_extension.json", "/max_k_half_disk"));
  rec.flags.push_back(json_flag("extension_boundary", ext.boundary_reproduction_error, "<=", 1e-12,
                                "motion_extension.json", "/boundary_reproduction_error"));
  rec.summary = s;
  if (ctx.tables) ctx.out.add("motion.csv", motion_csv(ext), rec);
  if (ctx.cfg.emit_svg && ctx.tables) ctx.out.add("motion_k.svg", svg_motion_k(ext), rec);
}

std::vector<std::pair<Task, std::function<void(Context&, TaskRecord&)>>> pipeline(Context& ctx) {
  using Step = std::function<void(Context&, TaskRecord&)>;
  std::vector<std::pair<Task, Step>> steps;
  auto coordinate = [&]() -> std::pair<Task, Step> {
    if (ctx.classification().cls == FixedPointClass::Superattracting) return {Task::Boettcher, task_boettcher};
    return {Task::Koenig, task_koenig};
  };
  switch (ctx.cfg.task) {
    case Task::Classify: steps.emplace_back(Task::Classify, task_classify); break;
    case Task::Koenig: steps.emplace_back(Task::Koenig, task_koenig); break;
    case Task::Boettcher: steps.emplace_back(Task::Boettcher, task_boettcher); break;
    case Task::Omega: steps.emplace_back(Task::Omega, task_omega); break;
    case Task::Motion: steps.emplace_back(Task::Motion, task_motion); break;
    case Task::Verify:
    case Task::All:
      steps.emplace_back(Task::Classify, task_classify);
      steps.push_back(coordinate());
      steps.emplace_back(Task::Omega, task_omega);
      steps.emplace_back(Task::Motion, task_motion);
      break;
  }
  return steps;
}

json flag_json(const Flag& f) {
  json j{{"name", f.name}, {"passed", f.passed}, {"relation", f.relation}};
  j["value"] = std::isfinite(f.value) ? json(f.value) : json(nullptr);
  j["threshold"] = f.threshold;
  if (!f.source.empty()) j["source"] = f.source;
  if (!f.column.empty()) j["column"] = f.column;
  if (!f.pointer.empty()) j["pointer"] = f.pointer;
  return j;
}

Flag flag_from(const json& j) {
  Flag f;
  f.name = j.at("name").get<std::string>();
  f.passed = j.at("passed").get<bool>();
  f.relation = j.at("relation").get<std::string>();
  f.value = j.at("value").is_null() ? std::numeric_limits<double>::quiet_NaN() : j.at("value").get<double>();
  f.threshold = j.at("threshold").get<double>();
  f.source = get_or<std::string>(j, "source", "");
  f.column = get_or<std::string>(j, "column", "");
  f.pointer = get_or<std::string>(j, "pointer", "");
  return f;
}

double csv_column_max(const std::string& text, const std::string& column) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ManifestMismatch, "empty CSV");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) throw Error(ErrorKind::ManifestMismatch, "CSV has no column " + column);
  const auto col = static_cast<std::size_t>(it - header.begin());
  double best = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    for (std::size_t i = 0; i <= col; ++i)
      if (!std::getline(ls, cell, ',')) throw Error(ErrorKind::ManifestMismatch, "short CSV row");
    const double v = std::strtod(cell.c_str(), nullptr);
    if (std::isnan(v)) return v;
    best = std::max(best, v);
  }
  return best;
}

}  // namespace

std::string_view to_string(Task t) noexcept {
  for (auto [task, name] : kTaskNames)
    if (task == t) return name;
  return "unknown";
}

Task task_from_string(std::string_view s) {
  for (auto [task, name] : kTaskNames)
    if (s == name) return task;
  throw Error(ErrorKind::Config, "unknown task '" + std::string(s) + "'");
}

bool check_relation(double value, const std::string& relation, double threshold) {
  if (relation == "<=") return value <= threshold;
  if (relation == "<") return value < threshold;
  if (relation == ">") return value > threshold;
  if (relation == ">=") return value >= threshold;
  if (relation == "==") return value == threshold;
  throw Error(ErrorKind::ManifestMismatch, "unknown relation " + relation);
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  try {
    ExperimentConfig c;
    if (!j.contains("map")) throw Error(ErrorKind::Config, "config has no map");
    c.map = map_from_json(j.at("map"));
    c.task = task_from_string(get_or<std::string>(j, "task", "all"));
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      c.grid.r_min = get_or(g, "r_min", c.grid.r_min);
      c.grid.r_max = get_or(g, "r_max", c.grid.r_max);
      c.grid.rings = get_or(g, "rings", c.grid.rings);
      c.grid.angles = get_or(g, "angles", c.grid.angles);
    }
    if (j.contains("budget")) c.budget = budget_from(j.at("budget"));
    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir.string());
    c.emit_svg = get_or(j, "emit_svg", c.emit_svg);
    if (j.contains("motion")) {
      const json& m = j.at("motion");
      c.motion.kind = get_or(m, "kind", c.motion.kind);
      c.motion.r = get_or(m, "r", c.motion.r);
      c.motion.delta = get_or(m, "delta", c.motion.delta);
      c.motion.samples = get_or(m, "samples", c.motion.samples);
      c.motion.annulus_rings = get_or(m, "annulus_rings", c.motion.annulus_rings);
      c.motion.annulus_angles = get_or(m, "annulus_angles", c.motion.annulus_angles);
    }
    if (j.contains("control")) {
      c.control_delta = get_or(j.at("control"), "delta", c.control_delta);
      c.control_n_max = get_or(j.at("control"), "n_max", c.control_n_max);
    }
    if (j.contains("threads") && !j.at("threads").is_null()) c.threads = j.at("threads").get<int>();
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, e.what());
  }
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, path.string() + ": " + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json j{{"map", map},
         {"task", to_string(task)},
         {"grid", {{"r_min", grid.r_min}, {"r_max", grid.r_max}, {"rings", grid.rings}, {"angles", grid.angles}}},
         {"budget", budget_json(budget)},
         {"output_dir", output_dir.string()},
         {"emit_svg", emit_svg},
         {"motion",
          {{"kind", motion.kind},
           {"r", motion.r},
           {"delta", motion.delta},
           {"samples", motion.samples},
           {"annulus_rings", motion.annulus_rings},
           {"annulus_angles", motion.annulus_angles}}},
         {"control", {{"delta", control_delta}, {"n_max", control_n_max}}}};
  j["threads"] = threads ? json(*threads) : json(nullptr);
  return j;
}

void ExperimentConfig::validate() const {
  budget.validate();
  if (!(grid.r_min > 0.0) || !(grid.r_max > grid.r_min))
    throw Error(ErrorKind::Config, "grid needs 0 < r_min < r_max");
  if (grid.rings < 2 || grid.angles < 8) throw Error(ErrorKind::Config, "grid needs rings >= 2 and angles >= 8");
  if (grid.r_max > map.validity_radius())
    throw Error(ErrorKind::Config, fmt::format("grid radius {} exceeds the map's validity radius {}", grid.r_max,
                                               map.validity_radius()));
  const bool coordinates = task == Task::Koenig || task == Task::Boettcher || task == Task::All || task == Task::Verify;
  if (coordinates && grid.rings * grid.angles < 100)
    throw Error(ErrorKind::Config, "the uniqueness check needs a grid of at least 100 nodes");
  if (motion.kind != "auto" && motion.kind != "koenig" && motion.kind != "boettcher")
    throw Error(ErrorKind::Config, "motion kind must be auto, koenig or boettcher");
  if (motion.samples < 8 || motion.samples % 2 != 0) throw Error(ErrorKind::Config, "motion samples must be even and >= 8");
  if (control_n_max < 1) throw Error(ErrorKind::Config, "control n_max must be positive");
  if (threads && *threads < 1) throw Error(ErrorKind::Config, "threads must be positive");
  if (output_dir.empty()) throw Error(ErrorKind::Config, "output_dir is empty");
}

std::string ExperimentConfig::hash() const {
  json j = to_json();
  j.erase("output_dir");
  j.erase("threads");
  return sha256_hex(j.dump());
}

bool TaskRecord::passed() const {
  if (!completed) return false;
  for (const Flag& f : flags)
    if (!f.passed) return false;
  return true;
}

bool RunManifest::passed() const {
  for (const TaskRecord& t : tasks)
    if (!t.passed()) return false;
  return true;
}

json RunManifest::to_json() const {
  json tj = json::array();
  for (const TaskRecord& t : tasks) {
    json flags = json::array();
    for (const Flag& f : t.flags) flags.push_back(flag_json(f));
    json e{{"name", t.name},     {"completed", t.completed}, {"passed", t.passed()},
           {"wall_seconds", t.wall_seconds}, {"summary", t.summary}, {"flags", flags},
           {"files", t.files}};
    e["error"] = t.error.empty() ? json(nullptr) : json(t.error);
    tj.push_back(e);
  }
  json fj = json::array();
  for (const FileEntry& f : files) fj.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  return {{"tool", "qcdyn"},        {"tool_version", tool_version}, {"config_hash", config_hash},
          {"config", config},       {"tasks", tj},                  {"files", fj},
          {"passed", passed()},     {"wall_seconds", wall_seconds}};
}

RunManifest RunManifest::from_json(const json& j) {
  try {
    RunManifest m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config = j.at("config");
    m.wall_seconds = get_or(j, "wall_seconds", 0.0);
    for (const json& t : j.at("tasks")) {
      TaskRecord r;
      r.name = t.at("name").get<std::string>();
      r.completed = t.at("completed").get<bool>();
      r.error = get_or<std::string>(t, "error", "");
      r.wall_seconds = get_or(t, "wall_seconds", 0.0);
      r.summary = t.at("summary");
      for (const json& f : t.at("flags")) r.flags.push_back(flag_from(f));
      r.files = t.at("files").get<std::vector<std::string>>();
      m.tasks.push_back(std::move(r));
    }
    for (const json& f : j.at("files"))
      m.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>(),
                         f.at("bytes").get<std::uintmax_t>()});
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ManifestMismatch, std::string("malformed manifest: ") + e.what());
  }
}

RunManifest run(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const int previous_threads = thread_count();
  if (config.threads) set_thread_count(*config.threads);

  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec || !fs::is_directory(config.output_dir))
    throw Error(ErrorKind::Io, "cannot create output directory " + config.output_dir.string());

  RunManifest manifest;
  manifest.config_hash = config.hash();
  manifest.config = config.to_json();
  BundleWriter writer(config.output_dir);
  Context ctx{config, writer, config.task != Task::Verify, config.grid.make(), std::nullopt};

  std::vector<std::pair<Task, std::function<void(Context&, TaskRecord&)>>> steps;
  try {
    steps = pipeline(ctx);
  } catch (const Error& e) {
    // Classification itself failed; the pipeline falls back to what does not need it.
    TaskRecord rec{.name = "classify", .error = e.what()};
    manifest.tasks.push_back(rec);
    if (config.task == Task::All || config.task == Task::Verify) steps.emplace_back(Task::Omega, task_omega);
  }
  for (auto& [task, step] : steps) {
    TaskRecord rec;
    rec.name = std::string(to_string(task));
    const auto t0 = std::chrono::steady_clock::now();
    try {
      step(ctx, rec);
      rec.completed = true;
    } catch (const Error& e) {
      rec.error = e.what();
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest.tasks.push_back(std::move(rec));
  }
  if (config.threads) set_thread_count(previous_threads);

  manifest.files = writer.entries();
  manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text_file(config.output_dir / kManifestName, dump(manifest.to_json()));
  return manifest;
}

VerifyResult verify_bundle(const fs::path& dir) {
  const std::string text = read_text_file(dir / kManifestName);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ManifestMismatch, std::string("manifest is not JSON: ") + e.what());
  }
  const RunManifest m = RunManifest::from_json(j);
  VerifyResult res;
  auto problem = [&](std::string s) {
    res.ok = false;
    res.problems.push_back(std::move(s));
  };

  std::map<std::string, std::string> contents;
  for (const FileEntry& f : m.files) {
    std::string bytes;
    try {
      bytes = read_text_file(dir / f.path);
    } catch (const Error&) {
      problem(f.path + ": missing");
      continue;
    }
    if (sha256_hex(bytes) != f.sha256 || bytes.size() != f.bytes) {
      problem(f.path + ": checksum mismatch");
      continue;
    }
    contents.emplace(f.path, std::move(bytes));
  }

  for (const TaskRecord& t : m.tasks) {
    if (!t.completed) problem(t.name + ": task did not complete" + (t.error.empty() ? "" : " (" + t.error + ")"));
    for (const std::string& f : t.files)
      if (!std::any_of(m.files.begin(), m.files.end(), [&](const FileEntry& e) { return e.path == f; }))
        problem(t.name + ": " + f + " is not listed with a checksum");
    for (const Flag& f : t.flags) {
      const std::string where = t.name + "/" + f.name;
      if (!f.passed) {
        problem(where + ": recorded as failed");
        continue;
      }
      if (!check_relation(f.value, f.relation, f.threshold)) {
        problem(where + ": recorded value does not satisfy its threshold");
        continue;
      }
      if (f.source.empty()) continue;
      const auto it = contents.find(f.source);
      if (it == contents.end()) {
        problem(where + ": source " + f.source + " unavailable");
        continue;
      }
      double v = 0.0;
      try {
        if (!f.column.empty()) {
          v = csv_column_max(it->second, f.column);
        } else {
          const json doc = json::parse(it->second);
          const json& node = doc.at(json::json_pointer(f.pointer));
          v = node.is_boolean() ? (node.get<bool>() ? 1.0 : 0.0) : node.get<double>();
        }
      } catch (const std::exception& e) {
        problem(where + ": cannot recompute from " + f.source + ": " + e.what());
        continue;
      }
      if (!check_relation(v, f.relation, f.threshold)) problem(where + ": fails when recomputed from " + f.source);
    }
  }
  return res;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::Io, "SHA-256 failed");
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

}  // namespace qcdyn
