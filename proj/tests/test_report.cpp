#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qcdyn/export.hpp"
#include "qcdyn/report.hpp"
#include "qcdyn/svg.hpp"
#include "test_util.hpp"

using namespace qcdyn;
using nlohmann::json;
using testutil::error_kind;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("qcdyn_report_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

const json kMoebiusMap = {{"type", "rational"}, {"numerator", {0, 0.5}}, {"denominator", {1, 1}}};

json base_config(const fs::path& out, const std::string& task, json map = kMoebiusMap) {
  return {{"map", map},
          {"task", task},
          {"grid", {{"r_min", 1e-3}, {"r_max", 0.1}, {"rings", 8}, {"angles", 16}}},
          {"budget", {{"max_iterations", 80}, {"tolerance", 1e-13}}},
          {"output_dir", out.string()},
          {"motion", {{"samples", 32}}}};
}

const TaskRecord& find_task(const RunManifest& m, const std::string& name) {
  for (const TaskRecord& t : m.tasks)
    if (t.name == name) return t;
  FAIL("task not in manifest: " << name);
  return m.tasks.front();
}

bool has_problem(const VerifyResult& v, const std::string& needle) {
  return std::any_of(v.problems.begin(), v.problems.end(),
                     [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config parsing and validation") {
  TempDir tmp;
  json j = base_config(tmp.path, "koenig");
  const ExperimentConfig c = ExperimentConfig::from_json(j);
  CHECK(c.task == Task::Koenig);
  CHECK(c.grid.rings == 8);
  CHECK(c.budget.max_iterations == 80);
  CHECK(c.motion.samples == 32);
  CHECK(ExperimentConfig::from_json(c.to_json()).to_json() == c.to_json());

  // output_dir and threads do not enter the hash
  json other = j;
  other["output_dir"] = "/somewhere/else";
  other["threads"] = 3;
  CHECK(ExperimentConfig::from_json(other).hash() == c.hash());
  other["grid"]["rings"] = 9;
  CHECK(ExperimentConfig::from_json(other).hash() != c.hash());

  auto bad = [&](auto mutate) {
    json b = j;
    mutate(b);
    return error_kind([&] { ExperimentConfig::from_json(b); });
  };
  CHECK(bad([](json& b) { b.erase("map"); }) == ErrorKind::Config);
  CHECK(bad([](json& b) { b["task"] = "plot"; }) == ErrorKind::Config);
  CHECK(bad([](json& b) { b["grid"]["r_min"] = 0.5; }) == ErrorKind::Config);
  CHECK(bad([](json& b) { b["grid"]["angles"] = 4; }) == ErrorKind::Config);
  CHECK(bad([](json& b) { b["budget"]["tolerance"] = 2.0; }) == ErrorKind::Config);
  CHECK(bad([](json& b) { b["grid"]["rings"] = "many"; }) == ErrorKind::Config);
  CHECK(bad([](json& b) {
          b["map"] = {{"type", "power_series"}, {"coeffs", {0.5, 1}}, {"radius", 0.05}};
        }) == ErrorKind::Config);
  CHECK(bad([](json& b) { b["motion"]["kind"] = "spiral"; }) == ErrorKind::Config);
  CHECK(bad([](json& b) { b["grid"]["rings"] = 4; }) == ErrorKind::Config);
  json small = j;
  small["task"] = "omega";
  small["grid"]["rings"] = 4;
  CHECK_NOTHROW(ExperimentConfig::from_json(small));
}

TEST_CASE("run: classify on q_2") {
  TempDir tmp;
  const RunManifest m = run(ExperimentConfig::from_json(base_config(tmp.path, "classify", {{"type", "power"}, {"n", 2}})));
  CHECK(m.passed());
  const TaskRecord& t = find_task(m, "classify");
  CHECK(t.summary["class"] == "superattracting");
  CHECK(t.summary["n"] == 2);
  CHECK(fs::exists(tmp.path / "manifest.json"));
  CHECK(fs::exists(tmp.path / "classify.json"));
}

TEST_CASE("run: koenig on the Moebius map") {
  TempDir tmp;
  json cfg = base_config(tmp.path, "koenig");
  cfg["emit_svg"] = true;
  const RunManifest m = run(ExperimentConfig::from_json(cfg));
  CHECK(m.passed());
  const TaskRecord& t = find_task(m, "koenig");
  CHECK(t.summary["max_residual"].get<double>() < 1e-8);
  CHECK(t.summary["uniqueness"]["ratio_dev"].get<double>() < 1e-8);
  CHECK(t.summary["control"]["c_hat"].get<double>() <= 1.3);

  const std::string csv = read_text_file(tmp.path / "koenig.csv");
  CHECK(csv.rfind("r,theta,re_psi,im_psi,depth,residual\n", 0) == 0);
  CHECK(count_lines(csv) == 1 + 8 * 16);
  const std::string svg = read_text_file(tmp.path / "koenig_residual.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);

  const json man = json::parse(read_text_file(tmp.path / "manifest.json"));
  CHECK(man["tool_version"] == kToolVersion);
  CHECK(man["config_hash"] == ExperimentConfig::from_json(cfg).hash());
  CHECK(man["files"].size() == 3);
  for (const json& f : man["files"]) CHECK(f["sha256"].get<std::string>().size() == 64);
}

TEST_CASE("run: omega on the perturbed family") {
  TempDir tmp;
  json cfg = base_config(tmp.path, "omega",
                         {{"type", "perturbed"},
                          {"base", {{"type", "power_series"}, {"coeffs", {0.5}}, {"radius", nullptr}}},
                          {"eps", 0.1},
                          {"alpha", 1}});
  cfg["grid"] = {{"r_min", 1e-4}, {"r_max", 1.0}, {"rings", 40}, {"angles", 32}};
  cfg["emit_svg"] = true;
  const RunManifest m = run(ExperimentConfig::from_json(cfg));
  CHECK(m.passed());
  const TaskRecord& t = find_task(m, "omega");
  CHECK(std::abs(t.summary["integral_value"].get<double>() - 0.10536) < 5e-3);
  CHECK(t.summary["divergent"] == false);
  CHECK(std::abs(t.summary["holder"]["alpha_fit"].get<double>() - 1.0) < 0.1);

  const std::string curve = read_text_file(tmp.path / "omega_curve.csv");
  CHECK(curve.rfind("t,omega\n", 0) == 0);
  CHECK(count_lines(curve) == 41);
  const std::string field = read_text_file(tmp.path / "beltrami_field.csv");
  CHECK(field.rfind("r,theta,re_mu,im_mu,abs_mu\n", 0) == 0);
  CHECK(fs::exists(tmp.path / "omega_curve.svg"));
  CHECK(fs::exists(tmp.path / "mu_heatmap.svg"));
}

TEST_CASE("run: motion writes the per-c table and axioms") {
  TempDir tmp;
  json cfg = base_config(tmp.path, "motion");
  cfg["motion"] = {{"kind", "koenig"}, {"r", 0.05}, {"delta", 0.1}, {"samples", 32}, {"annulus_rings", 4}, {"annulus_angles", 32}};
  cfg["emit_svg"] = true;
  const RunManifest m = run(ExperimentConfig::from_json(cfg));
  CHECK(m.passed());
  const std::string csv = read_text_file(tmp.path / "motion.csv");
  CHECK(csv.rfind("c_re,c_im,r,theta,H_re,H_im\n", 0) == 0);
  const json axioms = json::parse(read_text_file(tmp.path / "motion_axioms.json"));
  CHECK(axioms["passed"] == true);
  const json ext = json::parse(read_text_file(tmp.path / "motion_extension.json"));
  const std::size_t nc = ext["per_c"].size();
  REQUIRE(nc > 1);
  CHECK(ext["per_c"][0].contains("bound_K"));
  // every c contributes the same block of rows, annulus included
  CHECK((count_lines(csv) - 1) % nc == 0);
  CHECK((count_lines(csv) - 1) / nc > 4 * 32);
  CHECK(fs::exists(tmp.path / "motion_k.svg"));
}

TEST_CASE("run: a failing task is recorded and siblings still run") {
  TempDir tmp;
  // A neutral point: classify is inconclusive, koenig refuses, omega still runs.
  const json neutral = {{"type", "power_series"}, {"coeffs", {{0.6, 0.8}, 1.0}}, {"radius", 1.0}};
  const RunManifest m = run(ExperimentConfig::from_json(base_config(tmp.path, "all", neutral)));
  CHECK_FALSE(m.passed());
  CHECK_FALSE(find_task(m, "koenig").completed);
  CHECK_FALSE(find_task(m, "koenig").error.empty());
  CHECK_FALSE(find_task(m, "motion").completed);
  CHECK(find_task(m, "omega").completed);
  CHECK(fs::exists(tmp.path / "manifest.json"));
}

TEST_CASE("run: checks-only verify task writes no tables") {
  TempDir tmp;
  const RunManifest m = run(ExperimentConfig::from_json(base_config(tmp.path, "verify")));
  CHECK(m.passed());
  for (const FileEntry& f : m.files) CHECK(f.path.find(".csv") == std::string::npos);
  CHECK(verify_bundle(tmp.path).ok);
}

TEST_CASE("verify_bundle") {
  TempDir tmp;
  const fs::path dir = tmp.path / "bundle";
  run(ExperimentConfig::from_json(base_config(dir, "koenig")));

  VerifyResult v = verify_bundle(dir);
  CHECK(v.ok);
  CHECK(v.problems.empty());

  SUBCASE("one CSV byte flipped") {
    std::string csv = read_text_file(dir / "koenig.csv");
    csv[csv.size() / 2] = csv[csv.size() / 2] == '1' ? '2' : '1';
    write_text_file(dir / "koenig.csv", csv);
    v = verify_bundle(dir);
    CHECK_FALSE(v.ok);
    CHECK(has_problem(v, "koenig.csv"));
  }
  SUBCASE("a failed flag fails regardless of checksums") {
    json man = json::parse(read_text_file(dir / "manifest.json"));
    man["tasks"][0]["flags"][0]["passed"] = false;
    write_text_file(dir / "manifest.json", man.dump(2));
    v = verify_bundle(dir);
    CHECK_FALSE(v.ok);
    CHECK(has_problem(v, "recorded as failed"));
  }
  SUBCASE("a flag whose artifact no longer supports it") {
    // Rewrite the CSV with a large residual and fix up its checksum.
    std::string csv = read_text_file(dir / "koenig.csv");
    const auto cut = csv.rfind(',', csv.size() - 2);
    csv = csv.substr(0, cut + 1) + "1\n";
    write_text_file(dir / "koenig.csv", csv);
    json man = json::parse(read_text_file(dir / "manifest.json"));
    for (json& f : man["files"])
      if (f["path"] == "koenig.csv") {
        f["sha256"] = sha256_hex(csv);
        f["bytes"] = csv.size();
      }
    write_text_file(dir / "manifest.json", man.dump(2));
    v = verify_bundle(dir);
    CHECK_FALSE(v.ok);
    CHECK(has_problem(v, "recomputed"));
  }
  SUBCASE("missing file") {
    fs::remove(dir / "koenig.json");
    v = verify_bundle(dir);
    CHECK_FALSE(v.ok);
    CHECK(has_problem(v, "koenig.json"));
  }
  SUBCASE("no manifest or a broken one") {
    CHECK(error_kind([&] { verify_bundle(tmp.path / "nowhere"); }) == ErrorKind::Io);
    write_text_file(dir / "manifest.json", "{\"tasks\": 3}");
    CHECK(error_kind([&] { verify_bundle(dir); }) == ErrorKind::ManifestMismatch);
    write_text_file(dir / "manifest.json", "not json");
    CHECK(error_kind([&] { verify_bundle(dir); }) == ErrorKind::ManifestMismatch);
  }
}

TEST_CASE("run: unwritable output directory") {
  TempDir tmp;
  write_text_file(tmp.path / "file", "x");
  CHECK(error_kind([&] { run(ExperimentConfig::from_json(base_config(tmp.path / "file" / "sub", "classify"))); }) ==
        ErrorKind::Io);
}

TEST_CASE("CSV numbers round trip exactly") {
  ModulusCurve c = ModulusCurve::from_samples({0.1, 0.2, 0.30000000000000004}, {1.0 / 3.0, 0.5, 2.0 / 3.0});
  const std::string csv = modulus_curve_csv(c);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  for (std::size_t i = 0; i < 3; ++i) {
    std::getline(in, line);
    const auto comma = line.find(',');
    CHECK(std::stod(line.substr(0, comma)) == c.t[i]);
    CHECK(std::stod(line.substr(comma + 1)) == c.omega[i]);
  }
}

TEST_CASE("line chart skips unusable points") {
  const std::string svg = svg_line_chart({Series{.label = "a", .x = {0.0, 1.0, 2.0}, .y = {1.0, NAN, 4.0}}},
                                         ChartOptions{.title = "t <&>", .log_x = true});
  CHECK(svg.find("t &lt;&amp;&gt;") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
}
