#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "wflow/observables.hpp"
#include "wflow/snapshot.hpp"
#include "wflow_app/config.hpp"
#include "wflow_app/runner.hpp"

using namespace wflow;
using namespace wflow::app;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wflow-test-" + name);
  fs::remove_all(p);
  return p;
}

// Small and quick: 32^2 SHO dephasing to t = 0.2.
ScenarioConfig tiny() {
  ScenarioConfig c = preset("sho-dephasing");
  c.name = "tiny";
  c.grid.nx = c.grid.np = 32;
  c.time.dt = 0.01;
  c.time.t_max = 0.2;
  c.time.record_every = 5;
  c.time.snapshots = {0.0, 0.1};
  return c;
}

std::string error_of(const std::string& yaml) {
  try {
    (void)parse_config(yaml, "case.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("presets carry the scenario parameters") {
  const auto d = preset("sho-dephasing");
  CHECK(d.generator.gamma == 0.3);
  CHECK(d.state.gaussian.x0 == 1.0);
  CHECK(d.state.gaussian.p0 == 1.0);
  CHECK(d.time.t_max >= 8.0);

  const auto cat = preset("anharmonic-cat");
  CHECK(cat.state.kind == StateKind::cat);
  CHECK(cat.generator.gamma == 0.05);
  CHECK(cat.generator.Gamma == 0.1);
  CHECK(cat.hamiltonian.kappa == 0.2);
  CHECK(cat.generator.hbar2_correction);

  const auto gau = preset("anharmonic-gaussian");
  CHECK(gau.state.gaussian.x0 == 2.19);
  CHECK(gau.hamiltonian.potential == PotentialKind::double_well);
  CHECK(gau.hamiltonian.A == 1.0);
  CHECK(gau.hamiltonian.B == 0.1);

  CHECK_THROWS_AS(preset("nope"), ConfigError);
  for (const auto& n : preset_names()) CHECK_NOTHROW(preset(n).validate());
}

TEST_CASE("config: YAML overrides on top of a preset") {
  const auto c = parse_config(
      "preset: sho-dephasing\n"
      "name: custom\n"
      "generator:\n  gamma: 0.1\n  Gamma: 0.05\n"
      "grid:\n  nx: 64\n  np: 48\n  x: [-5, 5]\n"
      "time:\n  dt: 0.002\n  t_max: 1\n  snapshots: [0, 0.5, 1]\n"
      "sweep:\n  gamma: [0.1, 0.2]\n");
  CHECK(c.name == "custom");
  CHECK(c.generator.gamma == 0.1);
  CHECK(c.generator.Gamma == 0.05);
  CHECK(c.grid.nx == 64);
  CHECK(c.grid.xmin == -5.0);
  CHECK(c.grid.pmax == 6.0);
  CHECK(c.time.snapshots.size() == 3);
  REQUIRE(c.sweep);
  CHECK(c.sweep->gamma.size() == 2);
  CHECK(expand_sweep(c).size() == 2);
}

TEST_CASE("config: canonical YAML round trip") {
  for (const auto& n : preset_names()) {
    const auto c = preset(n);
    const std::string y = to_yaml(c);
    CHECK(to_yaml(parse_config(y)) == y);
  }
  ScenarioConfig f = tiny();
  f.generator.filter = FilterConfig{FilterVariant::anticommutator, {0.0, -0.1, 0.01}, 0.5};
  f.sweep = SweepConfig{{0.1}, {}, {0.0, 0.5}};
  CHECK(to_yaml(parse_config(to_yaml(f))) == to_yaml(f));
}

TEST_CASE("config: errors carry source, line and column") {
  const std::string unknown = error_of("name: x\ngenerator:\n  gama: 0.3\n");
  CHECK(unknown.find("case.yaml:3:") == 0);
  CHECK(unknown.find("gama") != std::string::npos);
  CHECK(unknown.find("gamma") != std::string::npos);

  const std::string negative = error_of("generator:\n  gamma: -1\n");
  CHECK(negative.find("case.yaml:2:") == 0);

  const std::string empty_sweep = error_of("preset: sho-dephasing\nsweep:\n  gamma: []\n");
  CHECK(!empty_sweep.empty());
  CHECK(empty_sweep.find("case.yaml:3:") == 0);

  CHECK(!error_of("grid:\n  nx: 4\n").empty());
  CHECK(!error_of("state:\n  kind: cat\n  x0: 1\n").empty());
  CHECK(!error_of("time:\n  t_max: 1\n  snapshots: [2]\n").empty());
  CHECK(!error_of("preset: bogus\n").empty());
  CHECK(!error_of("generator:\n  advection: false\n").empty());
  CHECK(!error_of("[1, 2").empty());
  CHECK_THROWS_AS(load_config("/nonexistent/scenario.yaml"), ConfigError);
}

TEST_CASE("output root variable re-roots relative and absolute paths") {
  ScenarioConfig c = tiny();
  c.output = "runs/a";
  ::setenv(kOutputRootVariable, "/tmp/root", 1);
  CHECK(resolve_output(c) == fs::path("/tmp/root/runs/a"));
  c.output = "/abs/b";
  CHECK(resolve_output(c) == fs::path("/tmp/root/abs/b"));
  ::setenv(kOutputRootVariable, "", 1);
  CHECK(resolve_output(c) == fs::path("/abs/b"));
  ::unsetenv(kOutputRootVariable);
}

TEST_CASE("run_scenario writes a manifest whose checksums match the files") {
  const fs::path dir = scratch("manifest");
  const auto r = run_scenario(tiny(), dir);
  CHECK(r.series.size() == 5);
  CHECK(r.snapshots.size() == 2);
  const auto m = nlohmann::json::parse(slurp(r.manifest));
  CHECK(m["format"] == "wigner-flow/1");
  CHECK(m["name"] == "tiny");
  CHECK(m["parameters"]["generator"]["gamma"] == 0.3);
  CHECK(m["summary"]["records"] == 5);
  CHECK(m["files"].size() == 4);
  for (const auto& f : m["files"]) {
    const fs::path p = dir / f["path"].get<std::string>();
    CHECK(fs::file_size(p) == f["bytes"].get<std::uintmax_t>());
    CHECK(sha256_file(p) == f["sha256"].get<std::string>());
  }
  // outputs parse back
  const auto series = read_csv(r.series_csv);
  CHECK(series.size() == r.series.size());
  const auto snap = read_snapshot(r.snapshots[1]);
  CHECK(snap.t == doctest::Approx(0.1));
  CHECK(snap.field.grid().nx() == 32);
  CHECK(to_yaml(load_config(dir / "config.yaml")) == to_yaml(tiny()));
}

TEST_CASE("sha256 of a known string") {
  const fs::path p = scratch("sha") ;
  fs::create_directories(p);
  std::ofstream(p / "abc") << "abc";
  CHECK(sha256_file(p / "abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("reruns are byte-identical") {
  const auto a = run_scenario(tiny(), scratch("rerun-a"));
  const auto b = run_scenario(tiny(), scratch("rerun-b"));
  CHECK(slurp(a.manifest) == slurp(b.manifest));
  CHECK(slurp(a.series_csv) == slurp(b.series_csv));
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) CHECK(slurp(a.snapshots[k]) == slurp(b.snapshots[k]));
}

TEST_CASE("a single-tuple sweep equals run_scenario bit for bit") {
  ScenarioConfig c = tiny();
  c.sweep = SweepConfig{{0.2}, {0.05}, {}};
  const fs::path root = scratch("sweep1");
  const auto s = run_sweep(c, root, 1);
  REQUIRE(s.cells.size() == 1);
  CHECK(s.failures() == 0);

  ScenarioConfig single = tiny();
  single.generator.gamma = 0.2;
  single.generator.Gamma = 0.05;
  const auto r = run_scenario(single, scratch("sweep1-direct"));
  const fs::path cell = root / cell_name(0.2, 0.05, 0.0);
  CHECK(s.cells[0].directory == cell);
  CHECK(slurp(cell / "series.csv") == slurp(r.series_csv));
  CHECK(slurp(cell / "manifest.json") == slurp(r.manifest));
  CHECK(slurp(cell / "snapshot_001.dat") == slurp(r.snapshots[1]));

  const std::string summary = slurp(s.summary);
  CHECK(summary.rfind("gamma,Gamma,kappa,t_c,max_Wneg,status,message\n", 0) == 0);
  CHECK(summary.find(",ok,") != std::string::npos);
}

TEST_CASE("sweep cells run in parallel and match serial runs") {
  ScenarioConfig c = tiny();
  c.sweep = SweepConfig{{0.1, 0.3}, {0.0, 0.1}, {}};
  const auto serial = run_sweep(c, scratch("sweep-serial"), 1);
  const auto parallel = run_sweep(c, scratch("sweep-par"), 4);
  REQUIRE(serial.cells.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(slurp(serial.cells[k].directory / "series.csv") == slurp(parallel.cells[k].directory / "series.csv"));
  }
  CHECK(slurp(serial.summary) == slurp(parallel.summary));
}

TEST_CASE("expand_sweep without a sweep section is a config error") {
  CHECK_THROWS_AS(expand_sweep(tiny()), ConfigError);
  ScenarioConfig c = tiny();
  c.sweep = SweepConfig{};
  CHECK_THROWS_AS(expand_sweep(c), ConfigError);
}

TEST_CASE("run_scenario reports an unwritable output directory") {
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker) << "file";
  CHECK_THROWS_AS(run_scenario(tiny(), blocker / "sub"), ConfigError);
}
