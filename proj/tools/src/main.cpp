// wigner-flow: run, sweep and verify phase-space master-equation scenarios.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "wflow/errors.hpp"
#include "wflow/text_format.hpp"
#include "wflow_app/config.hpp"
#include "wflow_app/runner.hpp"
#include "wflow_app/verify.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;
constexpr int kNumericalFailure = 3;

using namespace wflow;
using namespace wflow::app;

int do_run(const std::string& path, const std::string& out_override) {
  const ScenarioConfig cfg = load_config(path);
  const auto dir = out_override.empty() ? resolve_output(cfg) : std::filesystem::path(out_override);
  const RunOutputs r = run_scenario(cfg, dir);
  std::cout << "wrote " << r.directory.string() << " (" << r.series.size() << " records, " << r.snapshots.size()
            << " snapshots, " << r.substeps << " substeps per dt)\n";
  std::cout << "max Wneg " << format_double(r.max_negativity) << ", t_c "
            << (r.t_c ? format_double(*r.t_c) : std::string("none")) << '\n';
  return kOk;
}

int do_sweep(const std::string& path, const std::string& out_override, unsigned threads) {
  const ScenarioConfig cfg = load_config(path);
  if (!cfg.sweep) throw ConfigError(path + ": sweep needs a 'sweep' section");
  const auto dir = out_override.empty() ? resolve_output(cfg) : std::filesystem::path(out_override);
  const SweepOutputs s = run_sweep(cfg, dir, threads);
  for (const auto& c : s.cells) {
    if (!c.ok) std::cerr << "cell " << cell_name(c.gamma, c.Gamma, c.kappa) << " failed: " << c.error << '\n';
  }
  std::cout << "wrote " << s.summary.string() << " (" << s.cells.size() << " cells, " << s.failures()
            << " failed)\n";
  return s.failures() ? kNumericalFailure : kOk;
}

int do_verify(const std::string& suite_arg, bool quick, const std::string& json, const std::vector<std::string>& only) {
  const auto suite = parse_suite(suite_arg);
  if (!suite) throw ConfigError("unknown suite '" + suite_arg + "' (oracles, quantum, gradient, filters, negativity, all)");
  VerifyOptions opt;
  opt.quick = quick;
  opt.log = &std::cerr;
  opt.only = only;
  const auto results = run_suite(*suite, opt);
  write_report_text(std::cout, results);
  if (!json.empty()) {
    std::ofstream out(json);
    if (!out) throw ConfigError("cannot write " + json);
    write_report_json(out, results);
  }
  return all_passed(results) ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-space simulator for double-bracket master equations"};
  app.require_subcommand(1);

  std::string config_path, out_dir, suite, json, preset_name;
  unsigned threads = 0;
  bool quick = false;
  std::vector<std::string> only;

  auto* run = app.add_subcommand("run", "evolve one scenario");
  run->add_option("config", config_path, "scenario file (YAML)")->required();
  run->add_option("-o,--output", out_dir, "output directory (overrides the config and the environment)");

  auto* sweep = app.add_subcommand("sweep", "run every (gamma, Gamma, kappa) tuple of a scenario");
  sweep->add_option("config", config_path, "scenario file with a sweep section")->required();
  sweep->add_option("-o,--output", out_dir, "output root");
  sweep->add_option("-j,--threads", threads, "parallel cells (0: hardware count)");

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", suite, "oracles | quantum | gradient | filters | negativity | all")->required();
  verify->add_flag("--quick", quick, "coarse grids and short horizons");
  verify->add_option("--json", json, "also write the report as JSON");
  verify->add_option("--only", only, "restrict to these criterion ids (A1, A8, ...)");

  auto* presets = app.add_subcommand("preset", "print a preset scenario as YAML");
  presets->add_option("name", preset_name, "preset name; omit to list");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return do_run(config_path, out_dir);
    if (*sweep) return do_sweep(config_path, out_dir, threads);
    if (*verify) return do_verify(suite, quick, json, only);
    if (*presets) {
      if (preset_name.empty()) {
        for (const auto& n : preset_names()) std::cout << n << '\n';
      } else {
        std::cout << to_yaml(preset(preset_name));
      }
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConfigurationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalInstability& e) {
    std::cerr << "numerical failure at t = " << format_double(e.time()) << " in " << e.term() << ": " << e.what()
              << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kOk;
}
