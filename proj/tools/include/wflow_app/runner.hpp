#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wflow/observables.hpp"
#include "wflow_app/config.hpp"

namespace wflow::app {

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct RunOutputs {
  std::filesystem::path directory;
  std::filesystem::path series_csv;
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> snapshots;
  ObservableSeries series;
  std::optional<double> t_c;
  double max_negativity = 0.0;
  std::size_t substeps = 1;
};

/// Evolves the scenario and writes, inside `directory`:
///   config.yaml      canonical form of the scenario
///   series.csv       observables (t,norm,x,p,x2,p2,xp,H,mu2,mu4,Wneg,neg_area)
///   snapshot_NNN.dat grid files at the requested times
///   manifest.json    parameters, stability data and SHA-256 of every file above
/// Outputs depend only on the config. Throws NumericalInstability on a failed run.
RunOutputs run_scenario(const ScenarioConfig& config, const std::filesystem::path& directory);
/// Same, into resolve_output(config).
RunOutputs run_scenario(const ScenarioConfig& config);

struct SweepCell {
  double gamma = 0.0;
  double Gamma = 0.0;
  double kappa = 0.0;
  std::filesystem::path directory;
  bool ok = false;
  std::string error;
  std::optional<double> t_c;
  double max_negativity = 0.0;
};

struct SweepOutputs {
  std::filesystem::path summary;
  std::vector<SweepCell> cells;
  std::size_t failures() const;
};

/// One config per (gamma, Gamma, kappa) tuple; absent lists keep the base value.
/// Throws ConfigError when the config has no sweep section.
std::vector<ScenarioConfig> expand_sweep(const ScenarioConfig& config);

/// Subdirectory name of a sweep cell, e.g. "gamma=0.05_Gamma=0.1_kappa=0.2".
std::string cell_name(double gamma, double Gamma, double kappa);

/// Runs every cell (cells in parallel, `threads` = 0 picks the hardware count) and writes
/// summary.csv with columns gamma,Gamma,kappa,t_c,max_Wneg,status,message. A failed cell is
/// recorded and the sweep carries on.
SweepOutputs run_sweep(const ScenarioConfig& config, const std::filesystem::path& root,
                       unsigned threads = 0);
SweepOutputs run_sweep(const ScenarioConfig& config, unsigned threads = 0);

}  // namespace wflow::app
