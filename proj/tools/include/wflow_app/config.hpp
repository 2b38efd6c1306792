#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wflow/generator.hpp"
#include "wflow/grid.hpp"
#include "wflow/hamiltonian.hpp"
#include "wflow/states.hpp"

namespace wflow::app {

/// Bad configuration file. what() carries "<source>:<line>:<column>: message" when the
/// offending node is known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridConfig {
  std::size_t nx = 256;
  std::size_t np = 256;
  double xmin = -6.0, xmax = 6.0;
  double pmin = -6.0, pmax = 6.0;

  PhaseGrid make() const { return PhaseGrid(nx, np, xmin, xmax, pmin, pmax); }
};

enum class PotentialKind { harmonic, double_well, polynomial };

struct HamiltonianConfig {
  double mass = 1.0;
  PotentialKind potential = PotentialKind::harmonic;
  double omega = 1.0;                // harmonic
  double A = 1.0, B = 0.1;           // double well, V = -A x^2 + B x^4
  std::vector<double> coefficients;  // polynomial, c_0 .. c_n
  double kappa = 0.0;                // drive kappa x cos(omega_d t)
  double drive_omega = 1.0;
  double hbar = 1.0;

  HamiltonianModel make() const;
};

struct FilterConfig {
  FilterVariant variant = FilterVariant::commutator;
  std::vector<double> coefficients;  // G^{(2n)}(0)/(2n)!, n = 0..N_max
  double rate = 1.0;                 // constant chi_dot
};

struct GeneratorConfig {
  bool advection = true;
  double gamma = 0.0;
  double Gamma = 0.0;
  bool hbar2_correction = false;
  bool renormalize_each_step = false;
  std::optional<FilterConfig> filter;

  GeneratorSpec make() const;
};

enum class StateKind { gaussian, cat };

struct StateConfig {
  StateKind kind = StateKind::gaussian;
  GaussianParams gaussian{1.0, 1.0, 0.70710678118654752, 0.70710678118654752};
  CatParams cat;

  WignerField make(const PhaseGrid& grid) const;
};

struct TimeConfig {
  double dt = 1e-3;
  double t_max = 8.0;
  std::size_t record_every = 10;
  std::vector<double> snapshots{0.0, 2.0, 8.0};
};

struct SweepConfig {
  std::vector<double> gamma;
  std::vector<double> Gamma;
  std::vector<double> kappa;
};

struct ScenarioConfig {
  std::string name = "scenario";
  HamiltonianConfig hamiltonian;
  GeneratorConfig generator;
  StateConfig state;
  GridConfig grid;
  TimeConfig time;
  std::filesystem::path output = "out";
  std::optional<SweepConfig> sweep;

  /// Cross-field checks (ranges, grid size, snapshot times inside [0, t_max]).
  void validate() const;
};

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
ScenarioConfig preset(std::string_view name);

/// Parses a YAML scenario. `source` names the text in error messages.
ScenarioConfig parse_config(std::string_view text, const std::string& source = "<config>");
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical YAML rendering; parse_config(to_yaml(c)) reproduces c.
std::string to_yaml(const ScenarioConfig& config);

/// Environment variable that overrides the output root of every run.
inline constexpr const char* kOutputRootVariable = "WIGNER_FLOW_OUTPUT_ROOT";

/// config.output, re-rooted under $WIGNER_FLOW_OUTPUT_ROOT when that is set and non-empty.
std::filesystem::path resolve_output(const ScenarioConfig& config);

}  // namespace wflow::app
