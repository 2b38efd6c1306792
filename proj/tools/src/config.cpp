#include "wflow_app/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "wflow/errors.hpp"
#include "wflow/text_format.hpp"

namespace wflow::app {

namespace {

// Local ground-state widths of the right well at x0: sigma_x^2 = hbar/(2 m w), sigma_p^2 = hbar m w/2.
GaussianParams well_gaussian(double x0, double A, double B) {
  const double w = std::sqrt(-2.0 * A + 12.0 * B * x0 * x0);
  return GaussianParams{x0, 0.0, std::sqrt(0.5 / w), std::sqrt(0.5 * w)};
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    std::ostringstream out;
    out << source_;
    if (node.Mark().line >= 0) out << ':' << node.Mark().line + 1 << ':' << node.Mark().column + 1;
    out << ": " << msg;
    throw ConfigError(out.str());
  }

  void require_map(const YAML::Node& node, const std::string& where) const {
    if (!node.IsMap()) fail(node, where + " must be a mapping");
  }

  // Rejects keys outside `allowed`; duplicate keys are reported by yaml-cpp itself.
  void check_keys(const YAML::Node& node, const std::string& where,
                  std::initializer_list<const char*> allowed) const {
    require_map(node, where);
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) {
        std::string list;
        for (const auto& k : ok) list += (list.empty() ? "" : ", ") + k;
        fail(kv.first, "unknown key '" + (where.empty() ? key : where + "." + key) +
                           "' (expected one of: " + list + ")");
      }
    }
  }

  double real(const YAML::Node& node, const std::string& name) const {
    if (!node.IsScalar()) fail(node, name + " must be a number");
    const std::string s = node.Scalar();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || !std::isfinite(v)) fail(node, name + ": '" + s + "' is not a finite number");
    return v;
  }

  double positive(const YAML::Node& node, const std::string& name) const {
    const double v = real(node, name);
    if (!(v > 0.0)) fail(node, name + " must be > 0");
    return v;
  }

  double nonnegative(const YAML::Node& node, const std::string& name) const {
    const double v = real(node, name);
    if (!(v >= 0.0)) fail(node, name + " must be >= 0");
    return v;
  }

  std::size_t count(const YAML::Node& node, const std::string& name, std::size_t min) const {
    const double v = real(node, name);
    if (v != std::floor(v) || v < static_cast<double>(min) || v > 1e9) {
      fail(node, name + " must be an integer >= " + std::to_string(min));
    }
    return static_cast<std::size_t>(v);
  }

  bool boolean(const YAML::Node& node, const std::string& name) const {
    if (!node.IsScalar()) fail(node, name + " must be true or false");
    const std::string s = node.Scalar();
    if (s == "true") return true;
    if (s == "false") return false;
    fail(node, name + ": '" + s + "' is not true or false");
  }

  std::string text(const YAML::Node& node, const std::string& name) const {
    if (!node.IsScalar()) fail(node, name + " must be a string");
    return node.Scalar();
  }

  std::vector<double> reals(const YAML::Node& node, const std::string& name) const {
    if (!node.IsSequence()) fail(node, name + " must be a list of numbers");
    std::vector<double> out;
    for (const auto& item : node) out.push_back(real(item, name + " entry"));
    return out;
  }

  std::pair<double, double> interval(const YAML::Node& node, const std::string& name) const {
    const auto v = reals(node, name);
    if (v.size() != 2 || !(v[0] < v[1])) fail(node, name + " must be [min, max] with min < max");
    return {v[0], v[1]};
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

void read_hamiltonian(const Reader& r, const YAML::Node& n, HamiltonianConfig& h) {
  r.check_keys(n, "hamiltonian", {"mass", "potential", "omega", "A", "B", "coefficients", "drive", "hbar"});
  if (n["mass"]) h.mass = r.positive(n["mass"], "hamiltonian.mass");
  if (n["potential"]) {
    const auto kind = r.text(n["potential"], "hamiltonian.potential");
    if (kind == "harmonic") h.potential = PotentialKind::harmonic;
    else if (kind == "double-well") h.potential = PotentialKind::double_well;
    else if (kind == "polynomial") h.potential = PotentialKind::polynomial;
    else r.fail(n["potential"], "hamiltonian.potential must be harmonic, double-well or polynomial");
  }
  if (n["omega"]) h.omega = r.positive(n["omega"], "hamiltonian.omega");
  if (n["A"]) h.A = r.real(n["A"], "hamiltonian.A");
  if (n["B"]) h.B = r.real(n["B"], "hamiltonian.B");
  if (n["coefficients"]) {
    h.coefficients = r.reals(n["coefficients"], "hamiltonian.coefficients");
    if (h.coefficients.empty()) r.fail(n["coefficients"], "hamiltonian.coefficients is empty");
  }
  if (n["hbar"]) h.hbar = r.nonnegative(n["hbar"], "hamiltonian.hbar");
  if (const auto d = n["drive"]) {
    r.check_keys(d, "hamiltonian.drive", {"kappa", "omega"});
    if (d["kappa"]) h.kappa = r.real(d["kappa"], "hamiltonian.drive.kappa");
    if (d["omega"]) h.drive_omega = r.real(d["omega"], "hamiltonian.drive.omega");
  }
  if (h.potential == PotentialKind::polynomial && h.coefficients.empty()) {
    r.fail(n, "hamiltonian.potential: polynomial needs hamiltonian.coefficients");
  }
}

void read_generator(const Reader& r, const YAML::Node& n, GeneratorConfig& g) {
  r.check_keys(n, "generator",
               {"advection", "gamma", "Gamma", "hbar2_correction", "renormalize_each_step", "filter"});
  if (n["advection"]) g.advection = r.boolean(n["advection"], "generator.advection");
  if (n["gamma"]) g.gamma = r.nonnegative(n["gamma"], "generator.gamma");
  if (n["Gamma"]) g.Gamma = r.nonnegative(n["Gamma"], "generator.Gamma");
  if (n["hbar2_correction"]) g.hbar2_correction = r.boolean(n["hbar2_correction"], "generator.hbar2_correction");
  if (n["renormalize_each_step"]) {
    g.renormalize_each_step = r.boolean(n["renormalize_each_step"], "generator.renormalize_each_step");
  }
  if (const auto f = n["filter"]) {
    if (f.IsNull()) {
      g.filter.reset();
      return;
    }
    r.check_keys(f, "generator.filter", {"variant", "coefficients", "rate"});
    FilterConfig fc = g.filter.value_or(FilterConfig{});
    if (f["variant"]) {
      const auto v = r.text(f["variant"], "generator.filter.variant");
      if (v == "commutator") fc.variant = FilterVariant::commutator;
      else if (v == "anticommutator") fc.variant = FilterVariant::anticommutator;
      else r.fail(f["variant"], "generator.filter.variant must be commutator or anticommutator");
    }
    if (f["coefficients"]) {
      fc.coefficients = r.reals(f["coefficients"], "generator.filter.coefficients");
      if (fc.coefficients.empty() || fc.coefficients.size() > FilterSpec::kMaxOrder + 1) {
        r.fail(f["coefficients"], "generator.filter.coefficients needs 1 to " +
                                      std::to_string(FilterSpec::kMaxOrder + 1) + " entries");
      }
    }
    if (f["rate"]) fc.rate = r.real(f["rate"], "generator.filter.rate");
    if (fc.coefficients.empty()) r.fail(f, "generator.filter needs coefficients");
    g.filter = fc;
  }
}

void read_state(const Reader& r, const YAML::Node& n, StateConfig& s) {
  r.check_keys(n, "state", {"kind", "x0", "p0", "sigma_x", "sigma_p", "alpha", "phi"});
  if (n["kind"]) {
    const auto k = r.text(n["kind"], "state.kind");
    if (k == "gaussian") s.kind = StateKind::gaussian;
    else if (k == "cat") s.kind = StateKind::cat;
    else r.fail(n["kind"], "state.kind must be gaussian or cat");
  }
  const bool cat = s.kind == StateKind::cat;
  for (const char* key : {"x0", "p0", "sigma_x", "sigma_p"}) {
    if (cat && n[key]) r.fail(n[key], std::string("state.") + key + " does not apply to a cat state");
  }
  for (const char* key : {"alpha", "phi"}) {
    if (!cat && n[key]) r.fail(n[key], std::string("state.") + key + " does not apply to a gaussian state");
  }
  if (n["x0"]) s.gaussian.x0 = r.real(n["x0"], "state.x0");
  if (n["p0"]) s.gaussian.p0 = r.real(n["p0"], "state.p0");
  if (n["sigma_x"]) s.gaussian.sigma_x = r.positive(n["sigma_x"], "state.sigma_x");
  if (n["sigma_p"]) s.gaussian.sigma_p = r.positive(n["sigma_p"], "state.sigma_p");
  if (n["alpha"]) s.cat.alpha = r.real(n["alpha"], "state.alpha");
  if (n["phi"]) s.cat.phi = r.real(n["phi"], "state.phi");
}

void read_grid(const Reader& r, const YAML::Node& n, GridConfig& g) {
  r.check_keys(n, "grid", {"nx", "np", "x", "p"});
  if (n["nx"]) g.nx = r.count(n["nx"], "grid.nx", PhaseGrid::kMinPoints);
  if (n["np"]) g.np = r.count(n["np"], "grid.np", PhaseGrid::kMinPoints);
  if (n["x"]) std::tie(g.xmin, g.xmax) = r.interval(n["x"], "grid.x");
  if (n["p"]) std::tie(g.pmin, g.pmax) = r.interval(n["p"], "grid.p");
}

void read_time(const Reader& r, const YAML::Node& n, TimeConfig& t) {
  r.check_keys(n, "time", {"dt", "t_max", "record_every", "snapshots"});
  if (n["dt"]) t.dt = r.positive(n["dt"], "time.dt");
  if (n["t_max"]) t.t_max = r.nonnegative(n["t_max"], "time.t_max");
  if (n["record_every"]) t.record_every = r.count(n["record_every"], "time.record_every", 1);
  if (n["snapshots"]) {
    t.snapshots = r.reals(n["snapshots"], "time.snapshots");
    for (double s : t.snapshots) {
      if (s < 0.0) r.fail(n["snapshots"], "time.snapshots must be >= 0");
    }
  }
}

void read_sweep(const Reader& r, const YAML::Node& n, std::optional<SweepConfig>& out) {
  r.check_keys(n, "sweep", {"gamma", "Gamma", "kappa"});
  SweepConfig s;
  auto list = [&](const char* key, std::vector<double>& dst, bool signed_ok) {
    if (!n[key]) return;
    dst = r.reals(n[key], std::string("sweep.") + key);
    if (dst.empty()) r.fail(n[key], std::string("sweep.") + key + " is empty");
    if (!signed_ok) {
      for (double v : dst) {
        if (v < 0.0) r.fail(n[key], std::string("sweep.") + key + " entries must be >= 0");
      }
    }
  };
  list("gamma", s.gamma, false);
  list("Gamma", s.Gamma, false);
  list("kappa", s.kappa, true);
  if (s.gamma.empty() && s.Gamma.empty() && s.kappa.empty()) r.fail(n, "sweep lists no parameter");
  out = s;
}

void emit_list(YAML::Emitter& e, const std::vector<double>& v) {
  e << YAML::Flow << YAML::BeginSeq;
  for (double x : v) e << format_double(x);
  e << YAML::EndSeq;
}

}  // namespace

HamiltonianModel HamiltonianConfig::make() const {
  std::optional<Drive> d;
  if (kappa != 0.0) d = Drive{kappa, drive_omega};
  switch (potential) {
    case PotentialKind::harmonic:
      if (d) {
        return HamiltonianModel(mass, Polynomial({0.0, 0.0, 0.5 * mass * omega * omega}), d, hbar);
      }
      return HamiltonianModel::harmonic(mass, omega, hbar);
    case PotentialKind::double_well:
      return HamiltonianModel::double_well(mass, A, B, d, hbar);
    case PotentialKind::polynomial:
      return HamiltonianModel(mass, Polynomial(coefficients), d, hbar);
  }
  throw ConfigError("unknown potential kind");
}

GeneratorSpec GeneratorConfig::make() const {
  GeneratorSpec s;
  s.advection = advection;
  s.gamma = gamma;
  s.Gamma = Gamma;
  s.hbar2_correction = hbar2_correction;
  s.renormalize_each_step = renormalize_each_step;
  if (filter) {
    FilterSpec f;
    f.variant = filter->variant;
    f.even_taylor_coeffs = filter->coefficients;
    const double rate = filter->rate;
    f.chi_dot = [rate](double) { return rate; };
    s.filter = f;
  }
  return s;
}

WignerField StateConfig::make(const PhaseGrid& grid) const {
  if (kind == StateKind::cat) return cat_state(cat, grid);
  return gaussian_state(gaussian, grid);
}

void ScenarioConfig::validate() const {
  auto bad = [&](const std::string& msg) { throw ConfigError(name + ": " + msg); };
  if (name.empty()) bad("name is empty");
  if (grid.nx < PhaseGrid::kMinPoints || grid.np < PhaseGrid::kMinPoints) bad("grid too small");
  if (!(grid.xmin < grid.xmax) || !(grid.pmin < grid.pmax)) bad("empty grid window");
  if (!(time.dt > 0.0) || !(time.t_max >= 0.0) || time.record_every == 0) bad("bad time settings");
  for (double s : time.snapshots) {
    if (s < 0.0 || s > time.t_max) {
      bad("snapshot time " + format_double(s) + " outside [0, t_max]");
    }
  }
  if (state.kind == StateKind::cat && hamiltonian.potential == PotentialKind::harmonic &&
      std::abs(hamiltonian.mass * hamiltonian.omega - 1.0) > 1e-12) {
    bad("the cat state is defined for m omega = 1");
  }
  try {
    generator.make().validate();
    hamiltonian.make();
  } catch (const ConfigurationError& e) {
    bad(e.what());
  }
  if (sweep && sweep->gamma.empty() && sweep->Gamma.empty() && sweep->kappa.empty()) {
    bad("sweep lists no parameter");
  }
}

std::vector<std::string> preset_names() {
  return {"sho-dephasing", "sho-gainloss", "anharmonic-gaussian", "anharmonic-cat"};
}

ScenarioConfig preset(std::string_view name) {
  ScenarioConfig c;
  c.name = std::string(name);
  c.output = "out/" + c.name;
  if (name == "sho-dephasing") {
    c.generator.gamma = 0.3;
    return c;
  }
  if (name == "sho-gainloss") {
    c.generator.Gamma = 0.3;
    return c;
  }
  if (name == "anharmonic-gaussian" || name == "anharmonic-cat") {
    c.hamiltonian.potential = PotentialKind::double_well;
    c.hamiltonian.A = 1.0;
    c.hamiltonian.B = 0.1;
    c.hamiltonian.kappa = 0.2;
    c.hamiltonian.drive_omega = 1.0;
    c.generator.gamma = 0.05;
    c.generator.Gamma = 0.1;
    c.generator.hbar2_correction = true;
    // [-4, 4] clips the 2.19-centred packet (and the cat lobes) at the x edge.
    c.grid = GridConfig{128, 128, -5.0, 5.0, -6.0, 6.0};
    c.time = TimeConfig{1e-2, 10.0, 10, {0.0, 2.0, 8.0}};
    if (name == "anharmonic-gaussian") {
      c.state.gaussian = well_gaussian(2.19, 1.0, 0.1);
    } else {
      c.state.kind = StateKind::cat;
      c.state.cat = CatParams{2.0, 0.0};
    }
    return c;
  }
  std::string list;
  for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + list + ")");
}

ScenarioConfig parse_config(std::string_view text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    std::ostringstream out;
    out << source << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
    throw ConfigError(out.str());
  }
  const Reader r(source);
  if (!root.IsMap()) r.fail(root, "top level must be a mapping");
  r.check_keys(root, "", {"name", "preset", "hamiltonian", "generator", "state", "grid", "time",
                          "output", "sweep"});
  ScenarioConfig c;
  try {
    if (root["preset"]) c = preset(r.text(root["preset"], "preset"));
  } catch (const ConfigError& e) {
    r.fail(root["preset"], e.what());
  }
  try {
    if (root["name"]) c.name = r.text(root["name"], "name");
    if (root["hamiltonian"]) read_hamiltonian(r, root["hamiltonian"], c.hamiltonian);
    if (root["generator"]) read_generator(r, root["generator"], c.generator);
    if (root["state"]) read_state(r, root["state"], c.state);
    if (root["grid"]) read_grid(r, root["grid"], c.grid);
    if (root["time"]) read_time(r, root["time"], c.time);
    if (root["output"]) c.output = r.text(root["output"], "output");
    if (root["sweep"]) read_sweep(r, root["sweep"], c.sweep);
  } catch (const YAML::Exception& e) {
    std::ostringstream out;
    out << source << ':' << e.mark.line + 1 << ':' << e.mark.column + 1 << ": " << e.msg;
    throw ConfigError(out.str());
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string to_yaml(const ScenarioConfig& c) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << c.name;

  const auto& h = c.hamiltonian;
  e << YAML::Key << "hamiltonian" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "mass" << YAML::Value << format_double(h.mass);
  switch (h.potential) {
    case PotentialKind::harmonic:
      e << YAML::Key << "potential" << YAML::Value << "harmonic";
      e << YAML::Key << "omega" << YAML::Value << format_double(h.omega);
      break;
    case PotentialKind::double_well:
      e << YAML::Key << "potential" << YAML::Value << "double-well";
      e << YAML::Key << "A" << YAML::Value << format_double(h.A);
      e << YAML::Key << "B" << YAML::Value << format_double(h.B);
      break;
    case PotentialKind::polynomial:
      e << YAML::Key << "potential" << YAML::Value << "polynomial";
      e << YAML::Key << "coefficients" << YAML::Value;
      emit_list(e, h.coefficients);
      break;
  }
  e << YAML::Key << "drive" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "kappa"
    << YAML::Value << format_double(h.kappa) << YAML::Key << "omega" << YAML::Value
    << format_double(h.drive_omega) << YAML::EndMap;
  e << YAML::Key << "hbar" << YAML::Value << format_double(h.hbar);
  e << YAML::EndMap;

  const auto& g = c.generator;
  e << YAML::Key << "generator" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "advection" << YAML::Value << (g.advection ? "true" : "false");
  e << YAML::Key << "gamma" << YAML::Value << format_double(g.gamma);
  e << YAML::Key << "Gamma" << YAML::Value << format_double(g.Gamma);
  e << YAML::Key << "hbar2_correction" << YAML::Value << (g.hbar2_correction ? "true" : "false");
  e << YAML::Key << "renormalize_each_step" << YAML::Value << (g.renormalize_each_step ? "true" : "false");
  if (g.filter) {
    e << YAML::Key << "filter" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "variant" << YAML::Value
      << (g.filter->variant == FilterVariant::commutator ? "commutator" : "anticommutator");
    e << YAML::Key << "coefficients" << YAML::Value;
    emit_list(e, g.filter->coefficients);
    e << YAML::Key << "rate" << YAML::Value << format_double(g.filter->rate);
    e << YAML::EndMap;
  }
  e << YAML::EndMap;

  const auto& s = c.state;
  e << YAML::Key << "state" << YAML::Value << YAML::BeginMap;
  if (s.kind == StateKind::gaussian) {
    e << YAML::Key << "kind" << YAML::Value << "gaussian";
    e << YAML::Key << "x0" << YAML::Value << format_double(s.gaussian.x0);
    e << YAML::Key << "p0" << YAML::Value << format_double(s.gaussian.p0);
    e << YAML::Key << "sigma_x" << YAML::Value << format_double(s.gaussian.sigma_x);
    e << YAML::Key << "sigma_p" << YAML::Value << format_double(s.gaussian.sigma_p);
  } else {
    e << YAML::Key << "kind" << YAML::Value << "cat";
    e << YAML::Key << "alpha" << YAML::Value << format_double(s.cat.alpha);
    e << YAML::Key << "phi" << YAML::Value << format_double(s.cat.phi);
  }
  e << YAML::EndMap;

  e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "nx" << YAML::Value << c.grid.nx;
  e << YAML::Key << "np" << YAML::Value << c.grid.np;
  e << YAML::Key << "x" << YAML::Value;
  emit_list(e, {c.grid.xmin, c.grid.xmax});
  e << YAML::Key << "p" << YAML::Value;
  emit_list(e, {c.grid.pmin, c.grid.pmax});
  e << YAML::EndMap;

  e << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dt" << YAML::Value << format_double(c.time.dt);
  e << YAML::Key << "t_max" << YAML::Value << format_double(c.time.t_max);
  e << YAML::Key << "record_every" << YAML::Value << c.time.record_every;
  e << YAML::Key << "snapshots" << YAML::Value;
  emit_list(e, c.time.snapshots);
  e << YAML::EndMap;

  e << YAML::Key << "output" << YAML::Value << c.output.generic_string();
  if (c.sweep) {
    e << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    if (!c.sweep->gamma.empty()) {
      e << YAML::Key << "gamma" << YAML::Value;
      emit_list(e, c.sweep->gamma);
    }
    if (!c.sweep->Gamma.empty()) {
      e << YAML::Key << "Gamma" << YAML::Value;
      emit_list(e, c.sweep->Gamma);
    }
    if (!c.sweep->kappa.empty()) {
      e << YAML::Key << "kappa" << YAML::Value;
      emit_list(e, c.sweep->kappa);
    }
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::filesystem::path resolve_output(const ScenarioConfig& config) {
  const char* root = std::getenv(kOutputRootVariable);
  if (root == nullptr || *root == '\0') return config.output;
  return std::filesystem::path(root) / config.output.relative_path();
}

}  // namespace wflow::app
