#include "wflow_app/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "wflow/errors.hpp"
#include "wflow/snapshot.hpp"
#include "wflow/stepper.hpp"
#include "wflow/text_format.hpp"

namespace wflow::app {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256: digest init failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

namespace {

Json parameters(const ScenarioConfig& c) {
  const auto& h = c.hamiltonian;
  Json ham{{"mass", h.mass}, {"hbar", h.hbar}};
  switch (h.potential) {
    case PotentialKind::harmonic:
      ham["potential"] = "harmonic";
      ham["omega"] = h.omega;
      break;
    case PotentialKind::double_well:
      ham["potential"] = "double-well";
      ham["A"] = h.A;
      ham["B"] = h.B;
      break;
    case PotentialKind::polynomial:
      ham["potential"] = "polynomial";
      ham["coefficients"] = h.coefficients;
      break;
  }
  ham["drive"] = {{"kappa", h.kappa}, {"omega", h.drive_omega}};

  const auto& g = c.generator;
  Json gen{{"advection", g.advection},
           {"gamma", g.gamma},
           {"Gamma", g.Gamma},
           {"hbar2_correction", g.hbar2_correction},
           {"renormalize_each_step", g.renormalize_each_step}};
  if (g.filter) {
    gen["filter"] = {
        {"variant", g.filter->variant == FilterVariant::commutator ? "commutator" : "anticommutator"},
        {"coefficients", g.filter->coefficients},
        {"rate", g.filter->rate}};
  }
  gen["terms"] = g.make().describe();

  Json state;
  if (c.state.kind == StateKind::gaussian) {
    state = {{"kind", "gaussian"},
             {"x0", c.state.gaussian.x0},
             {"p0", c.state.gaussian.p0},
             {"sigma_x", c.state.gaussian.sigma_x},
             {"sigma_p", c.state.gaussian.sigma_p}};
  } else {
    state = {{"kind", "cat"}, {"alpha", c.state.cat.alpha}, {"phi", c.state.cat.phi}};
  }
  return Json{{"hamiltonian", ham},
              {"generator", gen},
              {"state", state},
              {"grid",
               {{"nx", c.grid.nx}, {"np", c.grid.np}, {"x", {c.grid.xmin, c.grid.xmax}},
                {"p", {c.grid.pmin, c.grid.pmax}}}},
              {"time",
               {{"dt", c.time.dt},
                {"t_max", c.time.t_max},
                {"record_every", c.time.record_every},
                {"snapshots", c.time.snapshots}}}};
}

Json file_entry(const fs::path& dir, const std::string& name, const std::string& kind) {
  const fs::path p = dir / name;
  return Json{{"path", name}, {"kind", kind}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

RunOutputs run_scenario(const ScenarioConfig& config, const fs::path& directory) {
  config.validate();
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec || !fs::is_directory(directory)) {
    throw ConfigError("output directory " + directory.string() + " is not writable");
  }
  const PhaseGrid grid = config.grid.make();
  const HamiltonianModel H = config.hamiltonian.make();
  const GeneratorSpec spec = config.generator.make();
  const WignerField W0 = config.state.make(grid);

  EvolveOptions opt;
  opt.record_every = config.time.record_every;
  opt.snapshot_times = config.time.snapshots;
  const StabilityBound bound = stability_bound(spec, H, grid, opt.stability_factor);
  EvolveResult res = evolve(spec, H, W0, config.time.t_max, config.time.dt, opt);

  RunOutputs out;
  out.directory = directory;
  out.series = std::move(res.series);
  out.substeps = res.substeps;
  out.t_c = classical_emergence_time(out.series);
  for (const auto& r : out.series.records()) out.max_negativity = std::max(out.max_negativity, r.Wneg);

  write_text(directory / "config.yaml", to_yaml(config));
  out.series_csv = directory / "series.csv";
  write_csv(out.series_csv, out.series);
  Json files = Json::array();
  files.push_back(file_entry(directory, "config.yaml", "config"));
  files.push_back(file_entry(directory, "series.csv", "observables"));
  for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%03zu.dat", k);
    const fs::path p = directory / name;
    write_snapshot(p, res.snapshots[k].field, res.snapshots[k].t);
    out.snapshots.push_back(p);
    Json e = file_entry(directory, name, "snapshot");
    e["t"] = res.snapshots[k].t;
    files.push_back(e);
  }

  Json manifest{{"name", config.name},
                {"format", "wigner-flow/1"},
                {"parameters", parameters(config)},
                {"stability",
                 {{"dt_bound", bound.dt},
                  {"limiting_term", bound.limiting_term},
                  {"substeps_per_dt", res.substeps}}},
                {"summary",
                 {{"t_final", res.t_final},
                  {"records", out.series.size()},
                  {"t_c", out.t_c ? Json(*out.t_c) : Json(nullptr)},
                  {"max_Wneg", out.max_negativity}}},
                {"files", files}};
  out.manifest = directory / "manifest.json";
  write_text(out.manifest, manifest.dump(2) + "\n");
  return out;
}

RunOutputs run_scenario(const ScenarioConfig& config) {
  return run_scenario(config, resolve_output(config));
}

std::size_t SweepOutputs::failures() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const SweepCell& c) { return !c.ok; }));
}

std::vector<ScenarioConfig> expand_sweep(const ScenarioConfig& config) {
  if (!config.sweep) throw ConfigError(config.name + ": no sweep section");
  const SweepConfig& s = *config.sweep;
  if (s.gamma.empty() && s.Gamma.empty() && s.kappa.empty()) {
    throw ConfigError(config.name + ": sweep lists no parameter");
  }
  const auto gammas = s.gamma.empty() ? std::vector<double>{config.generator.gamma} : s.gamma;
  const auto Gammas = s.Gamma.empty() ? std::vector<double>{config.generator.Gamma} : s.Gamma;
  const auto kappas = s.kappa.empty() ? std::vector<double>{config.hamiltonian.kappa} : s.kappa;
  std::vector<ScenarioConfig> cells;
  for (double g : gammas) {
    for (double G : Gammas) {
      for (double k : kappas) {
        ScenarioConfig c = config;
        c.sweep.reset();
        c.generator.gamma = g;
        c.generator.Gamma = G;
        c.hamiltonian.kappa = k;
        cells.push_back(std::move(c));
      }
    }
  }
  return cells;
}

std::string cell_name(double gamma, double Gamma, double kappa) {
  return "gamma=" + format_double(gamma) + "_Gamma=" + format_double(Gamma) + "_kappa=" + format_double(kappa);
}

SweepOutputs run_sweep(const ScenarioConfig& config, const fs::path& root, unsigned threads) {
  const auto configs = expand_sweep(config);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec || !fs::is_directory(root)) throw ConfigError("output directory " + root.string() + " is not writable");

  SweepOutputs out;
  out.cells.resize(configs.size());
  for (std::size_t k = 0; k < configs.size(); ++k) {
    auto& cell = out.cells[k];
    cell.gamma = configs[k].generator.gamma;
    cell.Gamma = configs[k].generator.Gamma;
    cell.kappa = configs[k].hamiltonian.kappa;
    cell.directory = root / cell_name(cell.gamma, cell.Gamma, cell.kappa);
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < configs.size(); k = next++) {
      auto& cell = out.cells[k];
      try {
        const RunOutputs r = run_scenario(configs[k], cell.directory);
        cell.ok = true;
        cell.t_c = r.t_c;
        cell.max_negativity = r.max_negativity;
      } catch (const NumericalInstability& e) {
        cell.error = "numerical failure at t = " + format_double(e.time()) + " (" + e.term() + "): " + e.what();
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, configs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  out.summary = root / "summary.csv";
  std::ostringstream csv;
  csv << "gamma,Gamma,kappa,t_c,max_Wneg,status,message\n";
  for (const auto& c : out.cells) {
    std::string msg = c.error;
    std::replace(msg.begin(), msg.end(), '"', '\'');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    csv << format_double(c.gamma) << ',' << format_double(c.Gamma) << ',' << format_double(c.kappa) << ','
        << (c.t_c ? format_double(*c.t_c) : std::string("nan")) << ',' << format_double(c.max_negativity) << ','
        << (c.ok ? "ok" : "failed") << ",\"" << msg << "\"\n";
  }
  write_text(out.summary, csv.str());
  return out;
}

SweepOutputs run_sweep(const ScenarioConfig& config, unsigned threads) {
  return run_sweep(config, resolve_output(config), threads);
}

}  // namespace wflow::app
