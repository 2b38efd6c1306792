#include "wflow/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wflow/errors.hpp"
#include "wflow/stencil.hpp"
#include "wflow/text_format.hpp"

namespace wflow {

namespace {

// RK4 stability limits along the negative real and the imaginary axis.
constexpr double kRk4Real = 2.785;
constexpr double kRk4Imag = 2.828;

// Largest field magnitude, relative to the initial one, before a run is declared unstable.
constexpr double kGrowthLimit = 1e8;

}  // namespace

StabilityBound stability_bound(const GeneratorSpec& spec, const HamiltonianModel& H,
                               const PhaseGrid& grid, double factor) {
  if (!(factor > 0.0)) throw ConfigurationError("stability factor must be positive");
  spec.validate();
  double vmax = 0.0, fmax = 0.0, v3max = 0.0, hmax = 0.0;
  const double kappa = H.drive() ? std::abs(H.drive()->kappa) : 0.0;
  for (std::size_t i = 0; i < grid.nx(); ++i) {
    const double x = grid.x(i);
    fmax = std::max(fmax, std::abs(H.potential().derivative(x, 1)) + kappa);
    v3max = std::max(v3max, std::abs(H.potential().derivative(x, 3)));
    for (double p : {grid.pmin(), grid.pmax(), 0.0}) {
      hmax = std::max(hmax, std::abs(H(x, p, 0.0)) + kappa * std::abs(x));
    }
  }
  vmax = std::max(std::abs(grid.pmin()), std::abs(grid.pmax())) / H.mass();

  const double s1 = Derivative1D(grid.nx(), 1.0, 1).symbol_bound();
  const double s3 = Derivative1D(grid.np(), 1.0, 3).symbol_bound();
  // Spectral radius of the discrete Poisson operator.
  const double lam = s1 * (vmax / grid.dx() + fmax / grid.dp());

  StabilityBound b;
  auto add = [&](std::string name, double scale) {
    if (std::isfinite(scale) && scale > 0.0) b.scales.emplace_back(std::move(name), scale);
  };
  if (spec.advection) {
    if (vmax > 0.0) add("poisson advection (x)", grid.dx() / vmax);
    if (fmax > 0.0) add("poisson advection (p)", grid.dp() / fmax);
  }
  if (spec.gamma > 0.0) add("double-Poisson dephasing", kRk4Real / (spec.gamma * lam * lam));
  if (spec.Gamma > 0.0) add("gain/loss", kRk4Real / (4.0 * spec.Gamma * hmax * hmax));
  if (spec.hbar2_correction && v3max > 0.0 && H.hbar() > 0.0) {
    const double hb = H.hbar();
    const double dp = grid.dp();
    add("hbar^2 Moyal correction", kRk4Imag * dp * dp * dp / (hb * hb / 24.0 * v3max * s3));
  }
  if (spec.filter) {
    const FilterSpec& f = *spec.filter;
    const double rate = std::abs(f.chi_dot(0.0));
    double radius = 0.0;
    for (int n = 0; n <= f.max_order(); ++n) {
      const double c = std::abs(f.even_taylor_coeffs[n]);
      radius += f.variant == FilterVariant::commutator ? c * std::pow(lam, 2 * n)
                                                       : c * std::pow(4.0 * hmax * hmax, n);
    }
    if (rate * radius > 0.0) add("nested-bracket filter", kRk4Real / (rate * radius));
  }
  if (b.scales.empty()) {
    b.dt = std::numeric_limits<double>::infinity();
    return b;
  }
  const auto it = std::min_element(b.scales.begin(), b.scales.end(),
                                   [](const auto& a, const auto& c) { return a.second < c.second; });
  b.limiting_term = it->first;
  b.dt = factor * it->second;
  return b;
}

Rk4Stepper::Rk4Stepper(GeneratorSpec spec, HamiltonianModel H, PhaseGrid grid,
                       double stability_factor)
    : rhs_(std::move(spec), std::move(H), grid),
      bound_(stability_bound(rhs_.spec(), rhs_.hamiltonian(), grid, stability_factor)) {
  const std::size_t n = grid.size();
  k1_.resize(n);
  k2_.resize(n);
  k3_.resize(n);
  k4_.resize(n);
  stage_.resize(n);
}

void Rk4Stepper::step(std::vector<double>& W, double t, double dt) {
  if (!(dt > 0.0)) throw ContractViolation("step_rk4: dt must be positive");
  if (dt > bound_.dt * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "step_rk4: dt = " << dt << " exceeds the stability bound " << bound_.dt << " set by "
        << bound_.limiting_term;
    throw ContractViolation(msg.str());
  }
  const std::size_t n = W.size();
  const double h2 = 0.5 * dt;
  rhs_.evaluate(W, t, k1_);
  for (std::size_t q = 0; q < n; ++q) stage_[q] = W[q] + h2 * k1_[q];
  rhs_.evaluate(stage_, t + h2, k2_);
  for (std::size_t q = 0; q < n; ++q) stage_[q] = W[q] + h2 * k2_[q];
  rhs_.evaluate(stage_, t + h2, k3_);
  for (std::size_t q = 0; q < n; ++q) stage_[q] = W[q] + dt * k3_[q];
  rhs_.evaluate(stage_, t + dt, k4_);
  const double w = dt / 6.0;
  bool finite = true;
  for (std::size_t q = 0; q < n; ++q) {
    W[q] += w * (k1_[q] + 2.0 * (k2_[q] + k3_[q]) + k4_[q]);
    finite = finite && std::isfinite(W[q]);
  }
  if (!finite) {
    std::ostringstream msg;
    msg << "non-finite field after RK4 step at t = " << t << ", dt = " << dt;
    throw NumericalInstability(msg.str(), t, dt, bound_.limiting_term);
  }
  if (rhs_.spec().renormalize_each_step) {
    const double norm = integrate(W, rhs_.grid());
    if (!(norm > 0.0)) {
      throw NumericalInstability("renormalization: field has non-positive mass", t, dt,
                                 "renormalization");
    }
    for (double& v : W) v /= norm;
  }
}

WignerField step_rk4(const GeneratorSpec& spec, const HamiltonianModel& H, const WignerField& W,
                     double t, double dt) {
  Rk4Stepper stepper(spec, H, W.grid());
  std::vector<double> v(W.values().begin(), W.values().end());
  stepper.step(v, t, dt);
  return WignerField(W.grid(), std::move(v));
}

namespace {

std::string dominant_term(RhsEvaluator& rhs, std::span<const double> W, double t) {
  std::string name;
  double best = -1.0;
  for (const auto& [term, norm] : rhs.term_norms(W, t)) {
    if (norm > best) {
      best = norm;
      name = term;
    }
  }
  return name;
}

}  // namespace

EvolveResult evolve(const GeneratorSpec& spec, const HamiltonianModel& H, const WignerField& W0,
                    double t_max, double dt, const EvolveOptions& options) {
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw ConfigurationError("evolve: t_max must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigurationError("evolve: dt must be positive");
  if (options.record_every == 0) throw ConfigurationError("evolve: record_every must be >= 1");
  const PhaseGrid& grid = W0.grid();
  Rk4Stepper stepper(spec, H, grid, options.stability_factor);

  EvolveResult result{ObservableSeries{}, {}, W0, 0.0, 1};
  result.substeps = static_cast<std::size_t>(std::ceil(dt / stepper.bound().dt * (1.0 - 1e-12)));
  result.substeps = std::max<std::size_t>(result.substeps, 1);

  std::vector<double> snap_times = options.snapshot_times;
  std::sort(snap_times.begin(), snap_times.end());
  std::size_t next_snap = 0;
  std::vector<double> W(W0.values().begin(), W0.values().end());
  std::vector<double> before;
  const double w0max = std::max(W0.max_abs(), std::numeric_limits<double>::min());

  auto emit = [&](double t, bool record) {
    WignerField field(grid, W);
    while (next_snap < snap_times.size() && snap_times[next_snap] <= t + 1e-9 * dt) {
      result.snapshots.push_back(Snapshot{field, t});
      ++next_snap;
    }
    if (record) {
      ObservableRecord rec = measure(H, field, t);
      if (!(rec.norm > 0.0)) {
        const std::string term = dominant_term(stepper.rhs(), W, t);
        throw NumericalInstability("field lost all mass at t = " + format_double(t) +
                                       "; dominant term: " + term,
                                   t, dt, term);
      }
      result.series.push(rec);
      if (options.observer) options.observer(t, field);
    }
  };

  emit(0.0, true);
  const auto nsteps = static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
  for (std::size_t k = 1; k <= nsteps; ++k) {
    const double t0 = static_cast<double>(k - 1) * dt;
    const double t1 = k == nsteps ? t_max : static_cast<double>(k) * dt;
    const double h = (t1 - t0) / static_cast<double>(result.substeps);
    for (std::size_t s = 0; s < result.substeps; ++s) {
      const double ts = t0 + static_cast<double>(s) * h;
      before = W;
      try {
        stepper.step(W, ts, h);
      } catch (const NumericalInstability& e) {
        throw NumericalInstability(std::string(e.what()) + "; dominant term: " +
                                       dominant_term(stepper.rhs(), before, ts),
                                   ts, h, dominant_term(stepper.rhs(), before, ts));
      }
      double m = 0.0;
      for (double v : W) m = std::max(m, std::abs(v));
      if (m > kGrowthLimit * w0max) {
        const std::string term = dominant_term(stepper.rhs(), before, ts);
        std::ostringstream msg;
        msg << "field grew by more than " << kGrowthLimit << " at t = " << ts << " (dt = " << h
            << "); dominant term: " << term;
        throw NumericalInstability(msg.str(), ts, h, term);
      }
    }
    emit(t1, k % options.record_every == 0 || k == nsteps);
  }
  result.final_field = WignerField(grid, std::move(W));
  result.t_final = t_max;
  return result;
}

}  // namespace wflow
