#include "wflow/brackets.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wflow/errors.hpp"

namespace wflow {

void FilterSpec::validate() const {
  if (max_order() < 1) throw ConfigurationError("FilterSpec: need coefficients for n = 0..N_max with N_max >= 1");
  if (max_order() > kMaxOrder) {
    throw ConfigurationError("FilterSpec: N_max = " + std::to_string(max_order()) +
                             " exceeds the supported " + std::to_string(kMaxOrder));
  }
  for (double c : even_taylor_coeffs) {
    if (!std::isfinite(c)) throw ConfigurationError("FilterSpec: non-finite Taylor coefficient");
  }
  if (!chi_dot) throw ConfigurationError("FilterSpec: chi_dot is not set");
}

void GeneratorSpec::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigurationError("GeneratorSpec: gamma must be >= 0");
  if (!(Gamma >= 0.0) || !std::isfinite(Gamma)) throw ConfigurationError("GeneratorSpec: Gamma must be >= 0");
  if (filter) filter->validate();
  const bool any = advection || gamma > 0.0 || Gamma > 0.0 || hbar2_correction || filter.has_value();
  if (!any) throw ConfigurationError("GeneratorSpec: no term is enabled (the right-hand side would be zero)");
}

std::string GeneratorSpec::describe() const {
  std::ostringstream s;
  s << "advection=" << (advection ? "on" : "off") << " gamma=" << gamma << " Gamma=" << Gamma
    << " hbar2=" << (hbar2_correction ? "on" : "off");
  if (filter) {
    s << " filter=" << (filter->variant == FilterVariant::commutator ? "commutator" : "anticommutator")
      << "[N=" << filter->max_order() << "]";
  }
  return s.str();
}

namespace {

void check_quartic(const HamiltonianModel& H) {
  if (H.potential().degree() > 4) {
    throw ConfigurationError("hbar^2 Moyal correction: potential degree " +
                             std::to_string(H.potential().degree()) +
                             " > 4 needs hbar^4 terms that are not implemented");
  }
}

void check_normalized(const WignerField& W, const char* who) {
  const double norm = integrate(W);
  if (std::abs(norm - 1.0) > kNormalizationTolerance) {
    std::ostringstream msg;
    msg << who << ": field is not normalized (integral = " << norm << ")";
    throw ContractViolation(msg.str());
  }
}

}  // namespace

RhsEvaluator::RhsEvaluator(GeneratorSpec spec, HamiltonianModel H, PhaseGrid grid)
    : spec_(std::move(spec)),
      H_(std::move(H)),
      grid_(grid),
      dx1_(grid.nx(), grid.dx(), 1),
      dp1_(grid.np(), grid.dp(), 1),
      dp3_(grid.np(), grid.dp(), 3),
      energy_time_(std::nan("")) {
  spec_.validate();
  if (spec_.hbar2_correction) check_quartic(H_);
  frozen_ = spec_.hbar2_correction ? 3 : 2;
  if (grid_.nx() <= 2 * frozen_ || grid_.np() <= 2 * frozen_) {
    throw ConfigurationError("grid too small for the frozen boundary frame");
  }
  const std::size_t n = grid_.size();
  x_.resize(grid_.nx());
  dVdx_.resize(grid_.nx());
  d3V_.resize(grid_.nx());
  for (std::size_t i = 0; i < grid_.nx(); ++i) {
    x_[i] = grid_.x(i);
    dVdx_[i] = H_.potential().derivative(x_[i], 1);
    d3V_[i] = H_.potential().derivative(x_[i], 3);
  }
  dHdp_.resize(grid_.np());
  for (std::size_t j = 0; j < grid_.np(); ++j) dHdp_[j] = H_.dHdp(grid_.p(j));
  energy_.resize(n);
  s1_.resize(grid_.np());
  s2_.resize(grid_.np());
  s3_.resize(n);
  s4_.resize(n);
  power_.resize(n);
}

void RhsEvaluator::fill_energy(double t) {
  const bool fresh = !H_.time_dependent() ? !std::isnan(energy_time_) : energy_time_ == t;
  if (fresh) return;
  const double f = H_.drive_force(t);
  const std::size_t np = grid_.np();
  for (std::size_t i = 0; i < grid_.nx(); ++i) {
    const double v = H_.potential()(x_[i]) + f * x_[i];
    double* row = energy_.data() + i * np;
    for (std::size_t j = 0; j < np; ++j) {
      const double p = grid_.p(j);
      row[j] = 0.5 * p * p / H_.mass() + v;
    }
  }
  energy_time_ = t;
}

void RhsEvaluator::poisson(std::span<const double> W, double t, std::span<double> out) {
  // Row-fused: both derivatives of row i live in short buffers, so only W and out stream
  // through memory.
  const double f = H_.drive_force(t);
  const std::size_t np = grid_.np();
  double* dx = s1_.data();
  double* dp = s2_.data();
  for (std::size_t i = 0; i < grid_.nx(); ++i) {
    const std::size_t base = i * np;
    x_derivative_row(dx1_, grid_, W.data(), i, dx);
    dp1_.apply(W.data() + base, dp, 1);
    const double a = dVdx_[i] + f;
    double* o = out.data() + base;
    for (std::size_t j = 0; j < np; ++j) o[j] = a * dp[j] - dHdp_[j] * dx[j];
  }
}

void RhsEvaluator::nested(std::span<const double> W, int n, double t, std::span<double> out) {
  if (n < 1) throw ConfigurationError("nested Poisson order must be >= 1");
  if (n == 1) {
    poisson(W, t, out);
    return;
  }
  poisson(W, t, s3_);
  for (int k = 2; k < n; ++k) {
    poisson(s3_, t, s4_);
    std::swap(s3_, s4_);
  }
  poisson(s3_, t, out);
}

double RhsEvaluator::energy_moment(std::span<const double> W, int k, double t) {
  fill_energy(t);
  for (std::size_t q = 0; q < power_.size(); ++q) power_[q] = std::pow(energy_[q], k);
  return integrate_product(power_, W, grid_);
}

void RhsEvaluator::gainloss(std::span<const double> W, double Gamma, double t,
                            std::span<double> out) {
  fill_energy(t);
  for (std::size_t q = 0; q < power_.size(); ++q) power_[q] = energy_[q] * energy_[q];
  const double mean = integrate_product(power_, W, grid_);
  const double c = -4.0 * Gamma;
  for (std::size_t q = 0; q < out.size(); ++q) out[q] = c * (power_[q] - mean) * W[q];
}

void RhsEvaluator::hbar2(std::span<const double> W, std::span<double> out) {
  apply_along(dp3_, Axis::p, grid_, W, out);
  const double hb = H_.hbar();
  const double c = -hb * hb / 24.0;
  const std::size_t np = grid_.np();
  for (std::size_t i = 0; i < grid_.nx(); ++i) {
    const double a = c * d3V_[i];
    for (std::size_t j = 0; j < np; ++j) out[i * np + j] *= a;
  }
}

void RhsEvaluator::filter_term(std::span<const double> W, double t, std::span<double> out) {
  const FilterSpec& f = *spec_.filter;
  const double rate = f.chi_dot(t);
  const auto& c = f.even_taylor_coeffs;
  const std::size_t n = out.size();
  if (f.variant == FilterVariant::commutator) {
    for (std::size_t q = 0; q < n; ++q) out[q] = rate * c[0] * W[q];
    // s3 holds {H,W}^order, built up one bracket at a time.
    poisson(W, t, s3_);
    for (int order = 2; order <= 2 * f.max_order(); ++order) {
      poisson(s3_, t, s4_);
      std::swap(s3_, s4_);
      if (order % 2 == 0) {
        const double w = rate * c[order / 2];
        for (std::size_t q = 0; q < n; ++q) out[q] += w * s3_[q];
      }
    }
    return;
  }
  // Eigenvalue filter: 2^{2n}(H^{2n} - <H^{2n}>) W; the n = 0 term is (1 - <1>) W.
  fill_energy(t);
  const double mass = integrate(W, grid_);
  for (std::size_t q = 0; q < n; ++q) out[q] = rate * c[0] * (1.0 - mass) * W[q];
  std::fill(power_.begin(), power_.end(), 1.0);
  for (int k = 1; k <= f.max_order(); ++k) {
    for (std::size_t q = 0; q < n; ++q) power_[q] *= energy_[q] * energy_[q];
    const double mean = integrate_product(power_, W, grid_);
    const double w = rate * c[k] * std::pow(4.0, k);
    for (std::size_t q = 0; q < n; ++q) out[q] += w * (power_[q] - mean) * W[q];
  }
}

void RhsEvaluator::evaluate(std::span<const double> W, double t, std::span<double> out) {
  const std::size_t n = out.size();
  bool written = false;
  auto add = [&](const std::vector<double>& term, double scale) {
    if (!written) {
      for (std::size_t q = 0; q < n; ++q) out[q] = scale * term[q];
      written = true;
    } else {
      for (std::size_t q = 0; q < n; ++q) out[q] += scale * term[q];
    }
  };
  if (spec_.advection || spec_.gamma > 0.0) {
    poisson(W, t, s3_);
    if (spec_.gamma > 0.0) {
      poisson(s3_, t, s4_);
      if (spec_.advection) {
        for (std::size_t q = 0; q < n; ++q) out[q] = s3_[q] + spec_.gamma * s4_[q];
      } else {
        for (std::size_t q = 0; q < n; ++q) out[q] = spec_.gamma * s4_[q];
      }
      written = true;
    } else {
      add(s3_, 1.0);
    }
  }
  if (spec_.Gamma > 0.0) {
    fill_energy(t);
    for (std::size_t q = 0; q < n; ++q) power_[q] = energy_[q] * energy_[q];
    const double mean = integrate_product(power_, W, grid_);
    const double c = -4.0 * spec_.Gamma;
    if (!written) {
      for (std::size_t q = 0; q < n; ++q) out[q] = c * (power_[q] - mean) * W[q];
      written = true;
    } else {
      for (std::size_t q = 0; q < n; ++q) out[q] += c * (power_[q] - mean) * W[q];
    }
  }
  if (spec_.hbar2_correction) {
    hbar2(W, s4_);
    add(s4_, 1.0);
  }
  if (spec_.filter) {
    std::vector<double> term(n);
    filter_term(W, t, term);
    add(term, 1.0);
  }
  if (!written) std::fill(out.begin(), out.end(), 0.0);
  freeze_frame(out);
}

void RhsEvaluator::freeze_frame(std::span<double> out) const {
  const std::size_t nx = grid_.nx(), np = grid_.np(), w = frozen_;
  for (std::size_t i = 0; i < nx; ++i) {
    double* row = out.data() + i * np;
    if (i < w || i >= nx - w) {
      std::fill(row, row + np, 0.0);
    } else {
      std::fill(row, row + w, 0.0);
      std::fill(row + np - w, row + np, 0.0);
    }
  }
}

std::vector<std::pair<std::string, double>> RhsEvaluator::term_norms(std::span<const double> W,
                                                                     double t) {
  std::vector<std::pair<std::string, double>> norms;
  std::vector<double> buf(W.size());
  auto linf = [&] {
    double m = 0.0;
    for (double v : buf) m = std::max(m, std::isfinite(v) ? std::abs(v) : INFINITY);
    return m;
  };
  if (spec_.advection) {
    poisson(W, t, buf);
    norms.emplace_back("poisson advection", linf());
  }
  if (spec_.gamma > 0.0) {
    nested(W, 2, t, buf);
    for (double& v : buf) v *= spec_.gamma;
    norms.emplace_back("double-Poisson dephasing", linf());
  }
  if (spec_.Gamma > 0.0) {
    gainloss(W, spec_.Gamma, t, buf);
    norms.emplace_back("gain/loss", linf());
  }
  if (spec_.hbar2_correction) {
    hbar2(W, buf);
    norms.emplace_back("hbar^2 Moyal correction", linf());
  }
  if (spec_.filter) {
    filter_term(W, t, buf);
    norms.emplace_back("nested-bracket filter", linf());
  }
  return norms;
}

WignerField poisson_bracket(const HamiltonianModel& H, const WignerField& W, double t) {
  GeneratorSpec spec;
  RhsEvaluator ev(spec, H, W.grid());
  WignerField out(W.grid());
  ev.poisson(W.values(), t, out.values());
  return out;
}

WignerField nested_poisson(const HamiltonianModel& H, const WignerField& W, int n, double t) {
  if (n < 1 || n > kMaxNestedPoissonOrder) {
    throw UnsupportedError("nested_poisson: order " + std::to_string(n) +
                           " is outside the supported range 1.." +
                           std::to_string(kMaxNestedPoissonOrder));
  }
  GeneratorSpec spec;
  RhsEvaluator ev(spec, H, W.grid());
  WignerField out(W.grid());
  ev.nested(W.values(), n, t, out.values());
  return out;
}

WignerField gainloss_term(const HamiltonianModel& H, const WignerField& W, double Gamma, double t) {
  if (!(Gamma >= 0.0)) throw ConfigurationError("gainloss_term: Gamma must be >= 0");
  check_normalized(W, "gainloss_term");
  GeneratorSpec spec;
  RhsEvaluator ev(spec, H, W.grid());
  WignerField out(W.grid());
  ev.gainloss(W.values(), Gamma, t, out.values());
  return out;
}

WignerField hbar2_moyal_correction(const HamiltonianModel& H, const WignerField& W, double hbar,
                                   double t) {
  check_quartic(H);
  const PhaseGrid& g = W.grid();
  const WignerField w_ppp = partial_derivative(W, Axis::p, 3);
  const WignerField w_xxx = partial_derivative(W, Axis::x, 3);
  const WignerField w_xpp = partial_derivative(partial_derivative(W, Axis::p, 2), Axis::x, 1);
  const WignerField w_xxp = partial_derivative(partial_derivative(W, Axis::p, 1), Axis::x, 2);
  const double c = -hbar * hbar / 24.0;
  WignerField out(g);
  for (std::size_t i = 0; i < g.nx(); ++i) {
    const double x = g.x(i);
    for (std::size_t j = 0; j < g.np(); ++j) {
      const double p = g.p(j);
      const double lam3 = H.partial(3, 0, x, p, t) * w_ppp(i, j) -
                          H.partial(0, 3, x, p, t) * w_xxx(i, j) -
                          3.0 * H.partial(2, 1, x, p, t) * w_xpp(i, j) +
                          3.0 * H.partial(1, 2, x, p, t) * w_xxp(i, j);
      out(i, j) = c * lam3;
    }
  }
  return out;
}

WignerField hbar2_separable_correction(const HamiltonianModel& H, const WignerField& W,
                                       double hbar) {
  check_quartic(H);
  const PhaseGrid& g = W.grid();
  WignerField out = partial_derivative(W, Axis::p, 3);
  const double c = -hbar * hbar / 24.0;
  for (std::size_t i = 0; i < g.nx(); ++i) {
    const double a = c * H.potential().derivative(g.x(i), 3);
    for (std::size_t j = 0; j < g.np(); ++j) out(i, j) *= a;
  }
  return out;
}

WignerField assemble_rhs(const GeneratorSpec& spec, const HamiltonianModel& H,
                         const WignerField& W, double t) {
  RhsEvaluator ev(spec, H, W.grid());
  WignerField out(W.grid());
  ev.evaluate(W.values(), t, out.values());
  return out;
}

}  // namespace wflow
