#include "wflow/oracles.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "wflow/errors.hpp"
#include "wflow/stencil.hpp"

namespace wflow {

using std::numbers::pi;

PhasePoint sho_flow(double x, double p, double u, double m, double omega) {
  const double c = std::cos(omega * u);
  const double s = std::sin(omega * u);
  const double mw = m * omega;
  return {c * x + s / mw * p, -mw * s * x + c * p};
}

PhasePoint hamiltonian_flow(const HamiltonianModel& H, PhasePoint z, double t0, double u,
                            std::size_t steps) {
  if (steps == 0) throw ConfigurationError("hamiltonian_flow: steps must be >= 1");
  const double h = u / static_cast<double>(steps);
  auto f = [&](double t, double x, double p) {
    return PhasePoint{H.dHdp(p), -H.dHdx(x, t)};
  };
  double t = t0;
  for (std::size_t k = 0; k < steps; ++k) {
    const PhasePoint a = f(t, z.x, z.p);
    const PhasePoint b = f(t + 0.5 * h, z.x + 0.5 * h * a.x, z.p + 0.5 * h * a.p);
    const PhasePoint c = f(t + 0.5 * h, z.x + 0.5 * h * b.x, z.p + 0.5 * h * b.p);
    const PhasePoint d = f(t + h, z.x + h * c.x, z.p + h * c.p);
    z.x += h / 6.0 * (a.x + 2.0 * (b.x + c.x) + d.x);
    z.p += h / 6.0 * (a.p + 2.0 * (b.p + c.p) + d.p);
    t = t0 + static_cast<double>(k + 1) * h;
  }
  return z;
}

namespace {

using Gauss64 = boost::math::quadrature::gauss<double, HeatKernelQuadrature::kPoints>;

// sum over `panels` equal Gauss-Legendre panels of [a, b]
template <class F>
double gauss_panels(const F& f, double a, double b, int panels) {
  const auto& xs = Gauss64::abscissa();
  const auto& ws = Gauss64::weights();
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = a + (k + 0.5) * width;
    const double half = 0.5 * width;
    double s = 0.0;
    // boost stores the non-negative half of the symmetric rule
    for (std::size_t q = 0; q < xs.size(); ++q) {
      if (xs[q] == 0.0) {
        s += ws[q] * f(mid);
      } else {
        s += ws[q] * (f(mid - half * xs[q]) + f(mid + half * xs[q]));
      }
    }
    total += half * s;
  }
  return total;
}

}  // namespace

PhaseFunction heat_kernel_function(PhaseFunction W0, double gamma, double t, double m,
                                   double omega, HeatKernelQuadrature quad) {
  if (!(gamma > 0.0)) throw DomainError("heat_kernel_solution: gamma must be > 0");
  if (!(t > 0.0)) throw DomainError("heat_kernel_solution: t must be > 0");
  const double var = 2.0 * gamma * t;
  const double sd = std::sqrt(var);
  const double a = t - quad.window_sd * sd;
  const double b = t + quad.window_sd * sd;
  const double norm = 1.0 / std::sqrt(2.0 * pi * var);
  return [=](double x, double p) {
    auto integrand = [&](double u) {
      const double d = u - t;
      const PhasePoint z = sho_flow(x, p, -u, m, omega);
      return norm * std::exp(-d * d / (2.0 * var)) * W0(z.x, z.p);
    };
    double prev = gauss_panels(integrand, a, b, 1);
    for (int panels = 2; panels <= quad.max_panels; panels *= 2) {
      const double next = gauss_panels(integrand, a, b, panels);
      if (std::abs(next - prev) < quad.tolerance) return next;
      prev = next;
    }
    return prev;
  };
}

WignerField heat_kernel_solution(const PhaseFunction& W0, double gamma, double t, double m,
                                 double omega, const PhaseGrid& grid,
                                 const HeatKernelQuadrature& quad) {
  const PhaseFunction f = heat_kernel_function(W0, gamma, t, m, omega, quad);
  return WignerField::sample(grid, f);
}

PhasePoint sho_first_moments(double x0, double p0, double m, double omega, double gamma, double t) {
  const double d = std::exp(-gamma * omega * omega * t);
  const PhasePoint z = sho_flow(x0, p0, t, m, omega);
  return {d * z.x, d * z.p};
}

PhaseMoments sho_moments(const GaussianParams& g, double m, double omega, double gamma, double t) {
  const double mw = m * omega;
  const double w2 = omega * omega;
  const double d2 = std::exp(-4.0 * gamma * w2 * t);
  const double c2 = d2 * std::cos(2.0 * omega * t);
  const double s2 = d2 * std::sin(2.0 * omega * t);
  const double xx = g.x0 * g.x0 + g.sigma_x * g.sigma_x;
  const double pp = g.p0 * g.p0 + g.sigma_p * g.sigma_p;
  const double xp = g.x0 * g.p0;
  const PhasePoint first = sho_first_moments(g.x0, g.p0, m, omega, gamma, t);
  PhaseMoments r;
  r.x = first.x;
  r.p = first.p;
  r.x2 = 0.5 * xx * (1.0 + c2) + 0.5 * pp / (mw * mw) * (1.0 - c2) + xp / mw * s2;
  r.p2 = 0.5 * mw * mw * xx * (1.0 - c2) + 0.5 * pp * (1.0 + c2) - mw * xp * s2;
  r.xp = 0.5 * s2 * (pp / mw - mw * xx) + xp * c2;
  return r;
}

PhaseMoments sho_moments_as_printed(const GaussianParams& g, double m, double omega, double gamma,
                                    double t) {
  const double mw = m * omega;
  const double w2 = omega * omega;
  const double d1 = std::exp(-gamma * w2 * t);
  const double e2 = std::exp(-2.0 * t * gamma * w2);
  const double c1 = std::cos(omega * t), s1 = std::sin(omega * t);
  const double c2 = std::cos(2.0 * omega * t), s2 = std::sin(2.0 * omega * t);
  const double x0 = g.x0, p0 = g.p0;
  PhaseMoments r;
  r.x = d1 * (x0 * c1 + p0 / mw * s1);
  r.p = mw * d1 * (-x0 * c1 + p0 / mw * s1);
  r.x2 = e2 * ((x0 * x0 / 2.0 - p0 * p0 / (2.0 * mw * mw)) * c2) + g.sigma_x * g.sigma_x +
         x0 * p0 / (2.0 * mw) * e2 * s2 + x0 * x0 / 2.0 + p0 * p0 / (2.0 * mw * mw);
  r.p2 = mw * mw * (-r.x2 + g.sigma_x * g.sigma_x + g.sigma_p * g.sigma_p);
  r.xp = mw * ((p0 * p0 / (mw * mw) - x0 * x0) * e2 * s2 +
               x0 * p0 / mw * (1.0 - 2.0 * e2 * c2));
  return r;
}

double ActionAngleField::I(std::size_t i) const noexcept {
  return nI > 1 ? I_max * static_cast<double>(i) / static_cast<double>(nI - 1) : 0.0;
}

double ActionAngleField::theta(std::size_t j) const noexcept {
  return 2.0 * pi * static_cast<double>(j) / static_cast<double>(ntheta);
}

double ActionAngleField::dI() const noexcept {
  return nI > 1 ? I_max / static_cast<double>(nI - 1) : 0.0;
}

double max_contained_action(const PhaseGrid& g, double m, double omega) {
  const double s = std::sqrt(m * omega);
  if (!(g.xmin() < 0.0 && g.xmax() > 0.0 && g.pmin() < 0.0 && g.pmax() > 0.0)) {
    throw ConfigurationError("action-angle resampling: grid window must contain the origin");
  }
  const double r = std::min({-g.xmin() * s, g.xmax() * s, -g.pmin() / s, g.pmax() / s});
  return 0.5 * r * r;
}

double interpolate(const WignerField& W, double x, double p, Interpolation method) {
  const PhaseGrid& g = W.grid();
  const double fx = (x - g.xmin()) / g.dx();
  const double fp = (p - g.pmin()) / g.dp();
  const double nx1 = static_cast<double>(g.nx() - 1);
  const double np1 = static_cast<double>(g.np() - 1);
  if (!(fx >= 0.0 && fx <= nx1 && fp >= 0.0 && fp <= np1)) return 0.0;
  if (method == Interpolation::bilinear) {
    const auto i = std::min(static_cast<std::size_t>(fx), g.nx() - 2);
    const auto j = std::min(static_cast<std::size_t>(fp), g.np() - 2);
    const double a = fx - static_cast<double>(i);
    const double b = fp - static_cast<double>(j);
    return (1 - a) * (1 - b) * W(i, j) + a * (1 - b) * W(i + 1, j) + (1 - a) * b * W(i, j + 1) +
           a * b * W(i + 1, j + 1);
  }
  // 4x4 Lagrange stencil, shifted inward at the edges
  auto start = [](double f, std::size_t n) {
    const auto base = static_cast<long>(std::floor(f)) - 1;
    return static_cast<std::size_t>(std::clamp<long>(base, 0, static_cast<long>(n) - 4));
  };
  const std::size_t i0 = start(fx, g.nx());
  const std::size_t j0 = start(fp, g.np());
  auto weights = [](double s, double* w) {
    // nodes at 0, 1, 2, 3 relative to the stencil start
    w[0] = -(s - 1) * (s - 2) * (s - 3) / 6.0;
    w[1] = s * (s - 2) * (s - 3) / 2.0;
    w[2] = -s * (s - 1) * (s - 3) / 2.0;
    w[3] = s * (s - 1) * (s - 2) / 6.0;
  };
  double wx[4], wp[4];
  weights(fx - static_cast<double>(i0), wx);
  weights(fp - static_cast<double>(j0), wp);
  double v = 0.0;
  for (int a = 0; a < 4; ++a) {
    double row = 0.0;
    for (int b = 0; b < 4; ++b) row += wp[b] * W(i0 + a, j0 + b);
    v += wx[a] * row;
  }
  return v;
}

ActionAngleField to_action_angle(const WignerField& W, double m, double omega, std::size_t nI,
                                 std::size_t ntheta, double I_max, Interpolation method) {
  if (nI < 2) throw ConfigurationError("to_action_angle: nI must be >= 2");
  if (ntheta < 4 || (ntheta & (ntheta - 1)) != 0) {
    throw ConfigurationError("to_action_angle: n_theta must be a power of two >= 4");
  }
  const PhaseGrid& g = W.grid();
  const double contained = max_contained_action(g, m, omega);
  if (I_max <= 0.0) I_max = contained;
  if (I_max > contained * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "to_action_angle: rings up to I = " << I_max << " leave the grid (largest contained "
        << contained << "); values outside are treated as 0";
    warn(msg.str());
  }
  ActionAngleField out{nI, ntheta, I_max, std::vector<double>(nI * ntheta)};
  const double s = std::sqrt(m * omega);
  for (std::size_t i = 0; i < nI; ++i) {
    const double r = std::sqrt(2.0 * out.I(i));
    for (std::size_t j = 0; j < ntheta; ++j) {
      const double th = out.theta(j);
      const double X = r * std::cos(th);
      const double P = r * std::sin(th);
      out.values[i * ntheta + j] = interpolate(W, X / s, P * s, method);
    }
  }
  return out;
}

RingSpectrum ring_spectrum(const ActionAngleField& field, int K) {
  if (K < 0 || 2 * static_cast<std::size_t>(K) >= field.ntheta) {
    throw ConfigurationError("ring_spectrum: need 0 <= K < n_theta / 2");
  }
  RingSpectrum s;
  s.K = K;
  s.actions.resize(field.nI);
  s.coeffs.assign(field.nI * (2 * K + 1), {});
  const double inv = 1.0 / static_cast<double>(field.ntheta);
  for (std::size_t i = 0; i < field.nI; ++i) {
    s.actions[i] = field.I(i);
    for (int k = -K; k <= K; ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t j = 0; j < field.ntheta; ++j) {
        acc += field(i, j) * std::polar(1.0, -k * field.theta(j));
      }
      s.at(i, k) = acc * inv;
    }
  }
  return s;
}

RingSpectrum fourier_mode_evolution(const RingSpectrum& spectrum, double gamma, double omega,
                                    double t) {
  RingSpectrum out = spectrum;
  for (std::size_t i = 0; i < spectrum.actions.size(); ++i) {
    for (int k = -spectrum.K; k <= spectrum.K; ++k) {
      const double kk = static_cast<double>(k);
      const std::complex<double> rate(-gamma * omega * omega * kk * kk, kk * omega);
      out.at(i, k) = spectrum.at(i, k) * std::exp(rate * t);
    }
  }
  return out;
}

ActionAngleField reconstruct(const RingSpectrum& spectrum, std::size_t ntheta, double I_max,
                             double* max_imag) {
  ActionAngleField out{spectrum.actions.size(), ntheta, I_max,
                       std::vector<double>(spectrum.actions.size() * ntheta)};
  double worst = 0.0;
  for (std::size_t i = 0; i < out.nI; ++i) {
    for (std::size_t j = 0; j < ntheta; ++j) {
      std::complex<double> acc = 0.0;
      for (int k = -spectrum.K; k <= spectrum.K; ++k) {
        acc += spectrum.at(i, k) * std::polar(1.0, k * out.theta(j));
      }
      out.values[i * ntheta + j] = acc.real();
      worst = std::max(worst, std::abs(acc.imag()));
    }
  }
  if (max_imag) *max_imag = worst;
  return out;
}

std::vector<double> energy_marginal(const ActionAngleField& field) {
  std::vector<double> out(field.nI);
  for (std::size_t i = 0; i < field.nI; ++i) {
    std::span<const double> ring(field.values.data() + i * field.ntheta, field.ntheta);
    out[i] = pairwise_sum(ring) / static_cast<double>(field.ntheta);
  }
  return out;
}

double gaussian_action_angle(double I, double theta, double I0, double phi, double sigma) {
  const double s2 = sigma * sigma;
  return std::exp(-((I + I0) - 2.0 * std::sqrt(I * I0) * std::cos(theta - phi)) / s2) /
         (2.0 * pi * s2);
}

double gaussian_action_angle_as_printed(double I, double theta, double I0, double phi,
                                        double sigma) {
  const double s2 = sigma * sigma;
  return std::exp(-((I + I0) - std::sqrt(I * I0) * std::cos(theta - phi)) / s2) / (2.0 * pi * s2);
}

double gaussian_energy_marginal(double I, double I0, double sigma) {
  const double s2 = sigma * sigma;
  const double z = 2.0 * std::sqrt(I * I0) / s2;
  // e^{-(I+I0)/s2} I_0(z) with the large-z growth folded into the exponent
  const double scaled = z < 50.0 ? std::cyl_bessel_i(0.0, z) * std::exp(-z)
                                 : 1.0 / std::sqrt(2.0 * pi * z) *
                                       (1.0 + 1.0 / (8.0 * z) + 9.0 / (128.0 * z * z));
  return std::exp(z - (I + I0) / s2) * scaled / (2.0 * pi * s2);
}

std::vector<double> gainloss_marginal(const std::vector<double>& actions,
                                      const std::vector<double>& marginal0, double Gamma,
                                      double omega, double t) {
  if (actions.size() != marginal0.size() || actions.size() < 2) {
    throw ConfigurationError("gainloss_marginal: need matching action and marginal samples");
  }
  std::vector<double> out(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const double e = omega * actions[i];
    out[i] = marginal0[i] * std::exp(-4.0 * Gamma * e * e * t);
  }
  const double h = actions[1] - actions[0];
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    total += (i == 0 || i + 1 == out.size() ? 0.5 : 1.0) * out[i];
  }
  total *= 2.0 * pi * h;
  for (double& v : out) v /= total;
  return out;
}

WignerField gainloss_closed_form(const PhaseFunction& W0, const HamiltonianModel& H, double Gamma,
                                 double t, const PhaseGrid& grid) {
  if (H.time_dependent()) {
    throw UnsupportedError("gainloss_closed_form: time-dependent Hamiltonians are not supported");
  }
  if (!(Gamma >= 0.0)) throw ConfigurationError("gainloss_closed_form: Gamma must be >= 0");
  const auto omega = H.harmonic_frequency();
  std::size_t steps = 0;
  if (!omega) {
    steps = std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(std::abs(t) / 1e-3)));
    warn("gainloss_closed_form: non-harmonic flow traced with RK4 characteristics (approximate)");
  }
  WignerField out = WignerField::sample(grid, [&](double x, double p) {
    const PhasePoint z = omega ? sho_flow(x, p, -t, H.mass(), *omega)
                               : hamiltonian_flow(H, {x, p}, 0.0, -t, steps);
    const double h = H(x, p, 0.0);
    return W0(z.x, z.p) * std::exp(-4.0 * Gamma * h * h * t);
  });
  const double norm = integrate(out);
  if (!(norm > 0.0)) throw DomainError("gainloss_closed_form: no mass left on the grid");
  out *= 1.0 / norm;
  return out;
}

WignerField gainloss_closed_form(const WignerField& W0, const HamiltonianModel& H, double Gamma,
                                 double t) {
  const WignerField copy = W0;
  return gainloss_closed_form(
      [copy](double x, double p) { return interpolate(copy, x, p, Interpolation::cubic); }, H, Gamma,
      t, W0.grid());
}

std::complex<double> angular_moment(const WignerField& W, int k, double m, double omega) {
  if (k < 0) throw ConfigurationError("angular_moment: k must be >= 0");
  const PhaseGrid& g = W.grid();
  const double s = std::sqrt(m * omega);
  std::vector<double> re(g.size()), im(g.size());
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.np(); ++j) {
      const std::complex<double> z = std::pow(std::complex<double>(s * g.x(i), -g.p(j) / s), k);
      re[g.index(i, j)] = z.real();
      im[g.index(i, j)] = z.imag();
    }
  }
  return {integrate_product(re, W.values(), g), integrate_product(im, W.values(), g)};
}

}  // namespace wflow
