#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "wflow/grid.hpp"
#include "wflow/hamiltonian.hpp"
#include "wflow/states.hpp"

namespace wflow {

struct PhasePoint {
  double x = 0.0;
  double p = 0.0;
};

/// Forward harmonic flow: (x, p) after time u under H = p^2/2m + m w^2 x^2/2.
PhasePoint sho_flow(double x, double p, double u, double m, double omega);

/// Hamilton's equations integrated from t0 to t0 + u with RK4 (u may be negative).
PhasePoint hamiltonian_flow(const HamiltonianModel& H, PhasePoint z, double t0, double u,
                            std::size_t steps);

struct HeatKernelQuadrature {
  /// Gauss-Legendre points per panel.
  static constexpr int kPoints = 64;
  /// Half-width of the integration window in kernel standard deviations.
  double window_sd = 6.0;
  /// Panels are doubled until the value changes by less than this.
  double tolerance = 1e-8;
  int max_panels = 64;
};

/// Heat-kernel solution of dW/dt = L W + gamma L^2 W for the harmonic oscillator:
/// W(z, t) = int K(u) W0(flow_{-u}(z)) du with K Gaussian of mean t and variance 2 gamma t.
/// Throws DomainError unless gamma > 0 and t > 0.
PhaseFunction heat_kernel_function(PhaseFunction W0, double gamma, double t, double m,
                                   double omega, HeatKernelQuadrature quad = {});

WignerField heat_kernel_solution(const PhaseFunction& W0, double gamma, double t, double m,
                                 double omega, const PhaseGrid& grid,
                                 const HeatKernelQuadrature& quad = {});

struct PhaseMoments {
  double x = 0.0;
  double p = 0.0;
  double x2 = 0.0;
  double p2 = 0.0;
  double xp = 0.0;
};

/// First moments of the dephasing solution for a Gaussian started at (x0, p0).
/// <x> = e^{-gamma w^2 t}[x0 cos wt + p0/(m w) sin wt]; <p> follows the same damped flow,
/// <p> = e^{-gamma w^2 t}[-m w x0 sin wt + p0 cos wt].
PhasePoint sho_first_moments(double x0, double p0, double m, double omega, double gamma, double t);

/// Exact raw moments of the heat-kernel solution for a Gaussian initial state
/// (first moments damp as e^{-gamma w^2 t}, second harmonics as e^{-4 gamma w^2 t}).
PhaseMoments sho_moments(const GaussianParams& g, double m, double omega, double gamma, double t);

/// The closed-form moment expressions exactly as they are printed in the source derivation,
/// kept for comparison only (the <p> and second-moment entries are not reliable).
PhaseMoments sho_moments_as_printed(const GaussianParams& g, double m, double omega, double gamma,
                                    double t);

enum class Interpolation { bilinear, cubic };

/// W sampled on rings I_i = I_max i/(nI-1) and angles theta_j = 2 pi j / n_theta, with
/// X = sqrt(m w) x = sqrt(2I) cos theta, P = p / sqrt(m w) = sqrt(2I) sin theta.
struct ActionAngleField {
  std::size_t nI = 0;
  std::size_t ntheta = 0;
  double I_max = 0.0;
  std::vector<double> values;  // row-major, I outer

  double I(std::size_t i) const noexcept;
  double theta(std::size_t j) const noexcept;
  double dI() const noexcept;
  double operator()(std::size_t i, std::size_t j) const noexcept { return values[i * ntheta + j]; }
};

/// Largest action whose ring fits inside the grid window.
double max_contained_action(const PhaseGrid& grid, double m, double omega);

/// Resamples W onto action-angle rings. I_max <= 0 selects max_contained_action().
/// Warns when a ring leaves the grid; n_theta must be a power of two.
ActionAngleField to_action_angle(const WignerField& W, double m, double omega, std::size_t nI,
                                 std::size_t ntheta, double I_max = 0.0,
                                 Interpolation method = Interpolation::bilinear);

/// Grid value interpolated at an arbitrary point (clamped stencils at the edges).
double interpolate(const WignerField& W, double x, double p, Interpolation method);

/// Per-ring angular Fourier coefficients W_k(I) = (1/n) sum_j W(I, theta_j) e^{-i k theta_j}.
struct RingSpectrum {
  std::vector<double> actions;
  int K = 0;
  std::vector<std::complex<double>> coeffs;  // ring-major, k = -K..K

  std::complex<double> at(std::size_t ring, int k) const { return coeffs[ring * (2 * K + 1) + (k + K)]; }
  std::complex<double>& at(std::size_t ring, int k) { return coeffs[ring * (2 * K + 1) + (k + K)]; }
};

RingSpectrum ring_spectrum(const ActionAngleField& field, int K);

/// Mode-wise solution of dW/dt = w d_theta W + gamma w^2 d_theta^2 W, the action-angle form
/// of the dephasing PDE with theta = atan2(P, X): W_k(t) = W_k(0) exp[(i k w - gamma w^2 k^2) t].
RingSpectrum fourier_mode_evolution(const RingSpectrum& spectrum, double gamma, double omega, double t);

/// W(I_i, theta_j) = sum_k W_k(I_i) e^{i k theta_j}; the imaginary residue is returned in
/// `max_imag` when provided.
ActionAngleField reconstruct(const RingSpectrum& spectrum, std::size_t ntheta, double I_max,
                             double* max_imag = nullptr);

/// (1/2pi) int W(I, theta) dtheta per ring (trapezoid on the periodic axis).
std::vector<double> energy_marginal(const ActionAngleField& field);

/// Action-angle Gaussian for m w = 1, sigma_x = sigma_p = sigma:
/// (1/2 pi s^2) exp(-[(I + I0) - 2 sqrt(I I0) cos(theta - phi)] / s^2).
double gaussian_action_angle(double I, double theta, double I0, double phi, double sigma);
/// Same expression with the cross term printed as sqrt(I I0) (no factor 2).
double gaussian_action_angle_as_printed(double I, double theta, double I0, double phi, double sigma);

/// Energy marginal of that Gaussian: (1/2 pi s^2) e^{-(I+I0)/s^2} I_0(2 sqrt(I I0) / s^2).
double gaussian_energy_marginal(double I, double I0, double sigma);

/// Closed-form gain/loss marginal: Wbar(I,0) e^{-4 Gamma w^2 I^2 t} normalized so that
/// 2 pi int Wbar dI = 1 (trapezoid over the supplied, uniformly spaced actions).
std::vector<double> gainloss_marginal(const std::vector<double>& actions,
                                      const std::vector<double>& marginal0, double Gamma,
                                      double omega, double t);

/// Solution of dW/dt = {H, W} - 4 Gamma (H^2 - <H^2>) W: W0(flow_{-t}(z)) e^{-4 Gamma H^2 t},
/// normalized by grid quadrature. The harmonic flow is analytic; other time-independent
/// Hamiltonians are traced with RK4 characteristics (approximate, warns).
/// Throws UnsupportedError for time-dependent H.
WignerField gainloss_closed_form(const PhaseFunction& W0, const HamiltonianModel& H, double Gamma,
                                 double t, const PhaseGrid& grid);
/// Grid-sampled initial state, pulled back with cubic interpolation.
WignerField gainloss_closed_form(const WignerField& W0, const HamiltonianModel& H, double Gamma,
                                 double t);

/// M_k = int W (X - iP)^k dx dp, the k-th angular moment. Under the harmonic dephasing flow
/// it evolves exactly as M_k(0) exp[(i k w - gamma w^2 k^2) t].
std::complex<double> angular_moment(const WignerField& W, int k, double m, double omega);

}  // namespace wflow
