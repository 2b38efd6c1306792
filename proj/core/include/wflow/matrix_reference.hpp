#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "wflow/generator.hpp"

namespace wflow {

using Matrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Density matrix in the energy eigenbasis E_0..E_{d-1}.
class DensityMatrix {
 public:
  DensityMatrix(Matrix rho, std::vector<double> energies);

  /// Diagonal state with the given populations (not renormalized).
  static DensityMatrix diagonal(const std::vector<double>& populations, std::vector<double> energies);
  /// Pure state |psi><psi| / <psi|psi>.
  static DensityMatrix pure(const Eigen::VectorXcd& psi, std::vector<double> energies);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(rho_.rows()); }
  const Matrix& matrix() const noexcept { return rho_; }
  Matrix& matrix() noexcept { return rho_; }
  const std::vector<double>& energies() const noexcept { return energies_; }
  /// Diagonal Hamiltonian diag(E_n).
  Matrix hamiltonian() const;

  Complex trace() const { return rho_.trace(); }
  double purity() const;
  bool is_hermitian(double tol = 1e-12) const;
  double min_eigenvalue() const;
  /// Hermitian with eigenvalues above -tol.
  bool is_physical(double tol = 1e-10) const;

 private:
  Matrix rho_;
  std::vector<double> energies_;
};

/// SHO spectrum E_n = hbar omega (n + 1/2), n = 0..d-1.
std::vector<double> sho_spectrum(std::size_t d, double omega = 1.0, double hbar = 1.0);

/// rho_mn(t) = rho_mn(0) exp(-(i/hbar) D t - (gamma/2) D^2 t), D = E_m - E_n.
DensityMatrix dephasing_solution(const DensityMatrix& rho0, double gamma, double t, double hbar = 1.0);

/// Populations rho_n e^{-4 Gamma E_n^2 t}, coherences rho_mn e^{-(i/hbar) D t} e^{-Gamma (E_m+E_n)^2 t},
/// both divided by sum_k rho_k e^{-4 Gamma E_k^2 t}. Requires trace 1.
DensityMatrix gainloss_solution(const DensityMatrix& rho0, double Gamma, double t, double hbar = 1.0);

struct MatrixTrajectory {
  std::vector<double> times;
  std::vector<Matrix> states;
};

using MatrixRhs = std::function<Matrix(double t, const Matrix& rho)>;

/// Fixed-step RK4 for a matrix ODE; records every `record_every` steps plus the endpoints.
/// Throws NumericalInstability on non-finite entries.
MatrixTrajectory integrate_matrix_ode(const MatrixRhs& rhs, const Matrix& rho0, double dt,
                                      double t_max, std::size_t record_every = 1);

/// -(i/hbar)[H, rho] - Gamma {H,{H, rho}} + 4 Gamma Tr(H^2 rho) rho.
Matrix nonlinear_me_rhs(const Matrix& rho, const Matrix& H, double Gamma, double hbar = 1.0);

MatrixTrajectory integrate_nonlinear_me(const Matrix& rho0, const Matrix& H, double Gamma, double dt,
                                        double t_max, double hbar = 1.0, std::size_t record_every = 1);

/// L rho = -(i/hbar)[H, rho] - xi {H,{H, rho}} - Gamma [H,[H, rho]] (before the trace correction).
Matrix bracket_generator(const Matrix& rho, const Matrix& H, double Gamma, double xi, double hbar = 1.0);

struct GradientPotential {
  Complex phi0;      // Tr(-(i/hbar)[H, rho] sigma)
  double phi_minus;  // -Gamma ||[H, sigma]||^2
  double phi_plus;   // -xi ||{H, sigma}||^2
  Complex total() const { return phi0 + phi_minus + phi_plus; }
};

/// Basis-free Hilbert-Schmidt evaluation. Throws ConfigurationError on dimension mismatch.
GradientPotential gradient_potential(const Matrix& rho, const Matrix& sigma, const Matrix& H,
                                     double Gamma, double xi, double hbar = 1.0);
/// Same potential from the energy-eigenbasis sums (H is diagonalized first).
GradientPotential gradient_potential_eigenbasis(const Matrix& rho, const Matrix& sigma, const Matrix& H,
                                                double Gamma, double xi, double hbar = 1.0);

/// Central-difference Wirtinger gradient: G_ji = dPhi/dsigma_ij = (dPhi/da - i dPhi/db)/2 with
/// sigma_ij = a + i b, so that dPhi = Tr(G dsigma) to first order.
Matrix wirtinger_gradient(const std::function<Complex(const Matrix&)>& phi, const Matrix& sigma,
                          double h = 1e-5);

/// S = -sum_{nm} 2 E_n ((xi + Gamma) E_n + (xi - Gamma) E_m) |sigma_mn|^2, sigma in the eigenbasis.
double convexity_function(const Matrix& sigma, const std::vector<double>& energies, double Gamma, double xi);

enum class FilterKind { frequency, eigenvalue };

struct FilterFunction {
  std::function<double(double)> G;
  std::function<double(double)> chi;
  FilterKind kind = FilterKind::frequency;

  /// Checks chi(0) = 0 and (frequency kind) G(x) = G(-x) on sample points.
  void validate() const;
};

/// Frequency kind: rho_nm e^{-(i/hbar)(E_n - E_m)t} e^{chi(t) G(E_n - E_m)}.
/// Eigenvalue kind: rho_nm e^{-(i/hbar)(E_n - E_m)t} e^{chi(t) G(E_n + E_m)} / Tr[rho0 e^{chi G(2H)}].
DensityMatrix spectral_filter_solution(const DensityMatrix& rho0, const FilterFunction& filter, double t,
                                       double hbar = 1.0);

/// SFF_w(t) = (1/d^2) sum_{nm} w(E_n - E_m) e^{-i t (E_n - E_m)}.
Complex filtered_sff(const std::vector<double>& spectrum, const std::function<double(double)>& w, double t);

/// -(i/hbar)[H, rho] + chi_dot(t) sum_n c_n [H, rho]_{2n} (commutator variant) or
/// -(i/hbar)[H, rho] + chi_dot(t) sum_n c_n ({H, rho}_{2n} - 4^n Tr(H^{2n} rho) rho) (anticommutator).
Matrix nested_bracket_rhs(const Matrix& rho, const Matrix& H, const FilterSpec& filter, double t,
                          double hbar = 1.0);

/// A frequency filter with G(x) = -x^2 and chi(t) = g t equals dephasing_solution at rate
/// kFilterDephasingFactor * g. Frozen from measure_filter_dephasing_factor().
inline constexpr double kFilterDephasingFactor = 2.0;

/// Fits the two-level coherence decay of both solvers and returns the rate ratio.
double measure_filter_dephasing_factor();

}  // namespace wflow
