#pragma once

#include <optional>
#include <vector>

namespace wflow {

/// V(x) = sum_k c_k x^k.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coefficients);

  const std::vector<double>& coefficients() const noexcept { return coeffs_; }
  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }

  double operator()(double x) const noexcept { return derivative(x, 0); }
  /// d^n/dx^n evaluated at x (Horner on the differentiated coefficients).
  double derivative(double x, int n) const noexcept;

 private:
  std::vector<double> coeffs_;
};

/// Periodic linear drive kappa * x * cos(omega * t).
struct Drive {
  double kappa = 0.0;
  double omega = 1.0;
};

/// H(x, p, t) = p^2/2m + V(x) + kappa x cos(omega_d t) for a polynomial potential.
class HamiltonianModel {
 public:
  HamiltonianModel(double mass, Polynomial potential, std::optional<Drive> drive = std::nullopt,
                   double hbar = 1.0);

  /// V = m omega^2 x^2 / 2.
  static HamiltonianModel harmonic(double mass, double omega, double hbar = 1.0);
  /// V = -A x^2 + B x^4, optionally driven.
  static HamiltonianModel double_well(double mass, double A, double B,
                                      std::optional<Drive> drive = std::nullopt,
                                      double hbar = 1.0);

  double mass() const noexcept { return mass_; }
  double hbar() const noexcept { return hbar_; }
  const Polynomial& potential() const noexcept { return potential_; }
  const std::optional<Drive>& drive() const noexcept { return drive_; }
  bool time_dependent() const noexcept { return drive_.has_value() && drive_->kappa != 0.0; }

  double operator()(double x, double p, double t = 0.0) const noexcept;

  /// Drive amplitude at time t: kappa cos(omega_d t), or 0.
  double drive_force(double t) const noexcept;

  /// dH/dx = V'(x) + kappa cos(omega_d t).
  double dHdx(double x, double t = 0.0) const noexcept;
  /// dH/dp = p/m.
  double dHdp(double p) const noexcept { return p / mass_; }

  /// Analytic mixed partial d^a/dx^a d^b/dp^b H.
  double partial(int a, int b, double x, double p, double t = 0.0) const noexcept;

  /// omega if the model is an undriven harmonic oscillator, otherwise nullopt.
  std::optional<double> harmonic_frequency() const noexcept;

 private:
  double mass_;
  Polynomial potential_;
  std::optional<Drive> drive_;
  double hbar_;
};

}  // namespace wflow
