#include "wflow/hamiltonian.hpp"

#include <cmath>

#include "wflow/errors.hpp"

namespace wflow {

Polynomial::Polynomial(std::vector<double> coefficients) : coeffs_(std::move(coefficients)) {
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw ConfigurationError("Polynomial: non-finite coefficient");
  }
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

double Polynomial::derivative(double x, int n) const noexcept {
  const int deg = degree();
  if (n > deg) return 0.0;
  double acc = 0.0;
  for (int k = deg; k >= n; --k) {
    double falling = 1.0;
    for (int q = 0; q < n; ++q) falling *= static_cast<double>(k - q);
    acc = acc * x + falling * coeffs_[k];
  }
  return acc;
}

HamiltonianModel::HamiltonianModel(double mass, Polynomial potential, std::optional<Drive> drive,
                                   double hbar)
    : mass_(mass), potential_(std::move(potential)), drive_(drive), hbar_(hbar) {
  if (!(mass > 0.0)) throw ConfigurationError("HamiltonianModel: mass must be positive");
  if (!(hbar >= 0.0)) throw ConfigurationError("HamiltonianModel: hbar must be >= 0");
  if (drive_ && (!std::isfinite(drive_->kappa) || !std::isfinite(drive_->omega))) {
    throw ConfigurationError("HamiltonianModel: non-finite drive parameters");
  }
}

HamiltonianModel HamiltonianModel::harmonic(double mass, double omega, double hbar) {
  return HamiltonianModel(mass, Polynomial({0.0, 0.0, 0.5 * mass * omega * omega}), std::nullopt,
                          hbar);
}

HamiltonianModel HamiltonianModel::double_well(double mass, double A, double B,
                                               std::optional<Drive> drive, double hbar) {
  return HamiltonianModel(mass, Polynomial({0.0, 0.0, -A, 0.0, B}), drive, hbar);
}

double HamiltonianModel::drive_force(double t) const noexcept {
  return drive_ ? drive_->kappa * std::cos(drive_->omega * t) : 0.0;
}

double HamiltonianModel::operator()(double x, double p, double t) const noexcept {
  return 0.5 * p * p / mass_ + potential_(x) + drive_force(t) * x;
}

double HamiltonianModel::dHdx(double x, double t) const noexcept {
  return potential_.derivative(x, 1) + drive_force(t);
}

double HamiltonianModel::partial(int a, int b, double x, double p, double t) const noexcept {
  if (a == 0 && b == 0) return (*this)(x, p, t);
  if (a > 0 && b > 0) return 0.0;
  if (a == 0) {
    if (b == 1) return p / mass_;
    if (b == 2) return 1.0 / mass_;
    return 0.0;
  }
  double v = potential_.derivative(x, a);
  if (a == 1) v += drive_force(t);
  return v;
}

std::optional<double> HamiltonianModel::harmonic_frequency() const noexcept {
  if (time_dependent()) return std::nullopt;
  const auto& c = potential_.coefficients();
  if (c.size() != 3 || c[1] != 0.0 || !(c[2] > 0.0)) return std::nullopt;
  return std::sqrt(2.0 * c[2] / mass_);
}

}  // namespace wflow
