#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wflow {

enum class FilterVariant {
  commutator,      // frequency filter: nested Poisson brackets of even order
  anticommutator,  // eigenvalue filter: 2^{2n}(H^{2n} - <H^{2n}>) W
};

/// Truncated spectral-filter series.
///
/// `even_taylor_coeffs[n]` is G^{(2n)}(0)/(2n)! for n = 0..N_max; the coefficients are taken
/// as given (no sign or factor conversions). `chi_dot` is the rate of the filter parameter.
struct FilterSpec {
  static constexpr int kDefaultMaxOrder = 3;
  static constexpr int kMaxOrder = 4;

  std::vector<double> even_taylor_coeffs;
  std::function<double(double)> chi_dot = [](double) { return 1.0; };
  FilterVariant variant = FilterVariant::commutator;

  int max_order() const noexcept { return static_cast<int>(even_taylor_coeffs.size()) - 1; }
  void validate() const;
};

/// Which terms enter dW/dt.
struct GeneratorSpec {
  /// Poisson advection {H, W}_P.
  bool advection = true;
  /// Classical energy-dephasing rate in gamma {H,{H,W}_P}_P. For a fluctuating Hamiltonian
  /// with noise strength lambda this is gamma = lambda/2; it is never derived from Gamma.
  double gamma = 0.0;
  /// Balanced gain/loss strength in -4 Gamma (H^2 - <H^2>) W.
  double Gamma = 0.0;
  /// Adds -(hbar^2/24) H Lambda^3 W (the leading Moyal correction).
  bool hbar2_correction = false;
  std::optional<FilterSpec> filter;
  /// Divide W by its integral after every RK4 step.
  bool renormalize_each_step = false;

  /// Throws ConfigurationError unless at least one term is enabled and all rates are valid.
  void validate() const;
  std::string describe() const;
};

}  // namespace wflow
