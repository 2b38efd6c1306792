#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wflow/generator.hpp"
#include "wflow/grid.hpp"
#include "wflow/hamiltonian.hpp"
#include "wflow/stencil.hpp"

namespace wflow {

/// Largest nested Poisson order accepted by nested_poisson().
inline constexpr int kMaxNestedPoissonOrder = 4;

/// Tolerance on |integral W - 1| for operations that require a normalized field.
inline constexpr double kNormalizationTolerance = 1e-6;

/// {H, W}_P = dH/dx dW/dp - dH/dp dW/dx with analytic H derivatives.
WignerField poisson_bracket(const HamiltonianModel& H, const WignerField& W, double t = 0.0);

/// n-fold nested bracket {H, ... {H, W}_P ...}_P, 1 <= n <= 4.
WignerField nested_poisson(const HamiltonianModel& H, const WignerField& W, int n, double t = 0.0);

/// -4 Gamma (H^2 - <H^2>) W with <H^2> the quadrature of H^2 W.
/// Throws ContractViolation when W is not normalized.
WignerField gainloss_term(const HamiltonianModel& H, const WignerField& W, double Gamma,
                          double t = 0.0);

/// -(hbar^2/24) H Lambda^3 W from the full four-term expansion
/// d3x H d3p W - d3p H d3x W - 3 (d2x dp H)(dx d2p W) + 3 (dx d2p H)(d2x dp W).
/// Requires a potential of degree <= 4 (higher orders would need the hbar^4 terms).
WignerField hbar2_moyal_correction(const HamiltonianModel& H, const WignerField& W, double hbar,
                                   double t = 0.0);

/// Same term via the separable reduction -(hbar^2/24) V'''(x) d3p W (= -hbar^2 B x d3p W
/// for a quartic B x^4).
WignerField hbar2_separable_correction(const HamiltonianModel& H, const WignerField& W,
                                       double hbar);

/// Sum of the enabled terms of `spec`.
WignerField assemble_rhs(const GeneratorSpec& spec, const HamiltonianModel& H,
                         const WignerField& W, double t);

/// Reusable right-hand-side evaluator with cached stencils, coefficients and scratch buffers.
/// Not thread-safe; give each evolution its own instance.
class RhsEvaluator {
 public:
  RhsEvaluator(GeneratorSpec spec, HamiltonianModel H, PhaseGrid grid);

  const GeneratorSpec& spec() const noexcept { return spec_; }
  const HamiltonianModel& hamiltonian() const noexcept { return H_; }
  const PhaseGrid& grid() const noexcept { return grid_; }

  /// out = dW/dt at time t. Nodes within frozen_width() of an edge get zero: the one-sided
  /// closures are fine for a single derivative but make the semi-discrete evolution grow, so
  /// the time stepper holds the outer frame fixed and only the central stencils evolve.
  void evaluate(std::span<const double> W, double t, std::span<double> out);

  /// 2, or 3 with the third-order hbar^2 stencil.
  std::size_t frozen_width() const noexcept { return frozen_; }

  /// Max-norm of every enabled term, for diagnosing instabilities.
  std::vector<std::pair<std::string, double>> term_norms(std::span<const double> W, double t);

  // Individual kernels (out is overwritten).
  void poisson(std::span<const double> W, double t, std::span<double> out);
  void nested(std::span<const double> W, int n, double t, std::span<double> out);
  void gainloss(std::span<const double> W, double Gamma, double t, std::span<double> out);
  void hbar2(std::span<const double> W, std::span<double> out);
  void filter_term(std::span<const double> W, double t, std::span<double> out);

  /// <H(t)^k> by trapezoidal quadrature (no division by the norm).
  double energy_moment(std::span<const double> W, int k, double t);

 private:
  void fill_energy(double t);
  void freeze_frame(std::span<double> out) const;

  GeneratorSpec spec_;
  HamiltonianModel H_;
  PhaseGrid grid_;
  std::size_t frozen_ = 2;
  Derivative1D dx1_;
  Derivative1D dp1_;
  Derivative1D dp3_;
  std::vector<double> x_;
  std::vector<double> dHdp_;     // p_j / m
  std::vector<double> dVdx_;     // V'(x_i) without drive
  std::vector<double> d3V_;      // V'''(x_i)
  std::vector<double> energy_;   // H(x_i, p_j, energy_time_)
  double energy_time_;
  std::vector<double> s1_, s2_, s3_, s4_, power_;
};

}  // namespace wflow
