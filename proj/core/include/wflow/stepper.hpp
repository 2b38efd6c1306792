#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "wflow/brackets.hpp"
#include "wflow/generator.hpp"
#include "wflow/grid.hpp"
#include "wflow/hamiltonian.hpp"
#include "wflow/observables.hpp"
#include "wflow/snapshot.hpp"

namespace wflow {

/// Safety factor applied to every per-term time scale.
inline constexpr double kStabilityFactor = 0.4;

/// Explicit-RK4 step bound and the time scale each enabled term imposes.
struct StabilityBound {
  double dt = 0.0;                                       // C * min(scales)
  std::string limiting_term;                             // term with the smallest scale
  std::vector<std::pair<std::string, double>> scales;    // before the factor C
};

/// Scales: dx/v_max and dp/F_max for advection, the RK4 real-axis limit of the discrete
/// double bracket for gamma, 1/(4 Gamma max H^2) for gain/loss, and the dp^3-scaled limit
/// for the hbar^2 term. Filters use the largest even power of the bracket symbol.
StabilityBound stability_bound(const GeneratorSpec& spec, const HamiltonianModel& H,
                               const PhaseGrid& grid, double factor = kStabilityFactor);

/// Classical four-stage RK4 on a fixed grid. Scratch buffers are reused across steps.
class Rk4Stepper {
 public:
  Rk4Stepper(GeneratorSpec spec, HamiltonianModel H, PhaseGrid grid,
             double stability_factor = kStabilityFactor);

  const StabilityBound& bound() const noexcept { return bound_; }
  RhsEvaluator& rhs() noexcept { return rhs_; }

  /// Advances W (in place) from t to t + dt. Throws ContractViolation if dt exceeds the
  /// stability bound and NumericalInstability if the result is not finite.
  void step(std::vector<double>& W, double t, double dt);

 private:
  RhsEvaluator rhs_;
  StabilityBound bound_;
  std::vector<double> k1_, k2_, k3_, k4_, stage_;
};

/// One RK4 step of dt (which must satisfy the stability bound).
WignerField step_rk4(const GeneratorSpec& spec, const HamiltonianModel& H, const WignerField& W,
                     double t, double dt);

struct EvolveOptions {
  /// Record observables every this many dt steps (the initial and final states are always kept).
  std::size_t record_every = 1;
  /// A snapshot is taken at the first step boundary at or after each requested time.
  std::vector<double> snapshot_times;
  /// Called after each recorded step with the current field.
  std::function<void(double t, const WignerField& W)> observer;
  double stability_factor = kStabilityFactor;
};

struct EvolveResult {
  ObservableSeries series;
  std::vector<Snapshot> snapshots;
  WignerField final_field;
  double t_final = 0.0;
  /// RK4 substeps taken per requested dt (1 when dt is within the stability bound).
  std::size_t substeps = 1;
};

/// Fixed-step evolution from t = 0 to t_max with requested step dt.
///
/// Each dt is split into ceil(dt / bound) equal RK4 substeps so that a requested step above
/// the explicit stability limit still integrates stably; recording and snapshot cadence follow
/// the requested dt.
EvolveResult evolve(const GeneratorSpec& spec, const HamiltonianModel& H, const WignerField& W0,
                    double t_max, double dt, const EvolveOptions& options = {});

}  // namespace wflow
