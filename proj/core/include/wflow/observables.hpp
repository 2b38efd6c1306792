#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wflow/grid.hpp"
#include "wflow/hamiltonian.hpp"

namespace wflow {

/// One row of the observable CSV. Moments are raw quadratures (not divided by norm).
struct ObservableRecord {
  double t = 0.0;
  double norm = 0.0;  // mu_0
  double x = 0.0;
  double p = 0.0;
  double x2 = 0.0;
  double p2 = 0.0;
  double xp = 0.0;
  double H = 0.0;  // mu_1
  double mu2 = 0.0;
  double mu4 = 0.0;
  double Wneg = 0.0;      // log negativity, log(int |W| / mu_0)
  double neg_area = 0.0;  // int min(W, 0)
};

/// Time-ordered observable records.
class ObservableSeries {
 public:
  static const std::vector<std::string>& columns();

  /// Throws ContractViolation unless r.t is strictly larger than the last time and r.norm > 0.
  void push(const ObservableRecord& r);

  const std::vector<ObservableRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const ObservableRecord& operator[](std::size_t k) const { return records_.at(k); }
  const ObservableRecord& back() const { return records_.back(); }

  std::vector<double> times() const;
  /// Column by CSV name ("t", "norm", "x", ..., "neg_area").
  std::vector<double> column(const std::string& name) const;

 private:
  std::vector<ObservableRecord> records_;
};

using ObservableFunction = std::function<double(double x, double p, double t)>;

/// Trapezoidal quadrature of A(x, p, t) W.
double expectation(const ObservableFunction& A, const WignerField& W, double t = 0.0);

/// mu_n = int H(x, p, t)^n W.
double energy_moment(int n, const HamiltonianModel& H, const WignerField& W, double t = 0.0);

/// int min(W, 0) (<= 0).
double negative_area(const WignerField& W);

/// log(int |W|). Throws ContractViolation if W is not normalized.
double wigner_log_negativity(const WignerField& W);

/// Central second moments [[var x, cov xp], [cov xp, var p]] of a normalized field.
std::array<std::array<double, 2>, 2> covariance(const WignerField& W);

/// All record columns at time t.
ObservableRecord measure(const HamiltonianModel& H, const WignerField& W, double t);

/// Default relative threshold for classical_emergence_time.
inline constexpr double kEmergenceThreshold = 1e-6;

/// Time at which the negative area returns above -eps * mu_0.
///
/// If the series never goes below the threshold the field was classical from the start and
/// the first time is returned. Otherwise the first crossing back above the threshold after
/// the first excursion below it is located by linear interpolation; nullopt if the series
/// ends while still negative.
std::optional<double> classical_emergence_time(const ObservableSeries& series,
                                               double eps = kEmergenceThreshold);

void write_csv(std::ostream& out, const ObservableSeries& series);
void write_csv(const std::filesystem::path& path, const ObservableSeries& series);
ObservableSeries read_csv(std::istream& in);
ObservableSeries read_csv(const std::filesystem::path& path);

}  // namespace wflow
