#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wflow {

enum class Axis { x, p };

/// Uniform rectangular (x, p) grid with inclusive endpoints.
///
/// Node (i, j) sits at (xmin + i*dx, pmin + j*dp). Storage order for fields on the grid is
/// row-major with x as the outer index and p as the inner (contiguous) one.
class PhaseGrid {
 public:
  static constexpr std::size_t kMinPoints = 8;

  PhaseGrid(std::size_t nx, std::size_t np, double xmin, double xmax, double pmin, double pmax);

  std::size_t nx() const noexcept { return nx_; }
  std::size_t np() const noexcept { return np_; }
  std::size_t size() const noexcept { return nx_ * np_; }
  double xmin() const noexcept { return xmin_; }
  double xmax() const noexcept { return xmax_; }
  double pmin() const noexcept { return pmin_; }
  double pmax() const noexcept { return pmax_; }
  double dx() const noexcept { return dx_; }
  double dp() const noexcept { return dp_; }

  double x(std::size_t i) const noexcept { return xmin_ + static_cast<double>(i) * dx_; }
  double p(std::size_t j) const noexcept { return pmin_ + static_cast<double>(j) * dp_; }
  std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * np_ + j; }

  std::size_t count(Axis axis) const noexcept { return axis == Axis::x ? nx_ : np_; }
  double spacing(Axis axis) const noexcept { return axis == Axis::x ? dx_ : dp_; }

  /// Grid with 2n-1 points per axis over the same window; shares every node of *this.
  PhaseGrid refined() const;

  bool operator==(const PhaseGrid& other) const noexcept;

 private:
  std::size_t nx_;
  std::size_t np_;
  double xmin_, xmax_, pmin_, pmax_;
  double dx_, dp_;
};

/// Real scalar field sampled on a PhaseGrid (the discrete Wigner function).
class WignerField {
 public:
  explicit WignerField(PhaseGrid grid);
  WignerField(PhaseGrid grid, std::vector<double> values);

  /// Samples f(x, p) at every node.
  template <class F>
  static WignerField sample(const PhaseGrid& grid, F&& f) {
    WignerField field(grid);
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double x = grid.x(i);
      double* row = field.values_.data() + i * grid.np();
      for (std::size_t j = 0; j < grid.np(); ++j) row[j] = f(x, grid.p(j));
    }
    return field;
  }

  const PhaseGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[grid_.index(i, j)]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[grid_.index(i, j)]; }

  double max_abs() const noexcept;
  bool all_finite() const noexcept;

  WignerField& operator+=(const WignerField& other);
  WignerField& operator-=(const WignerField& other);
  WignerField& operator*=(double s) noexcept;
  /// this += a * other
  WignerField& axpy(double a, const WignerField& other);

 private:
  void check_same_grid(const WignerField& other) const;

  PhaseGrid grid_;
  std::vector<double> values_;
};

WignerField operator+(WignerField a, const WignerField& b);
WignerField operator-(WignerField a, const WignerField& b);
WignerField operator*(double s, WignerField a);

/// max_ij |a_ij - b_ij|
double max_abs_difference(const WignerField& a, const WignerField& b);

}  // namespace wflow
