#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wflow/grid.hpp"

namespace wflow {

/// Finite-difference weights for derivative `order` at `x0` from arbitrary `nodes`
/// (Fornberg's recursion). Exact for polynomials of degree < nodes.size().
std::vector<double> fd_weights(std::span<const double> nodes, double x0, int order);

/// One-dimensional derivative operator on n uniformly spaced points.
///
/// Interior rows use 4th-order central stencils: 5 points for orders 1 and 2, 7 points
/// for order 3. The first and last `half_width()` rows use one-sided stencils of the
/// same accuracy (order + 4 points), so no ghost values are read.
class Derivative1D {
 public:
  static constexpr int kMaxOrder = 3;

  Derivative1D(std::size_t n, double h, int order);

  std::size_t size() const noexcept { return n_; }
  int order() const noexcept { return order_; }
  int half_width() const noexcept { return half_width_; }
  /// Points needed by the widest (one-sided) stencil.
  std::size_t closure_width() const noexcept { return closure_width_; }

  /// Interior weights for offsets -half_width..half_width, already divided by h^order.
  std::span<const double> central() const noexcept { return central_; }
  /// Closure row r at the left edge (r < half_width); offsets are 0..closure_width-1.
  std::span<const double> left_closure(int r) const noexcept;
  /// Closure row r counted from the right edge; offsets are n-closure_width..n-1.
  std::span<const double> right_closure(int r) const noexcept;

  /// out[k*stride] = (D in)[k] for a strided line of n values.
  void apply(const double* in, double* out, std::size_t stride = 1) const noexcept;

  /// Largest |symbol| of the interior stencil times h^order (used for step-size bounds).
  double symbol_bound() const noexcept { return symbol_bound_; }

 private:
  std::size_t n_;
  int order_;
  int half_width_;
  std::size_t closure_width_;
  std::vector<double> central_;
  std::vector<double> left_;   // half_width rows of closure_width weights
  std::vector<double> right_;
  double symbol_bound_;
};

/// Applies a derivative along one axis of a grid field stored row-major (x outer, p inner).
void apply_along(const Derivative1D& d, Axis axis, const PhaseGrid& grid, std::span<const double> in,
                 std::span<double> out);

/// Row i of the x-derivative of a row-major field (np contiguous values written to out_row).
void x_derivative_row(const Derivative1D& d, const PhaseGrid& grid, const double* in,
                      std::size_t i, double* out_row);

/// Central 4th-order finite difference of W along `axis` (order 1..3).
WignerField partial_derivative(const WignerField& W, Axis axis, int order);

/// Deterministic pairwise (cascade) sum.
double pairwise_sum(std::span<const double> values);

/// Trapezoidal rule over both axes with pairwise reduction.
double integrate(std::span<const double> values, const PhaseGrid& grid);
double integrate(const WignerField& W);

/// Trapezoidal integral of weight * values (same layout, same grid).
double integrate_product(std::span<const double> weight, std::span<const double> values,
                         const PhaseGrid& grid);

}  // namespace wflow
