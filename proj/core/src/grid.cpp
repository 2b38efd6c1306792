#include "wflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wflow/errors.hpp"

namespace wflow {

PhaseGrid::PhaseGrid(std::size_t nx, std::size_t np, double xmin, double xmax, double pmin,
                     double pmax)
    : nx_(nx), np_(np), xmin_(xmin), xmax_(xmax), pmin_(pmin), pmax_(pmax) {
  if (nx < kMinPoints || np < kMinPoints) {
    throw ConfigurationError("PhaseGrid needs at least " + std::to_string(kMinPoints) +
                             " points per axis, got " + std::to_string(nx) + "x" +
                             std::to_string(np));
  }
  if (!(xmax > xmin) || !(pmax > pmin) || !std::isfinite(xmin) || !std::isfinite(xmax) ||
      !std::isfinite(pmin) || !std::isfinite(pmax)) {
    throw ConfigurationError("PhaseGrid bounds must be finite with xmax > xmin and pmax > pmin");
  }
  dx_ = (xmax - xmin) / static_cast<double>(nx - 1);
  dp_ = (pmax - pmin) / static_cast<double>(np - 1);
}

PhaseGrid PhaseGrid::refined() const {
  return PhaseGrid(2 * nx_ - 1, 2 * np_ - 1, xmin_, xmax_, pmin_, pmax_);
}

bool PhaseGrid::operator==(const PhaseGrid& other) const noexcept {
  return nx_ == other.nx_ && np_ == other.np_ && xmin_ == other.xmin_ && xmax_ == other.xmax_ &&
         pmin_ == other.pmin_ && pmax_ == other.pmax_;
}

WignerField::WignerField(PhaseGrid grid) : grid_(grid), values_(grid.size(), 0.0) {}

WignerField::WignerField(PhaseGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw ConfigurationError("WignerField: expected " + std::to_string(grid_.size()) +
                             " values, got " + std::to_string(values_.size()));
  }
}

double WignerField::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool WignerField::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void WignerField::check_same_grid(const WignerField& other) const {
  if (!(grid_ == other.grid_)) throw ConfigurationError("WignerField: grid mismatch");
}

WignerField& WignerField::operator+=(const WignerField& other) {
  check_same_grid(other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

WignerField& WignerField::operator-=(const WignerField& other) {
  check_same_grid(other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

WignerField& WignerField::operator*=(double s) noexcept {
  for (double& v : values_) v *= s;
  return *this;
}

WignerField& WignerField::axpy(double a, const WignerField& other) {
  check_same_grid(other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += a * other.values_[k];
  return *this;
}

WignerField operator+(WignerField a, const WignerField& b) { return a += b; }
WignerField operator-(WignerField a, const WignerField& b) { return a -= b; }
WignerField operator*(double s, WignerField a) { return a *= s; }

double max_abs_difference(const WignerField& a, const WignerField& b) {
  if (!(a.grid() == b.grid())) throw ConfigurationError("max_abs_difference: grid mismatch");
  double m = 0.0;
  auto va = a.values();
  auto vb = b.values();
  for (std::size_t k = 0; k < va.size(); ++k) m = std::max(m, std::abs(va[k] - vb[k]));
  return m;
}

}  // namespace wflow
