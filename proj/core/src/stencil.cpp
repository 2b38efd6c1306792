#include "wflow/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wflow/errors.hpp"

namespace wflow {

std::vector<double> fd_weights(std::span<const double> nodes, double x0, int order) {
  const std::size_t n = nodes.size();
  if (order < 0 || n <= static_cast<std::size_t>(order)) {
    throw ConfigurationError("fd_weights: need more nodes than the derivative order");
  }
  const std::size_t m = static_cast<std::size_t>(order);
  std::vector<std::vector<double>> c(m + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          c[k][i] = c1 * (static_cast<double>(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        }
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) {
        c[k][j] = (c4 * c[k][j] - static_cast<double>(k) * c[k - 1][j]) / c3;
      }
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c[m];
}

Derivative1D::Derivative1D(std::size_t n, double h, int order) : n_(n), order_(order) {
  if (order < 1 || order > kMaxOrder) {
    throw ConfigurationError("Derivative1D: order must be 1..3, got " + std::to_string(order));
  }
  if (!(h > 0.0)) throw ConfigurationError("Derivative1D: spacing must be positive");
  half_width_ = order == 3 ? 3 : 2;
  closure_width_ = static_cast<std::size_t>(order + 4);
  const std::size_t needed = std::max<std::size_t>(closure_width_, 2 * half_width_ + 1) + 1;
  if (n < needed) {
    throw ConfigurationError("Derivative1D: " + std::to_string(n) +
                             " points are too few for an order-" + std::to_string(order) +
                             " stencil (need " + std::to_string(needed) + ")");
  }
  const double scale = 1.0 / std::pow(h, order);

  std::vector<double> nodes;
  for (int k = -half_width_; k <= half_width_; ++k) nodes.push_back(k);
  central_ = fd_weights(nodes, 0.0, order);
  // Clean round-off so symmetric stencils keep exact zeros/antisymmetry.
  for (double& w : central_) w = std::round(w * 5040.0) / 5040.0;

  symbol_bound_ = 0.0;
  for (int s = 0; s <= 2000; ++s) {
    const double theta = std::numbers::pi * s / 2000.0;
    double re = 0.0, im = 0.0;
    for (int k = -half_width_; k <= half_width_; ++k) {
      re += central_[k + half_width_] * std::cos(k * theta);
      im += central_[k + half_width_] * std::sin(k * theta);
    }
    symbol_bound_ = std::max(symbol_bound_, std::hypot(re, im));
  }
  for (double& w : central_) w *= scale;

  std::vector<double> edge(closure_width_);
  for (std::size_t k = 0; k < closure_width_; ++k) edge[k] = static_cast<double>(k);
  left_.reserve(half_width_ * closure_width_);
  right_.reserve(half_width_ * closure_width_);
  for (int r = 0; r < half_width_; ++r) {
    auto w = fd_weights(edge, static_cast<double>(r), order);
    for (double v : w) left_.push_back(v * scale);
  }
  // Right edge: mirror image; odd derivatives flip sign.
  const double parity = (order % 2 == 1) ? -1.0 : 1.0;
  for (int r = 0; r < half_width_; ++r) {
    for (std::size_t k = 0; k < closure_width_; ++k) {
      right_.push_back(parity * left_[r * closure_width_ + (closure_width_ - 1 - k)]);
    }
  }
}

std::span<const double> Derivative1D::left_closure(int r) const noexcept {
  return std::span<const double>(left_).subspan(r * closure_width_, closure_width_);
}

std::span<const double> Derivative1D::right_closure(int r) const noexcept {
  return std::span<const double>(right_).subspan(r * closure_width_, closure_width_);
}

namespace {

// Interior rows with the stencil width known at compile time (lets the compiler unroll).
template <std::size_t HW>
void central_rows(const double* c, const double* in, double* out, std::size_t stride,
                  std::size_t n) noexcept {
  double w[2 * HW + 1];
  for (std::size_t k = 0; k <= 2 * HW; ++k) w[k] = c[k];
  if (stride == 1) {
    for (std::size_t i = HW; i + HW < n; ++i) {
      const double* src = in + i - HW;
      double acc = 0.0;
      for (std::size_t k = 0; k <= 2 * HW; ++k) acc += w[k] * src[k];
      out[i] = acc;
    }
    return;
  }
  for (std::size_t i = HW; i + HW < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k <= 2 * HW; ++k) acc += w[k] * in[(i + k - HW) * stride];
    out[i * stride] = acc;
  }
}

}  // namespace

void Derivative1D::apply(const double* in, double* out, std::size_t stride) const noexcept {
  const std::size_t hw = static_cast<std::size_t>(half_width_);
  const std::size_t cw = closure_width_;
  for (std::size_t r = 0; r < hw; ++r) {
    const double* w = left_.data() + r * cw;
    double acc = 0.0;
    for (std::size_t k = 0; k < cw; ++k) acc += w[k] * in[k * stride];
    out[r * stride] = acc;
  }
  if (hw == 2) {
    central_rows<2>(central_.data(), in, out, stride, n_);
  } else {
    central_rows<3>(central_.data(), in, out, stride, n_);
  }
  for (std::size_t r = 0; r < hw; ++r) {
    const double* w = right_.data() + r * cw;
    const std::size_t i = n_ - 1 - r;
    double acc = 0.0;
    for (std::size_t k = 0; k < cw; ++k) acc += w[k] * in[(n_ - cw + k) * stride];
    out[i * stride] = acc;
  }
}

namespace {

// out_row(i) = sum_k w[k] * in_row(src + k): whole rows at once so the inner loop is contiguous.
void combine_rows(const double* in, double* out, std::size_t np, std::size_t src,
                  std::span<const double> w) {
  std::fill(out, out + np, 0.0);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double wk = w[k];
    if (wk == 0.0) continue;
    const double* row = in + (src + k) * np;
    for (std::size_t j = 0; j < np; ++j) out[j] += wk * row[j];
  }
}

template <class F>
double pairwise_range(std::size_t begin, std::size_t end, const F& f) {
  constexpr std::size_t kBlock = 128;
  if (end - begin <= kBlock) {
    double acc = 0.0;
    for (std::size_t k = begin; k < end; ++k) acc += f(k);
    return acc;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_range(begin, mid, f) + pairwise_range(mid, end, f);
}

inline double trapezoid_weight(std::size_t k, std::size_t n) {
  return (k == 0 || k + 1 == n) ? 0.5 : 1.0;
}

}  // namespace

void apply_along(const Derivative1D& d, Axis axis, const PhaseGrid& grid,
                 std::span<const double> in, std::span<double> out) {
  const std::size_t nx = grid.nx();
  const std::size_t np = grid.np();
  if (d.size() != grid.count(axis) || in.size() != grid.size() || out.size() != grid.size()) {
    throw ConfigurationError("apply_along: operator/grid size mismatch");
  }
  if (axis == Axis::p) {
    for (std::size_t i = 0; i < nx; ++i) d.apply(in.data() + i * np, out.data() + i * np, 1);
    return;
  }
  const std::size_t hw = static_cast<std::size_t>(d.half_width());
  const std::size_t cw = d.closure_width();
  for (std::size_t r = 0; r < hw; ++r) {
    combine_rows(in.data(), out.data() + r * np, np, 0, d.left_closure(static_cast<int>(r)));
    combine_rows(in.data(), out.data() + (nx - 1 - r) * np, np, nx - cw,
                 d.right_closure(static_cast<int>(r)));
  }
  const auto c = d.central();
  for (std::size_t i = hw; i + hw < nx; ++i) combine_rows(in.data(), out.data() + i * np, np, i - hw, c);
}

void x_derivative_row(const Derivative1D& d, const PhaseGrid& grid, const double* in,
                      std::size_t i, double* out_row) {
  const std::size_t nx = grid.nx();
  const std::size_t np = grid.np();
  const std::size_t hw = static_cast<std::size_t>(d.half_width());
  if (i < hw) {
    combine_rows(in, out_row, np, 0, d.left_closure(static_cast<int>(i)));
  } else if (i + hw >= nx) {
    combine_rows(in, out_row, np, nx - d.closure_width(), d.right_closure(static_cast<int>(nx - 1 - i)));
  } else {
    combine_rows(in, out_row, np, i - hw, d.central());
  }
}

WignerField partial_derivative(const WignerField& W, Axis axis, int order) {
  const PhaseGrid& g = W.grid();
  Derivative1D d(g.count(axis), g.spacing(axis), order);
  WignerField out(g);
  apply_along(d, axis, g, W.values(), out.values());
  return out;
}

double pairwise_sum(std::span<const double> values) {
  return pairwise_range(0, values.size(), [&](std::size_t k) { return values[k]; });
}

double integrate(std::span<const double> values, const PhaseGrid& grid) {
  const std::size_t nx = grid.nx();
  const std::size_t np = grid.np();
  if (values.size() != grid.size()) throw ConfigurationError("integrate: size mismatch");
  const double total = pairwise_range(0, nx, [&](std::size_t i) {
    const double* row = values.data() + i * np;
    return trapezoid_weight(i, nx) *
           pairwise_range(0, np, [&](std::size_t j) { return trapezoid_weight(j, np) * row[j]; });
  });
  return total * grid.dx() * grid.dp();
}

double integrate(const WignerField& W) { return integrate(W.values(), W.grid()); }

double integrate_product(std::span<const double> weight, std::span<const double> values,
                         const PhaseGrid& grid) {
  const std::size_t nx = grid.nx();
  const std::size_t np = grid.np();
  if (values.size() != grid.size() || weight.size() != grid.size()) {
    throw ConfigurationError("integrate_product: size mismatch");
  }
  const double total = pairwise_range(0, nx, [&](std::size_t i) {
    const double* row = values.data() + i * np;
    const double* wrow = weight.data() + i * np;
    return trapezoid_weight(i, nx) * pairwise_range(0, np, [&](std::size_t j) {
             return trapezoid_weight(j, np) * wrow[j] * row[j];
           });
  });
  return total * grid.dx() * grid.dp();
}

}  // namespace wflow
