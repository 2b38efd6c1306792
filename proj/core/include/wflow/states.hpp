#pragma once

#include <functional>

#include "wflow/grid.hpp"

namespace wflow {

/// Phase-space closure W(x, p), evaluable off-grid.
using PhaseFunction = std::function<double(double, double)>;

struct GaussianParams {
  double x0 = 0.0;
  double p0 = 0.0;
  double sigma_x = 1.0;
  double sigma_p = 1.0;
};

/// A exp[-(x-x0)^2/2sx^2 - (p-p0)^2/2sp^2] with A = 1/(2 pi sx sp).
PhaseFunction gaussian_function(const GaussianParams& g);

/// Gaussian sampled on the grid and rescaled so that integrate() == 1.
/// Warns when the grid window is narrower than 4 sigma around the mean.
WignerField gaussian_state(const GaussianParams& g, const PhaseGrid& grid);
WignerField gaussian_state(double x0, double p0, double sigma_x, double sigma_p,
                           const PhaseGrid& grid);

struct CatParams {
  double alpha = 2.0;
  double phi = 0.0;
};

/// Normalization N = 1 / (pi [1 + cos(phi) exp(-2 alpha^2)]).
double cat_normalization(const CatParams& c);

/// Even/odd/Yurke-Stoler cat-state Wigner function in units hbar = 1, m omega = 1:
/// N { e^{-2((x-a)^2+p^2)} + e^{-2((x+a)^2+p^2)} + 2 e^{-2(x^2+p^2)} cos(4 a p - phi) }.
PhaseFunction cat_function(const CatParams& c);

/// Exact pointwise samples of the cat formula; no renormalization.
WignerField cat_state(const CatParams& c, const PhaseGrid& grid);
WignerField cat_state(double alpha, double phi, const PhaseGrid& grid);

}  // namespace wflow
