#include "wflow/states.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "wflow/errors.hpp"
#include "wflow/stencil.hpp"

namespace wflow {

PhaseFunction gaussian_function(const GaussianParams& g) {
  if (!(g.sigma_x > 0.0) || !(g.sigma_p > 0.0)) {
    throw ConfigurationError("gaussian_state: sigma_x and sigma_p must be positive");
  }
  const double amp = 1.0 / (2.0 * std::numbers::pi * g.sigma_x * g.sigma_p);
  const double ax = 1.0 / (2.0 * g.sigma_x * g.sigma_x);
  const double ap = 1.0 / (2.0 * g.sigma_p * g.sigma_p);
  return [=](double x, double p) {
    const double dx = x - g.x0;
    const double dp = p - g.p0;
    return amp * std::exp(-ax * dx * dx - ap * dp * dp);
  };
}

WignerField gaussian_state(const GaussianParams& g, const PhaseGrid& grid) {
  const auto f = gaussian_function(g);
  if (g.x0 - 4.0 * g.sigma_x < grid.xmin() || g.x0 + 4.0 * g.sigma_x > grid.xmax() ||
      g.p0 - 4.0 * g.sigma_p < grid.pmin() || g.p0 + 4.0 * g.sigma_p > grid.pmax()) {
    std::ostringstream msg;
    msg << "gaussian_state: grid window is narrower than 4 sigma around (" << g.x0 << ", "
        << g.p0 << "); the state is truncated";
    warn(msg.str());
  }
  WignerField W = WignerField::sample(grid, f);
  const double norm = integrate(W);
  if (!(norm > 0.0)) throw ConfigurationError("gaussian_state: state has no mass on the grid");
  W *= 1.0 / norm;
  return W;
}

WignerField gaussian_state(double x0, double p0, double sigma_x, double sigma_p,
                           const PhaseGrid& grid) {
  return gaussian_state(GaussianParams{x0, p0, sigma_x, sigma_p}, grid);
}

double cat_normalization(const CatParams& c) {
  return 1.0 / (std::numbers::pi * (1.0 + std::cos(c.phi) * std::exp(-2.0 * c.alpha * c.alpha)));
}

PhaseFunction cat_function(const CatParams& c) {
  if (!(c.alpha > 0.0)) throw ConfigurationError("cat_state: alpha must be positive");
  const double n = cat_normalization(c);
  const double a = c.alpha;
  const double phi = c.phi;
  return [=](double x, double p) {
    const double p2 = p * p;
    const double left = std::exp(-2.0 * ((x - a) * (x - a) + p2));
    const double right = std::exp(-2.0 * ((x + a) * (x + a) + p2));
    const double fringe = 2.0 * std::exp(-2.0 * (x * x + p2)) * std::cos(4.0 * a * p - phi);
    return n * (left + right + fringe);
  };
}

WignerField cat_state(const CatParams& c, const PhaseGrid& grid) {
  return WignerField::sample(grid, cat_function(c));
}

WignerField cat_state(double alpha, double phi, const PhaseGrid& grid) {
  return cat_state(CatParams{alpha, phi}, grid);
}

}  // namespace wflow
