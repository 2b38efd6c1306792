#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "property.hpp"
#include "wflow/errors.hpp"
#include "wflow/grid.hpp"
#include "wflow/hamiltonian.hpp"
#include "wflow/observables.hpp"
#include "wflow/states.hpp"
#include "wflow/stencil.hpp"

using namespace wflow;
using wflow::test::for_all;
using wflow::test::Gen;

namespace {

double interior_max_error(const WignerField& a, const WignerField& b, std::size_t margin) {
  const auto& g = a.grid();
  double e = 0.0;
  for (std::size_t i = margin; i + margin < g.nx(); ++i) {
    for (std::size_t j = margin; j + margin < g.np(); ++j) e = std::max(e, std::abs(a(i, j) - b(i, j)));
  }
  return e;
}

}  // namespace

TEST_CASE("grid: spacing, node positions and refinement") {
  const PhaseGrid g(9, 17, -2.0, 2.0, -4.0, 4.0);
  CHECK(g.dx() == doctest::Approx(0.5));
  CHECK(g.dp() == doctest::Approx(0.5));
  CHECK(g.x(8) == doctest::Approx(2.0));
  CHECK(g.p(0) == -4.0);
  CHECK(g.index(1, 0) == 17);

  const PhaseGrid r = g.refined();
  CHECK(r.nx() == 17);
  CHECK(r.np() == 33);
  for (std::size_t i = 0; i < g.nx(); ++i) CHECK(r.x(2 * i) == doctest::Approx(g.x(i)).epsilon(1e-15));
}

TEST_CASE("grid: invalid windows are configuration errors") {
  CHECK_THROWS_AS(PhaseGrid(7, 16, -1, 1, -1, 1), ConfigurationError);
  CHECK_THROWS_AS(PhaseGrid(16, 16, 1, 1, -1, 1), ConfigurationError);
  CHECK_THROWS_AS(PhaseGrid(16, 16, -1, 1, 2, -2), ConfigurationError);
  CHECK_THROWS_AS(PhaseGrid(16, 16, -1, NAN, -1, 1), ConfigurationError);
  const PhaseGrid g(8, 8, -1, 1, -1, 1);
  CHECK_THROWS_AS(WignerField(g, std::vector<double>(10)), ConfigurationError);
  WignerField a(g);
  const WignerField b(PhaseGrid(8, 9, -1, 1, -1, 1));
  CHECK_THROWS_AS(a += b, ConfigurationError);
}

TEST_CASE("fd_weights reproduce the textbook stencils") {
  const std::vector<double> nodes{-2, -1, 0, 1, 2};
  const auto w1 = fd_weights(nodes, 0.0, 1);
  CHECK(w1[0] == doctest::Approx(1.0 / 12));
  CHECK(w1[1] == doctest::Approx(-8.0 / 12));
  CHECK(w1[2] == doctest::Approx(0.0));
  CHECK(w1[4] == doctest::Approx(-1.0 / 12));
  const auto w2 = fd_weights(nodes, 0.0, 2);
  CHECK(w2[2] == doctest::Approx(-30.0 / 12));
  CHECK(w2[1] == doctest::Approx(16.0 / 12));
  CHECK_THROWS_AS(fd_weights(std::vector<double>{0, 1}, 0.0, 2), ConfigurationError);
}

TEST_CASE("Derivative1D rejects bad orders and short lines") {
  CHECK_THROWS_AS(Derivative1D(32, 0.1, 0), ConfigurationError);
  CHECK_THROWS_AS(Derivative1D(32, 0.1, 4), ConfigurationError);
  CHECK_THROWS_AS(Derivative1D(32, 0.0, 1), ConfigurationError);
  CHECK_THROWS_AS(Derivative1D(6, 0.1, 3), ConfigurationError);
  const Derivative1D d(32, 0.1, 3);
  CHECK(d.half_width() == 3);
  CHECK(d.closure_width() == 7);
}

TEST_CASE("partial_derivative: x^2 along x gives 2x everywhere") {
  const PhaseGrid g(21, 11, -2.0, 3.0, -1.0, 1.0);
  const auto W = WignerField::sample(g, [](double x, double) { return x * x; });
  const auto D = partial_derivative(W, Axis::x, 1);
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.np(); ++j) CHECK(D(i, j) == doctest::Approx(2 * g.x(i)).epsilon(1e-10));
  }
}

TEST_CASE("partial_derivative: polynomial exactness up to stencil degree, all orders and edges") {
  const PhaseGrid g(24, 26, -1.3, 2.1, -2.0, 1.7);
  // degree 4 is inside every interior and closure stencil for orders 1..3
  const auto f = [](double x, double p) { return 0.3 * std::pow(x, 4) - x * x * p + 2 * std::pow(p, 4) - p; };
  const auto W = WignerField::sample(g, f);
  const auto dxf = WignerField::sample(g, [](double x, double p) { return 1.2 * x * x * x - 2 * x * p; });
  const auto dp3f = WignerField::sample(g, [](double, double p) { return 48 * p; });
  const auto dx2f = WignerField::sample(g, [](double x, double p) { return 3.6 * x * x - 2 * p; });
  CHECK(max_abs_difference(partial_derivative(W, Axis::x, 1), dxf) < 1e-9);
  CHECK(max_abs_difference(partial_derivative(W, Axis::x, 2), dx2f) < 1e-7);
  CHECK(max_abs_difference(partial_derivative(W, Axis::p, 3), dp3f) < 1e-5);
}

TEST_CASE("partial_derivative of a constant is zero") {
  const PhaseGrid g(16, 16, -1, 1, -1, 1);
  const auto W = WignerField::sample(g, [](double, double) { return 3.5; });
  for (int order = 1; order <= 3; ++order) {
    CHECK(partial_derivative(W, Axis::x, order).max_abs() < 1e-9);
    CHECK(partial_derivative(W, Axis::p, order).max_abs() < 1e-9);
  }
}

TEST_CASE("partial_derivative: sin(x) converges at 4th order") {
  auto err = [](std::size_t n) {
    const PhaseGrid g(n, 8, 0.0, 2.0 * std::numbers::pi, -1, 1);
    const auto W = WignerField::sample(g, [](double x, double) { return std::sin(x); });
    const auto exact = WignerField::sample(g, [](double x, double) { return std::cos(x); });
    return interior_max_error(partial_derivative(W, Axis::x, 1), exact, 2);
  };
  const double ratio = err(41) / err(81);
  CHECK(ratio > 14.0);
  CHECK(ratio < 18.0);
}

TEST_CASE("partial_derivative is linear") {
  for_all(11, 20, [](Gen& gen, std::ostream& trace) {
    const PhaseGrid g(20, 24, -3, 3, -3, 3);
    std::vector<double> u(g.size()), v(g.size());
    for (auto& e : u) e = gen.normal();
    for (auto& e : v) e = gen.normal();
    const double a = gen.uniform(-2, 2), b = gen.uniform(-2, 2);
    const int order = gen.integer(1, 3);
    const Axis axis = gen.coin() ? Axis::x : Axis::p;
    trace << "a=" << a << " b=" << b << " order=" << order;
    const WignerField U(g, u), V(g, v);
    const auto lhs = partial_derivative(a * U + b * V, axis, order);
    const auto rhs = a * partial_derivative(U, axis, order) + b * partial_derivative(V, axis, order);
    return max_abs_difference(lhs, rhs) < 1e-10 * (1.0 + lhs.max_abs());
  });
}

TEST_CASE("integral of a derivative of a decayed field vanishes") {
  const PhaseGrid g(96, 96, -8, 8, -8, 8);
  const auto W = gaussian_state(0.4, -0.3, 0.9, 1.1, g);
  CHECK(std::abs(integrate(partial_derivative(W, Axis::x, 1))) < 1e-8);
  CHECK(std::abs(integrate(partial_derivative(W, Axis::p, 1))) < 1e-8);
}

TEST_CASE("integrate: trapezoid weights and pairwise sum") {
  const PhaseGrid g(8, 8, 0, 1, 0, 1);
  CHECK(integrate(WignerField(g)) == 0.0);
  const auto one = WignerField::sample(g, [](double, double) { return 1.0; });
  CHECK(integrate(one) == doctest::Approx(1.0).epsilon(1e-14));
  // bilinear integrand is exact under the trapezoid rule
  const auto xp = WignerField::sample(g, [](double x, double p) { return x * p + 2 * x; });
  CHECK(integrate(xp) == doctest::Approx(0.25 + 1.0).epsilon(1e-14));

  std::vector<double> v(1000);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = 1.0 / static_cast<double>(k + 1);
  double naive = 0.0;
  for (double e : v) naive += e;
  CHECK(pairwise_sum(v) == doctest::Approx(naive).epsilon(1e-14));
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("gaussian_state: normalization, mean and variance") {
  const PhaseGrid g(256, 256, -5, 7, -5, 7);
  const auto W = gaussian_state(1.0, 1.0, 1.0, 1.0, g);
  CHECK(integrate(W) == doctest::Approx(1.0).epsilon(1e-12));
  const double mx = expectation([](double x, double, double) { return x; }, W);
  const double mp = expectation([](double, double p, double) { return p; }, W);
  CHECK(mx == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mp == doctest::Approx(1.0).epsilon(1e-9));
  const auto C = covariance(W);
  CHECK(C[0][0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(C[1][1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(C[0][1]) < 1e-9);
}

TEST_CASE("gaussian_state: isotropic Gaussian at the origin is a function of the SHO energy") {
  const PhaseGrid g(64, 64, -4, 4, -4, 4);
  const auto W = gaussian_state(0, 0, 0.8, 0.8, g);
  const auto H = HamiltonianModel::harmonic(1.0, 1.0);
  const double peak = W(32, 32) * std::exp(H(g.x(32), g.p(32)) / (0.64));
  for (std::size_t i = 0; i < g.nx(); i += 5) {
    for (std::size_t j = 0; j < g.np(); j += 7) {
      CHECK(W(i, j) == doctest::Approx(peak * std::exp(-H(g.x(i), g.p(j)) / 0.64)).epsilon(1e-12));
    }
  }
}

TEST_CASE("gaussian_state: narrow window warns about truncation") {
  std::vector<std::string> warnings;
  ScopedWarningHandler guard([&](const std::string& m) { warnings.push_back(m); });
  const PhaseGrid g(32, 32, -1, 1, -1, 1);
  (void)gaussian_state(0, 0, 1.0, 1.0, g);
  CHECK(!warnings.empty());
  CHECK_THROWS_AS(gaussian_state(0, 0, 0.0, 1.0, g), ConfigurationError);
}

TEST_CASE("cat_state: normalization, symmetry and central fringe") {
  const PhaseGrid g(256, 256, -6, 6, -6, 6);
  const auto W = cat_state(2.0, 0.0, g);
  CHECK(std::abs(integrate(W) - 1.0) < 1e-6);

  for (std::size_t i = 0; i < g.nx(); i += 3) {
    for (std::size_t j = 0; j < g.np(); ++j) CHECK(W(i, j) == doctest::Approx(W(i, g.np() - 1 - j)).epsilon(1e-12));
  }

  const CatParams c{2.0, 0.0};
  const auto f = cat_function(c);
  const double N = cat_normalization(c);
  CHECK(N == doctest::Approx(1.0 / (std::numbers::pi * (1.0 + std::exp(-8.0)))));
  // interference peak at the origin: 2N(1 + e^{-8}) is above each lobe peak N(1 + e^{-32})
  CHECK(f(0, 0) == doctest::Approx(2 * N * (1 + std::exp(-8.0))));
  CHECK(f(0, 0) > f(2.0, 0.0));
  CHECK_THROWS_AS(cat_state(0.0, 0.0, g), ConfigurationError);
}

TEST_CASE("cat_state: log negativity matches an independent reference quadrature") {
  // log int |W| for alpha 2, phi 0: trapezoid sums at h = 4e-4 and 2e-4 on [-7,7]x[-5,5]
  // (numpy), Richardson-extrapolated
  constexpr double kReference = 0.462148629;
  // |W| has kinks along the nodal lines, so the grid quadrature converges at 2nd order
  auto err = [](std::size_t n) {
    const PhaseGrid g(n, n, -7, 7, -5, 5);
    return std::abs(wigner_log_negativity(cat_state(2.0, 0.0, g)) - kReference);
  };
  const double e1 = err(1024), e2 = err(2048);
  CHECK(e2 < 1e-4 * kReference);
  CHECK(e1 / e2 > 3.0);
}

TEST_CASE("states agree exactly on shared nodes of nested grids") {
  const PhaseGrid g(33, 41, -5, 5, -4, 4);
  const PhaseGrid r = g.refined();
  const auto c1 = cat_state(1.5, 0.7, g), c2 = cat_state(1.5, 0.7, r);
  const auto f = gaussian_function({0.3, -0.2, 0.9, 1.2});
  const auto w1 = WignerField::sample(g, f), w2 = WignerField::sample(r, f);
  int mismatches = 0;
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.np(); ++j) {
      mismatches += c1(i, j) != c2(2 * i, 2 * j);
      mismatches += w1(i, j) != w2(2 * i, 2 * j);
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("Hamiltonian: evaluation and analytic derivatives") {
  const auto H = HamiltonianModel::double_well(2.0, 1.0, 0.1, Drive{0.2, 1.5});
  const double x = 1.3, p = -0.7, t = 0.4;
  const double drive = 0.2 * std::cos(1.5 * t);
  CHECK(H(x, p, t) == doctest::Approx(p * p / 4 - x * x + 0.1 * std::pow(x, 4) + drive * x));
  CHECK(H.dHdx(x, t) == doctest::Approx(-2 * x + 0.4 * x * x * x + drive));
  CHECK(H.dHdp(p) == doctest::Approx(p / 2));
  CHECK(H.potential().derivative(x, 3) == doctest::Approx(2.4 * x));
  CHECK(H.partial(0, 2, x, p) == doctest::Approx(0.5));
  CHECK(H.partial(1, 1, x, p) == 0.0);
  CHECK(H.partial(4, 0, x, p) == doctest::Approx(2.4));
  CHECK(H.time_dependent());
  CHECK(!H.harmonic_frequency());
  CHECK(HamiltonianModel::harmonic(2.0, 3.0).harmonic_frequency().value() == doctest::Approx(3.0));
  CHECK_THROWS_AS(HamiltonianModel(0.0, Polynomial({0, 0, 1})), ConfigurationError);
  CHECK_THROWS_AS(Polynomial({0, NAN}), ConfigurationError);
}

TEST_CASE("Polynomial derivatives match finite differences") {
  for_all(5, 50, [](Gen& gen, std::ostream& trace) {
    std::vector<double> c(static_cast<std::size_t>(gen.integer(1, 6)));
    for (auto& e : c) e = gen.uniform(-1, 1);
    const Polynomial V(c);
    const double x = gen.uniform(-2, 2), h = 1e-4;
    const double fd = (V(x + h) - V(x - h)) / (2 * h);
    trace << "degree " << V.degree() << " x " << x;
    return std::abs(fd - V.derivative(x, 1)) < 1e-6;
  });
}
