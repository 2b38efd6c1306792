#include <doctest.h>

#include <cmath>
#include <vector>

#include "property.hpp"
#include "wflow/errors.hpp"
#include "wflow/matrix_reference.hpp"

using namespace wflow;
using wflow::test::for_all;
using wflow::test::Gen;

namespace {

Matrix random_hermitian(Gen& gen, int d) {
  Matrix a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = Complex(gen.normal(), gen.normal());
  }
  return (a + a.adjoint()) / 2.0;
}

Matrix random_state(Gen& gen, int d) {
  Matrix a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = Complex(gen.normal(), gen.normal());
  }
  Matrix r = a * a.adjoint();
  return r / r.trace();
}

std::vector<double> random_spectrum(Gen& gen, int d) {
  std::vector<double> e;
  for (int i = 0; i < d; ++i) e.push_back(gen.uniform(0.0, 3.0));
  return e;
}

}  // namespace

TEST_CASE("DensityMatrix basics") {
  Eigen::VectorXcd psi(2);
  psi << 1.0, Complex(0, 1);
  const auto r = DensityMatrix::pure(psi, {0.0, 1.0});
  CHECK(std::abs(r.trace() - 1.0) < 1e-15);
  CHECK(r.purity() == doctest::Approx(1.0));
  CHECK(r.is_hermitian());
  CHECK(r.is_physical());
  CHECK_THROWS_AS(DensityMatrix(Matrix::Identity(2, 2), {0.0}), ConfigurationError);
  CHECK_THROWS_AS(DensityMatrix::pure(Eigen::VectorXcd::Zero(2), {0.0, 1.0}), ConfigurationError);
  const auto E = sho_spectrum(3, 2.0, 0.5);
  CHECK(E[2] == doctest::Approx(2.5));
}

TEST_CASE("dephasing: diagonal states are fixed and coherences decay as (gamma/2) D^2") {
  const auto diag = DensityMatrix::diagonal({0.2, 0.3, 0.5}, sho_spectrum(3));
  CHECK((dephasing_solution(diag, 0.4, 3.0).matrix() - diag.matrix()).norm() < 1e-15);

  Eigen::VectorXcd psi(2);
  psi << 1.0, 1.0;
  const auto r0 = DensityMatrix::pure(psi, sho_spectrum(2));
  const auto r1 = dephasing_solution(r0, 0.3, 1.0);
  CHECK(std::abs(r1.matrix()(0, 1)) / std::abs(r0.matrix()(0, 1)) == doctest::Approx(std::exp(-0.15)));

  // |m - n| = k on the SHO ladder decays as (gamma/2) k^2
  Eigen::VectorXcd big = Eigen::VectorXcd::Ones(5);
  const auto s0 = DensityMatrix::pure(big, sho_spectrum(5));
  const auto s1 = dephasing_solution(s0, 0.2, 1.5);
  for (int k = 1; k < 5; ++k) {
    CHECK(std::abs(s1.matrix()(0, k) / s0.matrix()(0, k)) == doctest::Approx(std::exp(-0.1 * k * k * 1.5)));
  }
}

TEST_CASE("gain/loss closed form") {
  const auto g0 = DensityMatrix::diagonal({1.0, 0.0}, {0.5, 1.5});
  CHECK((gainloss_solution(g0, 0.3, 4.0).matrix() - g0.matrix()).norm() < 1e-15);

  const auto mix = DensityMatrix::diagonal({0.5, 0.5}, {0.5, 1.5});
  const auto r = gainloss_solution(mix, 0.1, 1.0);
  CHECK(r.matrix()(0, 0).real() == doctest::Approx(std::exp(-0.1) / (std::exp(-0.1) + std::exp(-0.9))));
  const auto late = gainloss_solution(DensityMatrix::diagonal({0.3, 0.3, 0.4}, {2.0, 0.5, 1.0}), 0.5, 60.0);
  CHECK(late.matrix()(1, 1).real() == doctest::Approx(1.0));
  CHECK_THROWS_AS(gainloss_solution(DensityMatrix::diagonal({1.0, 1.0}, {0, 1}), 0.1, 1.0), ContractViolation);
}

TEST_CASE("nonlinear master equation: diagonal case, unitary limit, trace") {
  const std::vector<double> E = {0.5, 1.5, 2.5};
  const auto mix = DensityMatrix::diagonal({0.3, 0.3, 0.4}, E);
  const Matrix H = mix.hamiltonian();
  const auto traj = integrate_nonlinear_me(mix.matrix(), H, 0.1, 1e-3, 2.0, 1.0, 100);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const auto exact = gainloss_solution(mix, 0.1, traj.times[k]);
    CHECK((traj.states[k] - exact.matrix()).norm() < 1e-8);
    CHECK(std::abs(traj.states[k].trace() - 1.0) < 1e-8);
  }

  Gen gen(41);
  const Matrix Hr = random_hermitian(gen, 4);
  const Matrix rho = random_state(gen, 4);
  const auto u = integrate_nonlinear_me(rho, Hr, 0.0, 1e-3, 1.0, 1.0, 250);
  Eigen::SelfAdjointEigenSolver<Matrix> e0(rho);
  for (const auto& s : u.states) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    CHECK((es.eigenvalues() - e0.eigenvalues()).norm() < 1e-10);
  }
}

TEST_CASE("gradient potential: commuting sigma, basis independence and the gradient sign") {
  Gen gen(7);
  const Matrix H = random_hermitian(gen, 4);
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  const Matrix V = es.eigenvectors();
  Matrix sigma_diag = Matrix::Zero(4, 4);
  for (int k = 0; k < 4; ++k) sigma_diag(k, k) = 0.25 * (k + 1);
  const Matrix sigma_c = V * sigma_diag * V.adjoint();
  const Matrix rho = random_state(gen, 4);
  CHECK(std::abs(gradient_potential(rho, sigma_c, H, 0.3, 0.0).phi_minus) < 1e-12);

  for_all(17, 10, [](Gen& g, std::ostream& trace) {
    const Matrix H = random_hermitian(g, 4);
    const Matrix rho = random_state(g, 4);
    const Matrix sigma = random_state(g, 4);
    const double Gamma = g.uniform(0, 1), xi = g.uniform(0, 1);
    trace << "Gamma=" << Gamma << " xi=" << xi;
    const auto a = gradient_potential(rho, sigma, H, Gamma, xi);
    const auto b = gradient_potential_eigenbasis(rho, sigma, H, Gamma, xi);
    if (std::abs(a.total() - b.total()) > 1e-10) return false;
    // dPhi/dsigma at sigma = rho reproduces +L rho (before the trace correction)
    const Matrix G = wirtinger_gradient([&](const Matrix& s) { return gradient_potential(rho, s, H, Gamma, xi).total(); }, rho);
    const Matrix L = bracket_generator(rho, H, Gamma, xi);
    return (G - L).cwiseAbs().maxCoeff() < 1e-6;
  });
  CHECK_THROWS_AS(gradient_potential(Matrix::Identity(3, 3), Matrix::Identity(4, 4), H, 0.1, 0.1), ConfigurationError);
}

TEST_CASE("convexity function is non-positive for xi > Gamma and nonnegative spectra") {
  for_all(29, 200, [](Gen& g, std::ostream& trace) {
    const int d = g.integer(2, 6);
    const auto E = random_spectrum(g, d);
    Matrix sigma(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) sigma(i, j) = Complex(g.normal(), g.normal());
    }
    const double Gamma = g.uniform(0, 1);
    const double xi = Gamma + g.uniform(1e-3, 1);
    const double S = convexity_function(sigma, E, Gamma, xi);
    trace << "d=" << d << " Gamma=" << Gamma << " xi=" << xi << " S=" << S;
    return S <= 0.0;
  });
}

TEST_CASE("spectral filters") {
  Eigen::VectorXcd psi(3);
  psi << 1.0, Complex(0.5, 0.5), -0.3;
  const auto r0 = DensityMatrix::pure(psi, {0.3, 1.1, 2.0});

  FilterFunction none{[](double x) { return -x * x; }, [](double) { return 0.0; }, FilterKind::frequency};
  const auto u = spectral_filter_solution(r0, none, 1.7);
  for (int n = 0; n < 3; ++n) {
    for (int m = 0; m < 3; ++m) CHECK(std::abs(u.matrix()(n, m)) == doctest::Approx(std::abs(r0.matrix()(n, m))));
  }

  const double g = 0.2;
  FilterFunction freq{[](double x) { return -x * x; }, [g](double t) { return g * t; }, FilterKind::frequency};
  const auto a = spectral_filter_solution(r0, freq, 1.3);
  const auto b = dephasing_solution(r0, kFilterDephasingFactor * g, 1.3);
  CHECK((a.matrix() - b.matrix()).norm() < 1e-14);

  FilterFunction eig{[](double x) { return -0.15 * x * x; }, [](double t) { return t; }, FilterKind::eigenvalue};
  const auto c = spectral_filter_solution(r0, eig, 0.8);
  CHECK((c.matrix() - gainloss_solution(r0, 0.15, 0.8).matrix()).norm() < 1e-13);

  FilterFunction odd{[](double x) { return x; }, [](double t) { return t; }, FilterKind::frequency};
  CHECK_THROWS_AS(odd.validate(), ConfigurationError);
  FilterFunction shifted{[](double x) { return -x * x; }, [](double t) { return t + 1; }, FilterKind::frequency};
  CHECK_THROWS_AS(shifted.validate(), ConfigurationError);
}

TEST_CASE("filtered spectral form factor") {
  const auto w1 = [](double) { return 1.0; };
  CHECK(filtered_sff({0.7}, [](double x) { return 2.0 + x; }, 3.0) == Complex(2.0, 0.0));
  const auto s = filtered_sff({0.0, 1.3}, w1, 0.9);
  CHECK(s.real() == doctest::Approx((2 + 2 * std::cos(1.3 * 0.9)) / 4));
  CHECK(std::abs(s.imag()) < 1e-15);
  const auto w = [](double x) { return std::exp(-x * x); };
  const std::vector<double> spec{0.0, 0.5, 2.0};
  double sum = 0.0;
  for (double a : spec) {
    for (double b : spec) sum += w(a - b);
  }
  CHECK(filtered_sff(spec, w, 0.0).real() == doctest::Approx(sum / 9));
  CHECK_THROWS_AS(filtered_sff({}, w1, 0.0), ConfigurationError);
}

TEST_CASE("nested-bracket RHS reproduces the closed-form filters") {
  Eigen::VectorXcd psi(3);
  psi << 1.0, Complex(0.5, 0.5), -0.3;
  const auto r0 = DensityMatrix::pure(psi, {0.5, 1.5, 2.5});
  const Matrix H = r0.hamiltonian();
  const double g = 0.1;

  FilterSpec freq;
  freq.even_taylor_coeffs = {0.0, -1.0};
  freq.chi_dot = [g](double) { return g; };
  const auto tf = integrate_matrix_ode([&](double t, const Matrix& r) { return nested_bracket_rhs(r, H, freq, t); },
                                       r0.matrix(), 1e-3, 1.0);
  CHECK((tf.states.back() - dephasing_solution(r0, kFilterDephasingFactor * g, 1.0).matrix()).norm() < 1e-6);

  FilterSpec eig;
  eig.variant = FilterVariant::anticommutator;
  eig.even_taylor_coeffs = {0.0, -0.2};
  const auto te = integrate_matrix_ode([&](double t, const Matrix& r) { return nested_bracket_rhs(r, H, eig, t); },
                                       r0.matrix(), 1e-3, 1.0);
  const auto tn = integrate_nonlinear_me(r0.matrix(), H, 0.2, 1e-3, 1.0);
  CHECK((te.states.back() - tn.states.back()).norm() < 1e-10);

  FilterSpec zero;
  zero.even_taylor_coeffs = {0.0, 0.0, 0.0};
  zero.chi_dot = [](double t) { return 3.0 + t; };
  const Matrix unitary = -Complex(0, 1) * (H * r0.matrix() - r0.matrix() * H);
  CHECK((nested_bracket_rhs(r0.matrix(), H, zero, 0.4) - unitary).norm() < 1e-14);
}

TEST_CASE("filter rate factor constant matches its measurement") {
  CHECK(measure_filter_dephasing_factor() == doctest::Approx(kFilterDephasingFactor).epsilon(1e-6));
}

TEST_CASE("matrix ODE guards") {
  const Matrix r = Matrix::Identity(2, 2) / 2.0;
  auto zero = [](double, const Matrix& m) { return Matrix(Matrix::Zero(m.rows(), m.cols())); };
  CHECK_THROWS_AS(integrate_matrix_ode(zero, r, 0.0, 1.0), ConfigurationError);
  CHECK_THROWS_AS(integrate_matrix_ode(zero, r, 0.1, 1.0, 0), ConfigurationError);
  auto blow = [](double, const Matrix& m) { return Matrix(1e200 * m * m.norm()); };
  CHECK_THROWS_AS(integrate_matrix_ode(blow, r, 0.1, 10.0), NumericalInstability);
}
