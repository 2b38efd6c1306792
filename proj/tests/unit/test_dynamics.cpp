#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "property.hpp"
#include "wflow/brackets.hpp"
#include "wflow/errors.hpp"
#include "wflow/observables.hpp"
#include "wflow/states.hpp"
#include "wflow/stencil.hpp"
#include "wflow/stepper.hpp"

using namespace wflow;
using wflow::test::for_all;
using wflow::test::Gen;

namespace {

double interior_diff(const WignerField& a, const WignerField& b, std::size_t margin) {
  const auto& g = a.grid();
  double e = 0.0;
  for (std::size_t i = margin; i + margin < g.nx(); ++i) {
    for (std::size_t j = margin; j + margin < g.np(); ++j) e = std::max(e, std::abs(a(i, j) - b(i, j)));
  }
  return e;
}

double interior_max(const WignerField& a, std::size_t margin) { return interior_diff(a, WignerField(a.grid()), margin); }

const HamiltonianModel kSho = HamiltonianModel::harmonic(1.0, 1.0);

}  // namespace

TEST_CASE("poisson_bracket: SHO advection terms") {
  const PhaseGrid g(64, 64, -6, 6, -6, 6);
  const auto H = HamiltonianModel::harmonic(2.0, 1.5);
  const auto W = gaussian_state(1.0, 0.5, 0.8, 1.1, g);
  const auto Wx = partial_derivative(W, Axis::x, 1), Wp = partial_derivative(W, Axis::p, 1);
  const auto expected = WignerField::sample(g, [&](double x, double p) {
    (void)x;
    (void)p;
    return 0.0;
  });
  WignerField ref = expected;
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.np(); ++j) {
      ref(i, j) = 2.0 * 2.25 * g.x(i) * Wp(i, j) - g.p(j) / 2.0 * Wx(i, j);
    }
  }
  CHECK(max_abs_difference(poisson_bracket(H, W), ref) < 1e-12);
}

TEST_CASE("poisson_bracket: free particle") {
  const PhaseGrid g(48, 32, -3, 3, -2, 2);
  const HamiltonianModel free(1.5, Polynomial({0.0}));
  const auto W = WignerField::sample(g, [](double x, double) { return x * x * x - x; });
  const auto expected = WignerField::sample(g, [](double x, double p) { return -(p / 1.5) * (3 * x * x - 1); });
  CHECK(max_abs_difference(poisson_bracket(free, W), expected) < 1e-9);
}

TEST_CASE("poisson_bracket of a function of H vanishes at 4th order") {
  auto err = [](std::size_t n) {
    const PhaseGrid g(n, n, -6, 6, -6, 6);
    const auto W = WignerField::sample(g, [](double x, double p) { return std::exp(-(x * x + p * p) / 2) * (1 + x * x + p * p); });
    return interior_max(poisson_bracket(kSho, W), 2);
  };
  const double e1 = err(65), e2 = err(129);
  CHECK(e1 < 1e-2);
  CHECK(std::log2(e1 / e2) > 3.7);
}

TEST_CASE("nested_poisson: order 1, order limits and functions of H") {
  const PhaseGrid g(64, 64, -6, 6, -6, 6);
  const auto W = gaussian_state(0.5, -0.5, 1.0, 1.0, g);
  CHECK(max_abs_difference(nested_poisson(kSho, W, 1), poisson_bracket(kSho, W)) == 0.0);
  CHECK_THROWS_AS(nested_poisson(kSho, W, 5), UnsupportedError);
  CHECK_THROWS_AS(nested_poisson(kSho, W, 0), UnsupportedError);

  const PhaseGrid f(129, 129, -6, 6, -6, 6);
  const auto F = WignerField::sample(f, [](double x, double p) { return std::exp(-(x * x + p * p) / 2); });
  for (int n = 1; n <= 4; ++n) CHECK(interior_max(nested_poisson(kSho, F, n), 4 * n) < 1e-3);
}

TEST_CASE("nested_poisson: angular mode k picks up -k^2 omega^2 at order 2") {
  // Re (x + i p)^k e^{-r^2/2} is r^k e^{-r^2/2} cos(k theta)
  const PhaseGrid g(161, 161, -7, 7, -7, 7);
  for (int k = 1; k <= 3; ++k) {
    const auto W = WignerField::sample(g, [k](double x, double p) {
      return std::real(std::pow(std::complex<double>(x, p), k)) * std::exp(-(x * x + p * p) / 2);
    });
    const auto L2 = nested_poisson(kSho, W, 2);
    CHECK(interior_diff(L2, static_cast<double>(-k * k) * W, 6) < 2e-3 * W.max_abs());
  }
}

TEST_CASE("gainloss_term: zero rate, zero sum, shell and lobe signs") {
  const PhaseGrid g(128, 128, -6, 6, -6, 6);
  const auto W = gaussian_state(1.0, 1.0, 0.7, 0.7, g);
  CHECK(gainloss_term(kSho, W, 0.0).max_abs() == 0.0);
  CHECK(std::abs(integrate(gainloss_term(kSho, W, 0.3))) < 1e-12);

  WignerField twice = 2.0 * W;
  CHECK_THROWS_AS(gainloss_term(kSho, twice, 0.3), ContractViolation);

  auto shell = [&](double width) {
    auto f = WignerField::sample(g, [&](double x, double p) {
      const double h = 0.5 * (x * x + p * p);
      return std::exp(-(h - 2.0) * (h - 2.0) / (2 * width * width));
    });
    f *= 1.0 / integrate(f);
    return gainloss_term(kSho, f, 1.0).max_abs() / f.max_abs();
  };
  // (H^2 - <H^2>) scales with the shell width
  CHECK(shell(0.1) < 0.35 * shell(0.4));

  const auto low = gaussian_state(0.0, 0.0, 0.3, 0.3, g);
  const auto high = gaussian_state(3.0, 0.0, 0.3, 0.3, g);
  const WignerField mix = 0.5 * low + 0.5 * high;
  const auto term = gainloss_term(kSho, mix, 0.1);
  CHECK(term(g.nx() / 2, g.np() / 2) > 0.0);
  CHECK(term(96, 64) < 0.0);  // x = 3.07
}

TEST_CASE("gainloss_term integrates to zero for random normalized fields") {
  const PhaseGrid g(56, 56, -7, 7, -7, 7);
  for_all(23, 25, [&](Gen& gen, std::ostream& trace) {
    const double x0 = gen.uniform(-2, 2), p0 = gen.uniform(-2, 2), s = gen.uniform(0.5, 1.2);
    const auto H = HamiltonianModel::double_well(1.0, gen.uniform(0, 1), gen.uniform(0, 0.2));
    trace << "x0=" << x0 << " p0=" << p0 << " s=" << s;
    const auto W = gaussian_state(x0, p0, s, s, g);
    return std::abs(integrate(gainloss_term(H, W, gen.uniform(0, 1)))) < 1e-10;
  });
}

TEST_CASE("hbar^2 correction: harmonic, hbar = 0, two-path reduction and degree limit") {
  const PhaseGrid g(64, 64, -5, 5, -6, 6);
  const auto W = gaussian_state(2.19, 0.0, 0.5, 0.7, g);
  CHECK(hbar2_moyal_correction(kSho, W, 1.0).max_abs() == 0.0);

  const auto dw = HamiltonianModel::double_well(1.0, 1.0, 0.1);
  CHECK(hbar2_moyal_correction(dw, W, 0.0).max_abs() == 0.0);

  const auto full = hbar2_moyal_correction(dw, W, 1.0);
  const auto sep = hbar2_separable_correction(dw, W, 1.0);
  CHECK(max_abs_difference(full, sep) <= 1e-14 * sep.max_abs());
  // -(1/24) V''' = -B x for V''' = 24 B x
  const auto d3 = partial_derivative(W, Axis::p, 3);
  CHECK(sep(50, 20) == doctest::Approx(-0.1 * g.x(50) * d3(50, 20)).epsilon(1e-13));

  const HamiltonianModel sextic(1.0, Polynomial({0, 0, 0, 0, 0, 0, 1}));
  CHECK_THROWS_AS(hbar2_moyal_correction(sextic, W, 1.0), ConfigurationError);
}

TEST_CASE("GeneratorSpec validation") {
  GeneratorSpec s;
  s.advection = false;
  CHECK_THROWS_AS(s.validate(), ConfigurationError);
  s.gamma = -0.1;
  CHECK_THROWS_AS(s.validate(), ConfigurationError);
  s.gamma = 0.1;
  CHECK_NOTHROW(s.validate());
  FilterSpec f;
  f.even_taylor_coeffs = {1.0};
  CHECK_THROWS_AS(f.validate(), ConfigurationError);
  f.even_taylor_coeffs = {0, 1, 0, 0, 0, 1};
  CHECK_THROWS_AS(f.validate(), ConfigurationError);
}

TEST_CASE("assemble_rhs: advection only is the Poisson bracket inside the frozen frame") {
  const PhaseGrid g(48, 48, -6, 6, -6, 6);
  const auto W = gaussian_state(1.0, 1.0, 0.8, 0.8, g);
  GeneratorSpec s;
  const auto rhs = assemble_rhs(s, kSho, W, 0.0);
  const auto pb = poisson_bracket(kSho, W);
  RhsEvaluator ev(s, kSho, g);
  const std::size_t w = ev.frozen_width();
  CHECK(w == 2);
  CHECK(interior_diff(rhs, pb, w) == 0.0);
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.np(); ++j) {
      const bool frame = i < w || j < w || i >= g.nx() - w || j >= g.np() - w;
      if (frame) CHECK(rhs(i, j) == 0.0);
    }
  }
  s.hbar2_correction = true;
  CHECK(RhsEvaluator(s, kSho, g).frozen_width() == 3);
}

TEST_CASE("assemble_rhs: SHO dephasing equals the symbolic expansion on a polynomial field") {
  // W = x^2 p^2: {H,W} = 2x^3 p - 2x p^3, {H,{H,W}} = 2x^4 - 12 x^2 p^2 + 2 p^4
  const PhaseGrid g(24, 24, -2, 2, -2, 2);
  const auto W = WignerField::sample(g, [](double x, double p) { return x * x * p * p; });
  GeneratorSpec s;
  s.gamma = 0.3;
  const auto rhs = assemble_rhs(s, kSho, W, 0.0);
  const auto expected = WignerField::sample(g, [](double x, double p) {
    return 2 * x * x * x * p - 2 * x * p * p * p + 0.3 * (2 * std::pow(x, 4) - 12 * x * x * p * p + 2 * std::pow(p, 4));
  });
  CHECK(interior_diff(rhs, expected, 2) < 1e-9);
}

TEST_CASE("assemble_rhs: single-coefficient commutator filter equals dephasing") {
  const PhaseGrid g(64, 64, -6, 6, -6, 6);
  const auto W = gaussian_state(1.0, 0.0, 0.9, 0.9, g);
  GeneratorSpec deph;
  deph.gamma = 0.2;
  GeneratorSpec filt;
  FilterSpec f;
  f.even_taylor_coeffs = {0.0, 0.2};
  filt.filter = f;
  CHECK(max_abs_difference(assemble_rhs(deph, kSho, W, 0.0), assemble_rhs(filt, kSho, W, 0.0)) < 1e-14);
}

TEST_CASE("assemble_rhs: eigenvalue filter with c1 only equals gain/loss") {
  const PhaseGrid g(64, 64, -6, 6, -6, 6);
  const auto W = gaussian_state(1.0, 0.0, 0.9, 0.9, g);
  GeneratorSpec gl;
  gl.advection = false;
  gl.Gamma = 0.1;
  GeneratorSpec filt;
  filt.advection = false;
  FilterSpec f;
  f.variant = FilterVariant::anticommutator;
  f.even_taylor_coeffs = {0.0, -0.1};
  filt.filter = f;
  const auto a = assemble_rhs(gl, kSho, W, 0.0);
  CHECK(max_abs_difference(a, assemble_rhs(filt, kSho, W, 0.0)) < 1e-12 * a.max_abs());
}

TEST_CASE("stability bound names the limiting term and step_rk4 enforces it") {
  const PhaseGrid g(64, 64, -6, 6, -6, 6);
  GeneratorSpec s;
  const auto b0 = stability_bound(s, kSho, g);
  CHECK(b0.limiting_term.find("advection") != std::string::npos);
  s.gamma = 0.5;
  const auto b1 = stability_bound(s, kSho, g);
  CHECK(b1.dt < b0.dt);
  CHECK(b1.limiting_term == "double-Poisson dephasing");
  const auto W = gaussian_state(1, 1, 0.7, 0.7, g);
  CHECK_THROWS_AS(step_rk4(s, kSho, W, 0.0, 2 * b1.dt), ContractViolation);
  CHECK_NOTHROW(step_rk4(s, kSho, W, 0.0, b1.dt));
}

TEST_CASE("step_rk4: dt halving gives 4th order in time") {
  const PhaseGrid g(32, 32, -6, 6, -6, 6);
  GeneratorSpec s;
  const auto W0 = gaussian_state(1.0, 1.0, 1.0, 1.0, g);
  Rk4Stepper probe(s, kSho, g);
  const double dt = probe.bound().dt;
  auto run = [&](int substeps) {
    Rk4Stepper st(s, kSho, g);
    std::vector<double> W(W0.values().begin(), W0.values().end());
    const double h = dt / substeps;
    for (int k = 0; k < 32 * substeps; ++k) st.step(W, k * h, h);
    return WignerField(g, W);
  };
  const auto ref = run(16);
  const double e1 = max_abs_difference(run(1), ref), e2 = max_abs_difference(run(2), ref);
  const double ratio = e1 / e2;
  CHECK(ratio > 14.0);
  CHECK(ratio < 18.0);
}

TEST_CASE("evolve: SHO revival after one period") {
  auto err = [](std::size_t n) {
    const PhaseGrid g(n, n, -6, 6, -6, 6);
    GeneratorSpec s;
    const auto W0 = gaussian_state(1.0, 1.0, 0.8, 0.8, g);
    const double T = 2 * std::numbers::pi;
    const auto r = evolve(s, kSho, W0, T, T / 800);
    return max_abs_difference(r.final_field, W0) / W0.max_abs();
  };
  const double e1 = err(64), e2 = err(128);
  CHECK(e2 < 1e-3);
  CHECK(e1 / e2 > 10.0);
}

TEST_CASE("evolve: t_max = 0, records and snapshots") {
  const PhaseGrid g(32, 32, -6, 6, -6, 6);
  GeneratorSpec s;
  s.gamma = 0.1;
  const auto W0 = gaussian_state(1.0, 1.0, 0.8, 0.8, g);
  const auto r0 = evolve(s, kSho, W0, 0.0, 0.01);
  CHECK(r0.series.size() == 1);
  CHECK(r0.series[0].t == 0.0);
  CHECK(max_abs_difference(r0.final_field, W0) == 0.0);

  EvolveOptions opt;
  opt.record_every = 5;
  opt.snapshot_times = {0.5, 0.0, 0.305};
  int seen = 0;
  opt.observer = [&](double, const WignerField&) { ++seen; };
  const auto r = evolve(s, kSho, W0, 1.0, 0.01, opt);
  CHECK(r.series.size() == 21);
  CHECK(seen == 21);
  REQUIRE(r.snapshots.size() == 3);
  CHECK(r.snapshots[0].t == 0.0);
  CHECK(r.snapshots[1].t == doctest::Approx(0.31));
  CHECK(r.snapshots[2].t == doctest::Approx(0.5));
  CHECK(r.series.back().t == doctest::Approx(1.0));
  CHECK_THROWS_AS(evolve(s, kSho, W0, -1.0, 0.01), ConfigurationError);
}

TEST_CASE("evolve: oversized dt is split into substeps") {
  const PhaseGrid g(32, 32, -6, 6, -6, 6);
  GeneratorSpec s;
  s.gamma = 0.3;
  const auto W0 = gaussian_state(1.0, 1.0, 0.8, 0.8, g);
  const double bound = stability_bound(s, kSho, g).dt;
  const auto r = evolve(s, kSho, W0, 1.0, 0.1);
  CHECK(r.substeps == static_cast<std::size_t>(std::ceil(0.1 / bound)));
  CHECK(r.final_field.all_finite());
}

TEST_CASE("evolve: mass conservation without gain/loss and bit-identical reruns") {
  const PhaseGrid g(64, 64, -6, 6, -6, 6);
  GeneratorSpec s;
  s.gamma = 0.3;
  const auto W0 = gaussian_state(1.0, 1.0, 0.7071, 0.7071, g);
  const auto a = evolve(s, kSho, W0, 2.0, 0.01);
  const auto b = evolve(s, kSho, W0, 2.0, 0.01);
  CHECK(std::abs(integrate(a.final_field) - integrate(W0)) < 1e-6);
  CHECK(std::equal(a.final_field.values().begin(), a.final_field.values().end(), b.final_field.values().begin()));
}

TEST_CASE("evolve: frozen frame keeps its initial values") {
  const PhaseGrid g(32, 32, -3, 3, -3, 3);
  GeneratorSpec s;
  s.gamma = 0.1;
  const auto W0 = gaussian_state(0.5, 0.0, 0.6, 0.6, g);
  const auto r = evolve(s, kSho, W0, 1.0, 0.01);
  for (std::size_t j = 0; j < g.np(); ++j) {
    CHECK(r.final_field(0, j) == W0(0, j));
    CHECK(r.final_field(1, j) == W0(1, j));
    CHECK(r.final_field(g.nx() - 1, j) == W0(g.nx() - 1, j));
  }
  CHECK(r.final_field(16, 16) != W0(16, 16));
}

TEST_CASE("evolve: gain/loss moves weight toward low energy and keeps the norm") {
  const PhaseGrid g(64, 64, -6, 6, -6, 6);
  GeneratorSpec s;
  s.Gamma = 0.3;
  const auto W0 = gaussian_state(1.0, 1.0, 0.7071, 0.7071, g);
  const auto r = evolve(s, kSho, W0, 1.0, 0.01);
  CHECK(r.series.back().H < r.series[0].H);
  CHECK(std::abs(r.series.back().norm - 1.0) < 1e-6);
}

TEST_CASE("evolve: an unstable step size raises NumericalInstability naming a term") {
  const PhaseGrid g(32, 32, -6, 6, -6, 6);
  GeneratorSpec s;
  s.gamma = 0.5;
  const auto W0 = gaussian_state(1.0, 1.0, 0.7, 0.7, g);
  EvolveOptions opt;
  opt.stability_factor = 20.0;
  try {
    (void)evolve(s, kSho, W0, 50.0, 0.5, opt);
    FAIL("expected an instability");
  } catch (const NumericalInstability& e) {
    CHECK(!e.term().empty());
    CHECK(e.time() > 0.0);
    CHECK(e.step() > 0.0);
  }
}
