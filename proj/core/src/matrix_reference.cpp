#include "wflow/matrix_reference.hpp"

#include <cmath>
#include <sstream>

#include "wflow/errors.hpp"

namespace wflow {

namespace {

constexpr Complex kI(0.0, 1.0);

void check_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw ConfigurationError(std::string(what) + ": matrix must be square and non-empty");
  }
}

void check_same_dim(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << what << ": dimension mismatch (" << a.rows() << "x" << a.cols() << " vs " << b.rows()
        << "x" << b.cols() << ")";
    throw ConfigurationError(msg.str());
  }
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }
Matrix anticommutator(const Matrix& a, const Matrix& b) { return a * b + b * a; }

double hs_norm2(const Matrix& a) { return a.squaredNorm(); }

}  // namespace

DensityMatrix::DensityMatrix(Matrix rho, std::vector<double> energies)
    : rho_(std::move(rho)), energies_(std::move(energies)) {
  check_square(rho_, "DensityMatrix");
  if (energies_.size() != static_cast<std::size_t>(rho_.rows())) {
    throw ConfigurationError("DensityMatrix: spectrum length does not match the dimension");
  }
}

DensityMatrix DensityMatrix::diagonal(const std::vector<double>& populations,
                                      std::vector<double> energies) {
  Matrix rho = Matrix::Zero(populations.size(), populations.size());
  for (std::size_t n = 0; n < populations.size(); ++n) rho(n, n) = populations[n];
  return DensityMatrix(std::move(rho), std::move(energies));
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi, std::vector<double> energies) {
  const double n2 = psi.squaredNorm();
  if (!(n2 > 0.0)) throw ConfigurationError("DensityMatrix::pure: zero vector");
  return DensityMatrix(psi * psi.adjoint() / n2, std::move(energies));
}

Matrix DensityMatrix::hamiltonian() const {
  Matrix H = Matrix::Zero(dim(), dim());
  for (std::size_t n = 0; n < dim(); ++n) H(n, n) = energies_[n];
  return H;
}

double DensityMatrix::purity() const { return (rho_ * rho_).trace().real(); }

bool DensityMatrix::is_hermitian(double tol) const {
  return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double DensityMatrix::min_eigenvalue() const {
  const Matrix herm = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool DensityMatrix::is_physical(double tol) const {
  return is_hermitian(1e-12) && min_eigenvalue() > -tol;
}

std::vector<double> sho_spectrum(std::size_t d, double omega, double hbar) {
  std::vector<double> e(d);
  for (std::size_t n = 0; n < d; ++n) e[n] = hbar * omega * (static_cast<double>(n) + 0.5);
  return e;
}

DensityMatrix dephasing_solution(const DensityMatrix& rho0, double gamma, double t, double hbar) {
  if (!(hbar > 0.0)) throw ConfigurationError("dephasing_solution: hbar must be > 0");
  Matrix out = rho0.matrix();
  const auto& E = rho0.energies();
  for (std::size_t m = 0; m < rho0.dim(); ++m) {
    for (std::size_t n = 0; n < rho0.dim(); ++n) {
      const double d = E[m] - E[n];
      out(m, n) *= std::exp(Complex(-0.5 * gamma * d * d * t, -d * t / hbar));
    }
  }
  return DensityMatrix(std::move(out), E);
}

DensityMatrix gainloss_solution(const DensityMatrix& rho0, double Gamma, double t, double hbar) {
  if (!(hbar > 0.0)) throw ConfigurationError("gainloss_solution: hbar must be > 0");
  if (std::abs(rho0.trace() - 1.0) > 1e-10) {
    throw ContractViolation("gainloss_solution: initial state must have unit trace");
  }
  const auto& E = rho0.energies();
  const std::size_t d = rho0.dim();
  // Factor the largest population weight out of the denominator to avoid underflow.
  double shift = INFINITY;
  for (std::size_t k = 0; k < d; ++k) {
    if (std::abs(rho0.matrix()(k, k)) > 0.0) shift = std::min(shift, 4.0 * Gamma * E[k] * E[k] * t);
  }
  if (!std::isfinite(shift)) shift = 0.0;
  Complex z = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    z += rho0.matrix()(k, k) * std::exp(-4.0 * Gamma * E[k] * E[k] * t + shift);
  }
  Matrix out = rho0.matrix();
  for (std::size_t m = 0; m < d; ++m) {
    for (std::size_t n = 0; n < d; ++n) {
      const double s = E[m] + E[n];
      out(m, n) *= std::exp(Complex(-Gamma * s * s * t + shift, -(E[m] - E[n]) * t / hbar));
    }
  }
  out /= z;
  return DensityMatrix(std::move(out), E);
}

MatrixTrajectory integrate_matrix_ode(const MatrixRhs& rhs, const Matrix& rho0, double dt,
                                      double t_max, std::size_t record_every) {
  if (!(dt > 0.0)) throw ConfigurationError("matrix ODE: dt must be positive");
  if (!(t_max >= 0.0)) throw ConfigurationError("matrix ODE: t_max must be >= 0");
  if (record_every == 0) throw ConfigurationError("matrix ODE: record_every must be >= 1");
  MatrixTrajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(rho0);
  Matrix rho = rho0;
  const auto nsteps = static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
  for (std::size_t k = 1; k <= nsteps; ++k) {
    const double t0 = static_cast<double>(k - 1) * dt;
    const double t1 = k == nsteps ? t_max : static_cast<double>(k) * dt;
    const double h = t1 - t0;
    const Matrix k1 = rhs(t0, rho);
    const Matrix k2 = rhs(t0 + 0.5 * h, rho + 0.5 * h * k1);
    const Matrix k3 = rhs(t0 + 0.5 * h, rho + 0.5 * h * k2);
    const Matrix k4 = rhs(t1, rho + h * k3);
    rho += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!rho.allFinite()) {
      std::ostringstream msg;
      msg << "matrix ODE: non-finite state at t = " << t0 << ", dt = " << h;
      throw NumericalInstability(msg.str(), t0, h, "matrix RK4");
    }
    if (k % record_every == 0 || k == nsteps) {
      traj.times.push_back(t1);
      traj.states.push_back(rho);
    }
  }
  return traj;
}

Matrix nonlinear_me_rhs(const Matrix& rho, const Matrix& H, double Gamma, double hbar) {
  check_same_dim(rho, H, "nonlinear_me_rhs");
  const Matrix Hrho = H * rho;
  const Matrix rhoH = rho * H;
  const Complex h2 = (H * Hrho).trace();
  return -kI / hbar * (Hrho - rhoH) - Gamma * anticommutator(H, Hrho + rhoH) + 4.0 * Gamma * h2 * rho;
}

MatrixTrajectory integrate_nonlinear_me(const Matrix& rho0, const Matrix& H, double Gamma, double dt,
                                        double t_max, double hbar, std::size_t record_every) {
  check_square(H, "integrate_nonlinear_me");
  if (!(H - H.adjoint()).isZero(1e-12)) {
    throw ConfigurationError("integrate_nonlinear_me: H must be Hermitian");
  }
  return integrate_matrix_ode(
      [&](double, const Matrix& r) { return nonlinear_me_rhs(r, H, Gamma, hbar); }, rho0, dt, t_max,
      record_every);
}

Matrix bracket_generator(const Matrix& rho, const Matrix& H, double Gamma, double xi, double hbar) {
  check_same_dim(rho, H, "bracket_generator");
  return -kI / hbar * commutator(H, rho) - xi * anticommutator(H, anticommutator(H, rho)) -
         Gamma * commutator(H, commutator(H, rho));
}

GradientPotential gradient_potential(const Matrix& rho, const Matrix& sigma, const Matrix& H,
                                     double Gamma, double xi, double hbar) {
  check_same_dim(rho, sigma, "gradient_potential");
  check_same_dim(rho, H, "gradient_potential");
  GradientPotential g;
  g.phi0 = (-kI / hbar * commutator(H, rho) * sigma).trace();
  g.phi_minus = -Gamma * hs_norm2(commutator(H, sigma));
  g.phi_plus = -xi * hs_norm2(anticommutator(H, sigma));
  return g;
}

GradientPotential gradient_potential_eigenbasis(const Matrix& rho, const Matrix& sigma, const Matrix& H,
                                                double Gamma, double xi, double hbar) {
  check_same_dim(rho, sigma, "gradient_potential_eigenbasis");
  check_same_dim(rho, H, "gradient_potential_eigenbasis");
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  const Matrix& U = es.eigenvectors();
  const Eigen::VectorXd& E = es.eigenvalues();
  const Matrix r = U.adjoint() * rho * U;
  const Matrix s = U.adjoint() * sigma * U;
  const Eigen::Index d = H.rows();
  GradientPotential g{0.0, 0.0, 0.0};
  for (Eigen::Index n = 0; n < d; ++n) {
    for (Eigen::Index m = 0; m < d; ++m) {
      g.phi0 += -kI / hbar * E[n] * (r(n, m) * s(m, n) - s(n, m) * r(m, n));
      const double w = std::norm(s(n, m));
      g.phi_minus += -Gamma * (E[n] - E[m]) * (E[n] - E[m]) * w;
      g.phi_plus += -xi * (E[n] + E[m]) * (E[n] + E[m]) * w;
    }
  }
  return g;
}

Matrix wirtinger_gradient(const std::function<Complex(const Matrix&)>& phi, const Matrix& sigma,
                          double h) {
  check_square(sigma, "wirtinger_gradient");
  const Eigen::Index d = sigma.rows();
  Matrix G(d, d);
  Matrix s = sigma;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const Complex orig = s(i, j);
      s(i, j) = orig + h;
      const Complex fa_p = phi(s);
      s(i, j) = orig - h;
      const Complex fa_m = phi(s);
      s(i, j) = orig + kI * h;
      const Complex fb_p = phi(s);
      s(i, j) = orig - kI * h;
      const Complex fb_m = phi(s);
      s(i, j) = orig;
      const Complex da = (fa_p - fa_m) / (2.0 * h);
      const Complex db = (fb_p - fb_m) / (2.0 * h);
      G(j, i) = 0.5 * (da - kI * db);
    }
  }
  return G;
}

double convexity_function(const Matrix& sigma, const std::vector<double>& energies, double Gamma,
                          double xi) {
  if (static_cast<std::size_t>(sigma.rows()) != energies.size() || sigma.rows() != sigma.cols()) {
    throw ConfigurationError("convexity_function: dimension mismatch");
  }
  double s = 0.0;
  const std::size_t d = energies.size();
  for (std::size_t n = 0; n < d; ++n) {
    for (std::size_t m = 0; m < d; ++m) {
      s -= 2.0 * energies[n] * ((xi + Gamma) * energies[n] + (xi - Gamma) * energies[m]) *
           std::norm(sigma(m, n));
    }
  }
  return s;
}

void FilterFunction::validate() const {
  if (!G || !chi) throw ConfigurationError("FilterFunction: G and chi must be set");
  if (std::abs(chi(0.0)) > 1e-14) throw ConfigurationError("FilterFunction: chi(0) must be 0");
  if (kind == FilterKind::frequency) {
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0}) {
      const double a = G(x), b = G(-x);
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) {
        throw ConfigurationError("FilterFunction: frequency filter G must be even");
      }
    }
  }
}

DensityMatrix spectral_filter_solution(const DensityMatrix& rho0, const FilterFunction& filter, double t,
                                       double hbar) {
  filter.validate();
  const auto& E = rho0.energies();
  const std::size_t d = rho0.dim();
  const double chi = filter.chi(t);
  Matrix out = rho0.matrix();
  for (std::size_t n = 0; n < d; ++n) {
    for (std::size_t m = 0; m < d; ++m) {
      const double arg = filter.kind == FilterKind::frequency ? E[n] - E[m] : E[n] + E[m];
      out(n, m) *= std::exp(Complex(chi * filter.G(arg), -(E[n] - E[m]) * t / hbar));
    }
  }
  if (filter.kind == FilterKind::eigenvalue) {
    Complex norm = 0.0;
    for (std::size_t k = 0; k < d; ++k) norm += rho0.matrix()(k, k) * std::exp(chi * filter.G(2.0 * E[k]));
    out /= norm;
  }
  return DensityMatrix(std::move(out), E);
}

Complex filtered_sff(const std::vector<double>& spectrum, const std::function<double(double)>& w,
                     double t) {
  if (spectrum.empty()) throw ConfigurationError("filtered_sff: empty spectrum");
  Complex s = 0.0;
  for (double en : spectrum) {
    for (double em : spectrum) {
      const double d = en - em;
      s += w(d) * std::polar(1.0, -t * d);
    }
  }
  const double n = static_cast<double>(spectrum.size());
  return s / (n * n);
}

Matrix nested_bracket_rhs(const Matrix& rho, const Matrix& H, const FilterSpec& filter, double t,
                          double hbar) {
  check_same_dim(rho, H, "nested_bracket_rhs");
  filter.validate();
  Matrix out = -kI / hbar * commutator(H, rho);
  const double rate = filter.chi_dot(t);
  const auto& c = filter.even_taylor_coeffs;
  if (filter.variant == FilterVariant::commutator) {
    Matrix nested = rho;
    out += rate * c[0] * rho;
    for (int k = 1; k <= 2 * filter.max_order(); ++k) {
      nested = commutator(H, nested);
      if (k % 2 == 0) out += rate * c[k / 2] * nested;
    }
    return out;
  }
  Matrix nested = rho;
  Matrix h2n = Matrix::Identity(H.rows(), H.cols());
  const Matrix H2 = H * H;
  out += rate * c[0] * (rho - rho.trace() * rho);
  for (int k = 1; k <= 2 * filter.max_order(); ++k) {
    nested = anticommutator(H, nested);
    if (k % 2 == 0) {
      h2n = h2n * H2;
      const int n = k / 2;
      out += rate * c[n] * (nested - std::pow(4.0, n) * (h2n * rho).trace() * rho);
    }
  }
  return out;
}

double measure_filter_dephasing_factor() {
  const std::vector<double> E = {0.0, 1.0};
  Eigen::VectorXcd psi(2);
  psi << 1.0, 1.0;
  const DensityMatrix rho0 = DensityMatrix::pure(psi, E);
  const double g = 0.3;
  FilterSpec f;
  f.even_taylor_coeffs = {0.0, -1.0};
  f.chi_dot = [g](double) { return g; };
  const Matrix H = rho0.hamiltonian();
  const double t_max = 2.0;
  const auto traj = integrate_matrix_ode(
      [&](double t, const Matrix& r) { return nested_bracket_rhs(r, H, f, t); }, rho0.matrix(), 1e-3,
      t_max, 100);
  // least-squares slopes of log|rho_01| for both solvers
  auto slope = [](const std::vector<double>& ts, const std::vector<double>& ys) {
    double st = 0, sy = 0, stt = 0, sty = 0;
    const double n = static_cast<double>(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) {
      st += ts[k];
      sy += ys[k];
      stt += ts[k] * ts[k];
      sty += ts[k] * ys[k];
    }
    return (n * sty - st * sy) / (n * stt - st * st);
  };
  std::vector<double> ys_filter, ys_deph;
  const double gamma_d = 1.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    ys_filter.push_back(std::log(std::abs(traj.states[k](0, 1))));
    ys_deph.push_back(std::log(std::abs(dephasing_solution(rho0, gamma_d, traj.times[k]).matrix()(0, 1))));
  }
  const double rate_filter = -slope(traj.times, ys_filter) / g;
  const double rate_deph = -slope(traj.times, ys_deph) / gamma_d;
  return rate_filter / rate_deph;
}

}  // namespace wflow
