#include "wflow/observables.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "wflow/brackets.hpp"
#include "wflow/errors.hpp"
#include "wflow/stencil.hpp"
#include "wflow/text_format.hpp"

namespace wflow {

const std::vector<std::string>& ObservableSeries::columns() {
  static const std::vector<std::string> names = {"t",  "norm", "x",   "p",   "x2",   "p2",
                                                 "xp", "H",    "mu2", "mu4", "Wneg", "neg_area"};
  return names;
}

namespace {

std::array<double, 12> as_array(const ObservableRecord& r) {
  return {r.t, r.norm, r.x, r.p, r.x2, r.p2, r.xp, r.H, r.mu2, r.mu4, r.Wneg, r.neg_area};
}

ObservableRecord from_array(const std::array<double, 12>& a) {
  return ObservableRecord{a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8], a[9], a[10], a[11]};
}

}  // namespace

void ObservableSeries::push(const ObservableRecord& r) {
  if (!records_.empty() && !(r.t > records_.back().t)) {
    throw ContractViolation("ObservableSeries: times must be strictly increasing");
  }
  if (!(r.norm > 0.0)) throw ContractViolation("ObservableSeries: norm must be positive");
  records_.push_back(r);
}

std::vector<double> ObservableSeries::times() const { return column("t"); }

std::vector<double> ObservableSeries::column(const std::string& name) const {
  const auto& names = columns();
  std::size_t c = 0;
  while (c < names.size() && names[c] != name) ++c;
  if (c == names.size()) throw ConfigurationError("ObservableSeries: unknown column '" + name + "'");
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(as_array(r)[c]);
  return out;
}

double expectation(const ObservableFunction& A, const WignerField& W, double t) {
  const WignerField a = WignerField::sample(W.grid(), [&](double x, double p) { return A(x, p, t); });
  return integrate_product(a.values(), W.values(), W.grid());
}

double energy_moment(int n, const HamiltonianModel& H, const WignerField& W, double t) {
  if (n < 0) throw ConfigurationError("energy_moment: n must be >= 0");
  const WignerField hn =
      WignerField::sample(W.grid(), [&](double x, double p) { return std::pow(H(x, p, t), n); });
  return integrate_product(hn.values(), W.values(), W.grid());
}

double negative_area(const WignerField& W) {
  std::vector<double> neg(W.values().begin(), W.values().end());
  for (double& v : neg) v = std::min(v, 0.0);
  return integrate(neg, W.grid());
}

double wigner_log_negativity(const WignerField& W) {
  const double norm = integrate(W);
  if (std::abs(norm - 1.0) > kNormalizationTolerance) {
    std::ostringstream msg;
    msg << "wigner_log_negativity: field is not normalized (integral = " << norm << ")";
    throw ContractViolation(msg.str());
  }
  std::vector<double> a(W.values().begin(), W.values().end());
  for (double& v : a) v = std::abs(v);
  return std::log(integrate(a, W.grid()));
}

std::array<std::array<double, 2>, 2> covariance(const WignerField& W) {
  const double mx = expectation([](double x, double, double) { return x; }, W);
  const double mp = expectation([](double, double p, double) { return p; }, W);
  const double xx = expectation([](double x, double, double) { return x * x; }, W);
  const double pp = expectation([](double, double p, double) { return p * p; }, W);
  const double xp = expectation([](double x, double p, double) { return x * p; }, W);
  const double c = xp - mx * mp;
  return {{{xx - mx * mx, c}, {c, pp - mp * mp}}};
}

ObservableRecord measure(const HamiltonianModel& H, const WignerField& W, double t) {
  const PhaseGrid& g = W.grid();
  const std::size_t n = g.size();
  std::vector<double> buf(n);
  auto moment = [&](auto f) {
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const double x = g.x(i);
      for (std::size_t j = 0; j < g.np(); ++j) buf[i * g.np() + j] = f(x, g.p(j));
    }
    return integrate_product(buf, W.values(), g);
  };
  ObservableRecord r;
  r.t = t;
  r.norm = integrate(W);
  r.x = moment([](double x, double) { return x; });
  r.p = moment([](double, double p) { return p; });
  r.x2 = moment([](double x, double) { return x * x; });
  r.p2 = moment([](double, double p) { return p * p; });
  r.xp = moment([](double x, double p) { return x * p; });
  r.H = moment([&](double x, double p) { return H(x, p, t); });
  r.mu2 = moment([&](double x, double p) {
    const double h = H(x, p, t);
    return h * h;
  });
  r.mu4 = moment([&](double x, double p) {
    const double h = H(x, p, t);
    return h * h * h * h;
  });
  for (std::size_t k = 0; k < n; ++k) buf[k] = std::min(W.values()[k], 0.0);
  r.neg_area = integrate(buf, g);
  // int |W| = mu_0 - 2 * neg_area; dividing by mu_0 keeps W-neg at exactly 0 for W >= 0.
  r.Wneg = r.norm > 0.0 ? std::log1p(-2.0 * r.neg_area / r.norm) : std::nan("");
  return r;
}

std::optional<double> classical_emergence_time(const ObservableSeries& series, double eps) {
  const auto& rs = series.records();
  if (rs.empty()) return std::nullopt;
  auto below = [&](const ObservableRecord& r) { return r.neg_area < -eps * r.norm; };
  std::size_t k = 0;
  while (k < rs.size() && !below(rs[k])) ++k;
  if (k == rs.size()) return rs.front().t;
  for (; k < rs.size(); ++k) {
    if (below(rs[k])) continue;
    const auto& a = rs[k - 1];
    const auto& b = rs[k];
    const double fa = a.neg_area + eps * a.norm;
    const double fb = b.neg_area + eps * b.norm;
    const double s = fb == fa ? 1.0 : -fa / (fb - fa);
    return a.t + s * (b.t - a.t);
  }
  return std::nullopt;
}

void write_csv(std::ostream& out, const ObservableSeries& series) {
  const auto& names = ObservableSeries::columns();
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
  for (const auto& r : series.records()) {
    const auto a = as_array(r);
    for (std::size_t c = 0; c < a.size(); ++c) out << (c ? "," : "") << format_double(a[c]);
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const ObservableSeries& series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open CSV file for writing: " + path.string());
  write_csv(out, series);
  if (!out) throw std::runtime_error("failed writing CSV file: " + path.string());
}

ObservableSeries read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigurationError("observable CSV: empty input");
  std::string expected;
  for (const auto& n : ObservableSeries::columns()) expected += (expected.empty() ? "" : ",") + n;
  if (line != expected) throw ConfigurationError("observable CSV: unexpected header '" + line + "'");
  ObservableSeries series;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::array<double, 12> a{};
    const char* cursor = line.c_str();
    for (std::size_t c = 0; c < a.size(); ++c) {
      char* end = nullptr;
      a[c] = std::strtod(cursor, &end);
      if (end == cursor || (c + 1 < a.size() ? *end != ',' : *end != '\0')) {
        throw ConfigurationError("observable CSV: malformed row " + std::to_string(row));
      }
      cursor = end + (c + 1 < a.size() ? 1 : 0);
    }
    series.push(from_array(a));
  }
  return series;
}

ObservableSeries read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path.string());
  return read_csv(in);
}

}  // namespace wflow
