#include "csnorm/radial.hpp"

#include "csnorm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace csnorm {

namespace {
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

double RadialGrid::integrate(const std::vector<double>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * f[i];
  return s;
}

GridPtr build_grid(double R_max, std::size_t N) {
  if (!(R_max > 0.0) || !std::isfinite(R_max)) throw std::invalid_argument("build_grid: R_max must be positive");
  if (N < 2) throw std::invalid_argument("build_grid: N must be at least 2");
  auto g = std::make_shared<RadialGrid>();
  g->R = R_max;
  g->N = N;
  g->dr = R_max / static_cast<double>(N);
  g->r.resize(N + 1);
  g->w.resize(N + 1);
  const double dr = g->dr;
  for (std::size_t i = 0; i <= N; ++i) {
    g->r[i] = (i == N) ? R_max : static_cast<double>(i) * dr;
    g->w[i] = kTwoPi * g->r[i] * dr;
  }
  g->w[N] *= 0.5;
  // Gregory corrections: −(Δr²/12)[(r f)′(R) − (r f)′(0)] with (r f)′(0) = f(0)
  // and a one-sided three-point derivative at R.
  g->w[0] = kPi * dr * dr / 6.0;
  const double c = kTwoPi * dr / 24.0;
  g->w[N] -= c * 3.0 * g->r[N];
  g->w[N - 1] += c * 4.0 * g->r[N - 1];
  g->w[N - 2] -= c * g->r[N - 2];
  return g;
}

GridPtr reference_grid() {
  static const GridPtr g = build_grid(kReferenceR, kReferenceN);
  return g;
}

RadialFunction::RadialFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), u_(std::move(values)), cache_(std::make_shared<Cache>()) {
  if (!grid_) throw std::invalid_argument("RadialFunction: null grid");
  if (u_.size() != grid_->size()) throw std::invalid_argument("RadialFunction: size mismatch");
  for (double v : u_)
    if (!std::isfinite(v)) throw std::invalid_argument("RadialFunction: non-finite sample");
}

RadialFunction RadialFunction::zeros(GridPtr grid) {
  const std::size_t n = grid->size();
  return RadialFunction(std::move(grid), std::vector<double>(n, 0.0));
}

const Norms& RadialFunction::norms() const {
  std::call_once(cache_->once, [this] {
    const RadialGrid& g = *grid_;
    Norms n;
    for (std::size_t i = 0; i < u_.size(); ++i) {
      const double u2 = u_[i] * u_[i];
      n.mass += g.w[i] * u2;
      n.quartic += g.w[i] * u2 * u2;
    }
    n.kinetic = kinetic_energy(g, u_);
    cache_->norms = n;
  });
  return cache_->norms;
}

RadialFunction RadialFunction::scaled(double a) const {
  std::vector<double> v(u_);
  for (double& x : v) x *= a;
  return RadialFunction(grid_, std::move(v));
}

RadialFunction RadialFunction::with_mass(double c) const {
  const double m = mass();
  if (!(m > 0.0)) throw std::invalid_argument("with_mass: zero mass");
  return scaled(std::sqrt(c / m));
}

Norms norms(const RadialFunction& u) { return u.norms(); }

namespace {

// Cell difference d_i ≈ u′(r_{i+1/2}) as a short stencil.
struct Stencil {
  int n = 0;
  std::size_t idx[4];
  double coef[4];
};

Stencil cell_stencil(std::size_t N, std::size_t i, double dr) {
  Stencil s;
  const double a = 27.0 / (24.0 * dr), b = 1.0 / (24.0 * dr);
  if (i + 1 == N) {
    s.n = 2;
    s.idx[0] = i; s.coef[0] = -1.0 / dr;
    s.idx[1] = i + 1; s.coef[1] = 1.0 / dr;
  } else if (i == 0) {
    // u_{-1} = u_1 by evenness
    s.n = 3;
    s.idx[0] = 0; s.coef[0] = -a;
    s.idx[1] = 1; s.coef[1] = a + b;
    s.idx[2] = 2; s.coef[2] = -b;
  } else {
    s.n = 4;
    s.idx[0] = i - 1; s.coef[0] = b;
    s.idx[1] = i; s.coef[1] = -a;
    s.idx[2] = i + 1; s.coef[2] = a;
    s.idx[3] = i + 2; s.coef[3] = -b;
  }
  return s;
}

inline double stencil_apply(const Stencil& s, const std::vector<double>& u) {
  double d = 0.0;
  for (int k = 0; k < s.n; ++k) d += s.coef[k] * u[s.idx[k]];
  return d;
}

inline double cell_weight(const RadialGrid& g, std::size_t i) {
  return kTwoPi * (g.r[i] + 0.5 * g.dr) * g.dr;
}

}  // namespace

double kinetic_energy(const RadialGrid& g, const std::vector<double>& u) {
  double k = 0.0;
  for (std::size_t i = 0; i < g.N; ++i) {
    const double d = stencil_apply(cell_stencil(g.N, i, g.dr), u);
    k += cell_weight(g, i) * d * d;
  }
  return k;
}

void add_kinetic_gradient(const RadialGrid& g, const std::vector<double>& u, double scale,
                          std::vector<double>& out) {
  for (std::size_t i = 0; i < g.N; ++i) {
    const Stencil s = cell_stencil(g.N, i, g.dr);
    const double f = 2.0 * scale * cell_weight(g, i) * stencil_apply(s, u);
    for (int k = 0; k < s.n; ++k) out[s.idx[k]] += f * s.coef[k];
  }
}

double kinetic_difference(const RadialGrid& g, const std::vector<double>& a,
                          const std::vector<double>& b) {
  double k = 0.0;
  for (std::size_t i = 0; i < g.N; ++i) {
    const Stencil s = cell_stencil(g.N, i, g.dr);
    double da = 0.0, dd = 0.0;
    for (int j = 0; j < s.n; ++j) {
      da += s.coef[j] * a[s.idx[j]];
      dd += s.coef[j] * (b[s.idx[j]] - a[s.idx[j]]);
    }
    k += cell_weight(g, i) * dd * (2.0 * da + dd);
  }
  return k;
}

std::vector<double> radial_derivative(const RadialFunction& u) {
  const RadialGrid& g = u.grid();
  const auto& v = u.values();
  const std::size_t N = g.N;
  std::vector<double> d(N + 1);
  d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * g.dr);
  for (std::size_t i = 1; i < N; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * g.dr);
  d[N] = std::abs(v[N]) < 1e-14 ? 0.0 : (3.0 * v[N] - 4.0 * v[N - 1] + v[N - 2]) / (2.0 * g.dr);
  return d;
}

double interpolate(const RadialFunction& u, double r) {
  const RadialGrid& g = u.grid();
  if (r < 0.0) r = -r;
  if (r > g.R) return 0.0;
  const double x = r / g.dr;
  std::size_t i = static_cast<std::size_t>(x);
  if (i >= g.N) return u[g.N];
  const double f = x - static_cast<double>(i);
  return (1.0 - f) * u[i] + f * u[i + 1];
}

RadialFunction dilate_mass_preserving(const RadialFunction& u, double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("dilate_mass_preserving: t must be positive");
  if (t == 1.0) return u;
  const RadialGrid& g = u.grid();
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = t * interpolate(u, t * g.r[i]);
  return RadialFunction(u.grid_ptr(), std::move(v));
}

RadialFunction gauge_dilate(const RadialFunction& v, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("gauge_dilate: t must be finite");
  if (t == 0.0) return v;
  return dilate_mass_preserving(v, std::exp(t));
}

double moser_value(double n, double r) {
  const double L = std::log(n);
  const double k = 1.0 / std::sqrt(kTwoPi);
  r = std::abs(r);
  if (r <= 1.0 / n) return k * std::sqrt(L);
  if (r <= 1.0) return k * std::log(1.0 / r) / std::sqrt(L);
  return 0.0;
}

RadialFunction moser(double n, GridPtr grid) {
  if (!(n >= 2.0) || !std::isfinite(n)) throw std::invalid_argument("moser: n must be at least 2");
  if (grid->R < 1.0) throw std::invalid_argument("moser: grid must reach r = 1");
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = moser_value(n, grid->r[i]);
  return RadialFunction(std::move(grid), std::move(v));
}

namespace moser_exact {

double kinetic(double n) {
  if (!(n >= 2.0)) throw std::invalid_argument("moser: n must be at least 2");
  return 1.0;
}

double even_moment(double n, int k) {
  if (!(n >= 2.0)) throw std::invalid_argument("moser: n must be at least 2");
  if (k < 1) throw std::invalid_argument("even_moment: k must be positive");
  const double L = std::log(n);
  const double plateau = kPi / (n * n) * std::pow(L / kTwoPi, k);
  // ∫_0^L s^{2k} e^{-2s} ds = (2k)!/2^{2k+1} · P(2k+1, 2L)
  const int m = 2 * k;
  const double incomplete = boost::math::factorial<double>(m) / std::ldexp(1.0, m + 1) *
                            boost::math::gamma_p(m + 1, 2.0 * L);
  const double tail = kTwoPi * std::pow(kTwoPi * L, -k) * incomplete;
  return plateau + tail;
}

double mass(double n) { return even_moment(n, 1); }
double quartic(double n) { return even_moment(n, 2); }

double exp_integral(double n, double a) {
  if (!(n >= 2.0)) throw std::invalid_argument("moser: n must be at least 2");
  const double L = std::log(n);
  const double top = a * L / kTwoPi;
  if (top > 700.0) throw std::overflow_error("moser exp_integral: exponent beyond guard");
  const double plateau = kPi / (n * n) * exp_excess(top);
  const double b = a / (kTwoPi * L);
  auto f = [&](double s) { return exp_excess(b * s * s) * std::exp(-2.0 * s); };
  const double tail = kTwoPi * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, L, 20, 1e-14);
  return plateau + tail;
}

double mass_formula(double n) {
  const double L = std::log(n);
  return 1.0 / (4.0 * L) - 1.0 / (4.0 * n * n * L) - 1.0 / (2.0 * n * n);
}

double quartic_formula(double n) {
  const double L = std::log(n);
  const double n2 = n * n;
  return (1.0 / kTwoPi) *
         (3.0 / (4.0 * L * L) - L / n2 - 3.0 / (2.0 * n2) - 3.0 / (2.0 * n2 * L) - 3.0 / (4.0 * n2 * L * L));
}

}  // namespace moser_exact

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(const RadialFunction& u, std::ostream& os) {
  os << "r,u\n";
  const auto& r = u.grid().r;
  for (std::size_t i = 0; i < u.size(); ++i) os << format_double(r[i]) << ',' << format_double(u[i]) << '\n';
}

void write_csv(const RadialFunction& u, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  write_csv(u, f);
}

RadialFunction read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(f, line);
  if (line.rfind("r,u", 0) != 0) throw std::invalid_argument(path + ": expected header r,u");
  std::vector<double> r, u;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    r.push_back(std::stod(a));
    u.push_back(std::stod(b));
  }
  if (r.size() < 3) throw std::invalid_argument(path + ": too few rows");
  const std::size_t N = r.size() - 1;
  auto g = build_grid(r.back(), N);
  for (std::size_t i = 0; i <= N; ++i)
    if (std::abs(g->r[i] - r[i]) > 1e-9 * (1.0 + r.back()))
      throw std::invalid_argument(path + ": nodes are not uniform from 0");
  return RadialFunction(g, std::move(u));
}

}  // namespace csnorm
