#include "csnorm/constants.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "csnorm/errors.hpp"
#include "csnorm/numerics.hpp"

namespace csnorm {

ZetaResult zeta_series(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("zeta: t must be finite and nonnegative");
  ZetaResult z;
  z.truncation_warning = t > 10.0;
  // p_k = t^k/(k+3)!, q_k = 4^{k+2} p_k; term_k = q_k + p_k/(k+1)
  double p = 1.0 / 6.0, q = 16.0 / 6.0;
  double sum = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double term = q + p / (k + 1);
    sum += term;
    z.terms = k + 1;
    const double ratio = 4.0 * t / (k + 4);
    p *= t / (k + 4);
    q *= ratio;
    const double next = q + p / (k + 2);
    if (next < 1e-15 * sum) {
      // later ratios are below the current one, so the tail is geometric-dominated
      const double r = 4.0 * t / (k + 5);
      z.tail_bound = r < 1.0 ? next / (1.0 - r) / sum : std::numeric_limits<double>::infinity();
      break;
    }
  }
  z.value = sum;
  return z;
}

double zeta(double t) { return zeta_series(t).value; }

double zeta_partial(double t, int terms) {
  long double s = 0.0L;
  for (int k = 0; k < terms; ++k) {
    const long double coef = std::pow(4.0L, k + 2) * (k + 1) + 1.0L;
    const long double logden = std::log(static_cast<long double>(k + 1)) + std::lgamma(static_cast<long double>(k + 4));
    const long double tk = k == 0 ? 1.0L : std::pow(static_cast<long double>(t), k);
    if (tk == 0.0L) continue;
    s += coef * tk * std::exp(-logden);
  }
  return static_cast<double>(s);
}

namespace {

// State: Q, Q', and running integrals of 2πr Q², 2πr Q'², 2πr Q⁴.
using State = std::array<double, 5>;

State rhs(double r, const State& y) {
  const double Q = y[0], P = y[1];
  const double w = 2.0 * kPi * r;
  return {P, -P / r + Q - Q * Q * Q, w * Q * Q, w * P * P, w * Q * Q * Q * Q};
}

enum class Shot { Over, Under };

struct ShotResult {
  Shot kind;
  State y;
  double r;
};

ShotResult shoot(double a, double h, double r_max) {
  const double r0 = h;
  const double b = (a - a * a * a) / 4.0;
  State y{a + b * r0 * r0, 2.0 * b * r0, kPi * r0 * r0 * a * a, 0.5 * kPi * b * b * r0 * r0 * r0 * r0,
          kPi * r0 * r0 * a * a * a * a};
  double r = r0;
  while (r < r_max) {
    const State k1 = rhs(r, y);
    State t;
    for (int i = 0; i < 5; ++i) t[i] = y[i] + 0.5 * h * k1[i];
    const State k2 = rhs(r + 0.5 * h, t);
    for (int i = 0; i < 5; ++i) t[i] = y[i] + 0.5 * h * k2[i];
    const State k3 = rhs(r + 0.5 * h, t);
    for (int i = 0; i < 5; ++i) t[i] = y[i] + h * k3[i];
    const State k4 = rhs(r + h, t);
    State next;
    for (int i = 0; i < 5; ++i) next[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (next[0] < 0.0) return {Shot::Over, y, r};
    if (next[1] > 0.0) return {Shot::Under, y, r};
    y = next;
    r += h;
  }
  return {Shot::Under, y, r};
}

}  // namespace

GroundState solve_ground_state(double h) {
  if (!(h > 0.0 && h < 0.1)) throw std::invalid_argument("ground state: step must lie in (0, 0.1)");
  const double r_max = 60.0;
  double lo = 1.5, hi = 3.0;
  if (shoot(lo, h, r_max).kind != Shot::Under || shoot(hi, h, r_max).kind != Shot::Over)
    throw NumericFailure("ground state shooting: initial bracket does not separate");
  GroundState g;
  g.step = h;
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (shoot(mid, h, r_max).kind == Shot::Over ? hi : lo) = mid;
    ++g.bisections;
  }
  // The undershooting branch stays positive and decreasing up to its turn,
  // where Q has already decayed below the quadrature resolution.
  const ShotResult s = shoot(lo, h, r_max);
  g.Q0 = lo;
  g.mass = s.y[2];
  g.kinetic = s.y[3];
  g.quartic = s.y[4];
  g.r_cut = s.r;
  g.C4 = std::pow(2.0 / g.mass, 0.25);
  return g;
}

double gn_sharp_constant() {
  static const double c4 = solve_ground_state().C4;
  return c4;
}

namespace {

double zeta_c(double c) { return zeta(std::sqrt(c / (3.0 * kPi))); }

}  // namespace

double h_tilde(double c, double s, double C4, double g_norm_43) {
  return 1.0 / 12.0 - std::pow(c, 0.25) * std::pow(s, -0.75) * C4 * g_norm_43 -
         std::pow(c, 1.5) * std::sqrt(s) / (kPi * kPi) * zeta_c(c);
}

double h_tilde_prime(double c, double s, double C4, double g_norm_43) {
  return 0.75 * std::pow(c, 0.25) * C4 * g_norm_43 * std::pow(s, -1.75) -
         std::pow(c, 1.5) / (2.0 * kPi * kPi * std::sqrt(s)) * zeta_c(c);
}

double s_c(double c, double C4, double g_norm_43) {
  return std::pow(3.0 * kPi * kPi * C4 * g_norm_43 / (2.0 * std::pow(c, 1.25) * zeta_c(c)), 0.8);
}

double s_0(double c, double C4, double g_norm_43) { return std::min(s_c(c, C4, g_norm_43), kPi / 3.0); }

double c1_expression(double c, double C4, double g_norm_43) {
  const double a = C4 * g_norm_43;
  if (a == 0.0) return 0.0;
  return 30.0 * std::pow(c, 0.25) * a *
         std::pow(2.0 * std::pow(c, 1.25) * zeta_c(c) / (3.0 * kPi * kPi * a), 0.6);
}

double c2_expression(double c, double C4, double g_norm_43) {
  const double third = kPi / 3.0;
  return 12.0 * std::pow(c, 0.25) * std::pow(third, -0.75) * C4 * g_norm_43 +
         12.0 * std::pow(c, 1.5) * std::sqrt(third) / (kPi * kPi) * zeta_c(c);
}

double h_tilde_argmax(double c, double C4, double g_norm_43, double resolution) {
  const double top = kPi / 3.0;
  const int n = static_cast<int>(std::ceil(top / resolution));
  const double step = top / n;
  int best = 1;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= n; ++i) {
    const double v = h_tilde(c, i * step, C4, g_norm_43);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double a = std::max(step * (best - 1), 0.5 * step);
  const double b = std::min(step * (best + 1), top);
  auto neg = [&](double s) { return -h_tilde(c, s, C4, g_norm_43); };
  const auto r = boost::math::tools::brent_find_minima(neg, a, b, 52);
  // keep the endpoint when the maximum sits on the boundary
  return -r.second >= best_val ? r.first : best * step;
}

double threshold_root(double (*f)(double, double, double), double C4, double g_norm_43) {
  const double top = 2.0 * kPi;
  if (f(top, C4, g_norm_43) <= 1.0) return top;
  double lo = 0.0, hi = top;
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid, C4, g_norm_43) > 1.0 ? hi : lo) = mid;
  }
  // pick whichever neighbour lands closer to equality
  return std::abs(f(hi, C4, g_norm_43) - 1.0) < std::abs(f(lo, C4, g_norm_43) - 1.0) ? hi : lo;
}

ConstantsReport::AtMass constants_at_mass(double c, double C4, double g_norm_43) {
  ConstantsReport::AtMass m;
  m.c = c;
  m.s_c = s_c(c, C4, g_norm_43);
  m.s0 = std::min(m.s_c, kPi / 3.0);
  m.zeta = zeta_c(c);
  m.h_tilde_at_s0 = h_tilde(c, m.s0, C4, g_norm_43);
  m.kappa_lower = m.s0 * m.h_tilde_at_s0;
  return m;
}

namespace {

bool strictly_below(double (*f)(double, double, double), double root, double C4, double G) {
  // log-spaced sweep of (0, root)
  for (int i = 0; i < 400; ++i) {
    const double c = root * std::pow(10.0, -12.0 * (1.0 - i / 400.0));
    if (!(f(c, C4, G) < 1.0)) return false;
  }
  return true;
}

}  // namespace

ConstantsReport thresholds(const Perturbation& g, const std::vector<double>& masses) {
  ConstantsReport r;
  r.C4 = gn_sharp_constant();
  r.Q_mass = 2.0 / std::pow(r.C4, 4);
  r.g_norm_43 = g.norm_43();
  if (!(r.g_norm_43 > 0.0)) throw AdmissibilityFailure("thresholds need a perturbation with positive L^{4/3} norm");
  r.c1 = threshold_root(c1_expression, r.C4, r.g_norm_43);
  r.c2 = threshold_root(c2_expression, r.C4, r.g_norm_43);
  r.c0 = std::min(r.c1, r.c2);
  r.c1_residual = c1_expression(r.c1, r.C4, r.g_norm_43) - 1.0;
  r.c2_residual = c2_expression(r.c2, r.C4, r.g_norm_43) - 1.0;
  r.c1_strict_below = strictly_below(c1_expression, r.c1, r.C4, r.g_norm_43);
  r.c2_strict_below = strictly_below(c2_expression, r.c2, r.C4, r.g_norm_43);
  r.s0_at_c0 = s_0(r.c0, r.C4, r.g_norm_43);
  for (double c : masses) r.at_mass.push_back(constants_at_mass(c, r.C4, r.g_norm_43));
  return r;
}

void to_json(nlohmann::json& j, const GroundState& q) {
  j = nlohmann::json{{"Q0", q.Q0},           {"mass", q.mass},   {"kinetic", q.kinetic},
                     {"quartic", q.quartic}, {"C4", q.C4},       {"extremality", q.extremality()},
                     {"r_cut", q.r_cut},     {"step", q.step},   {"bisections", q.bisections}};
}

void to_json(nlohmann::json& j, const ConstantsReport& r) {
  nlohmann::json at = nlohmann::json::array();
  for (const auto& m : r.at_mass)
    at.push_back({{"c", m.c},
                  {"s_c", m.s_c},
                  {"s0", m.s0},
                  {"zeta", m.zeta},
                  {"h_tilde_at_s0", m.h_tilde_at_s0},
                  {"kappa_lower_bound", m.kappa_lower}});
  j = nlohmann::json{{"C4", r.C4},
                     {"Q_mass", r.Q_mass},
                     {"g_norm_43", r.g_norm_43},
                     {"c1", r.c1},
                     {"c2", r.c2},
                     {"c0", r.c0},
                     {"c1_residual", r.c1_residual},
                     {"c2_residual", r.c2_residual},
                     {"c1_expression_below_one_before_root", r.c1_strict_below},
                     {"c2_expression_below_one_before_root", r.c2_strict_below},
                     {"s0_at_c0", r.s0_at_c0},
                     {"zeta_at_zero", zeta(0.0)},
                     {"at_mass", at}};
}

}  // namespace csnorm
