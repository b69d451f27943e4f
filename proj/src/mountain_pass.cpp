#include "csnorm/mountain_pass.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

// Boost 1.74 pchip calls isnan unqualified
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "csnorm/constants.hpp"
#include "csnorm/errors.hpp"
#include "csnorm/numerics.hpp"

namespace csnorm {

namespace {

double weighted_dot(const RadialGrid& G, const std::vector<double>& a, const std::vector<double>& b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(G.w[i] * a[i] * b[i]);
  return s.value();
}

RadialFunction normalized(const GridPtr& grid, std::vector<double> v, double c) {
  return RadialFunction(grid, std::move(v)).with_mass(c);
}

}  // namespace

ScaledState moser_superposition(const RadialFunction& u_c, double n, double t) {
  if (!(n >= 2.0)) throw std::invalid_argument("moser_superposition: n must be at least 2");
  if (!(t >= 0.0)) throw std::invalid_argument("moser_superposition: t must be nonnegative");
  const RadialGrid& G = u_c.grid();
  const double c = u_c.mass();
  if (t == 0.0) return {u_c, 0.0};
  std::vector<double> U(u_c.size());
  for (std::size_t i = 0; i < U.size(); ++i) U[i] = u_c[i] + t * moser_value(n, G.r[i]);
  const RadialFunction Uf(u_c.grid_ptr(), U);
  const double tau = std::sqrt(Uf.mass() / c);
  return {Uf.scaled(1.0 / tau), std::log(tau)};
}

RadialFunction materialize(const ScaledState& st, const GridPtr& grid) {
  const double a = std::exp(st.s);
  std::vector<double> w(grid->size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = a * interpolate(st.v, a * grid->r[i]);
  return RadialFunction(grid, std::move(w));
}

double psi_n(double n, double t, double tau) {
  if (!(n >= 2.0) || !(t >= 0.0) || !(tau > 0.0)) throw std::invalid_argument("psi_n: need n ≥ 2, t ≥ 0, τ > 0");
  if (t * t * std::log(n) / (2.0 * kPi) > kOverflowGuard) throw MagnitudeOverflow("psi_n: t² log n/2π exceeds the guard");
  if (t == 0.0) return 0.0;
  return 0.25 * t * t - moser_exact::exp_integral(n, t * t) / (2.0 * tau * tau);
}

double extended_energy(const RadialFunction& v, double t, const Perturbation& g) {
  return evaluate_scaled(v, t, g, false).energy.total;
}

// ---------------------------------------------------------------------------
// Refined evaluation along the Moser path

namespace {

struct GaussRule {
  std::vector<double> x, w;  // on [−1, 1]
};

const GaussRule& gauss10() {
  static const GaussRule rule = [] {
    using Q = boost::math::quadrature::gauss<double, 10>;
    GaussRule r;
    const auto& a = Q::abscissa();
    const auto& w = Q::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) {
        r.x.push_back(0.0);
        r.w.push_back(w[i]);
        continue;
      }
      r.x.push_back(-a[i]);
      r.w.push_back(w[i]);
      r.x.push_back(a[i]);
      r.w.push_back(w[i]);
    }
    return r;
  }();
  return rule;
}

std::vector<double> path_breakpoints(const RadialGrid& G, double n, const std::vector<double>& extra) {
  std::vector<double> b(G.r.begin(), G.r.end());
  const double L = std::log(n);
  const int panels = std::max(8, static_cast<int>(std::ceil(8.0 * L)));
  for (int k = 0; k <= panels; ++k) {
    const double r = std::exp(-L * k / panels);
    if (r <= G.R) b.push_back(r);
  }
  for (double e : extra)
    if (e > 0.0 && e < G.R) b.push_back(e);
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

struct RefinedSums {
  double mass = 0.0, IF = 0.0, pert = 0.0;
};

// ∫U², ∫F(U) and ∫g(y/τ)U(y) dy over [0, R] for U = u_c (piecewise linear) + t w̃_n.
RefinedSums refined_sums(const RadialFunction& u_c, const Perturbation& g, double n, double t, double tau,
                         const std::vector<double>& breaks) {
  const RadialGrid& G = u_c.grid();
  const GaussRule& q = gauss10();
  CompensatedSum m, f, p;
  const bool with_g = tau > 0.0 && !g.is_zero();
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k], b = breaks[k + 1];
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    std::size_t j = static_cast<std::size_t>(mid / G.dr);
    if (j >= G.N) j = G.N - 1;
    const double u0 = u_c[j], u1 = u_c[j + 1], r0 = G.r[j];
    double pm = 0.0, pf = 0.0, pp = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) {
      const double r = mid + half * q.x[i];
      const double U = u0 + (u1 - u0) * (r - r0) / G.dr + t * moser_value(n, r);
      const double x = U * U;
      if (x > kOverflowGuard) throw MagnitudeOverflow("Moser path: u² exceeds the overflow guard");
      const double wr = q.w[i] * 2.0 * kPi * r;
      pm += wr * x;
      pf += wr * exp_excess(x);
      if (with_g) pp += wr * g.g(r / tau) * U;
    }
    m.add(half * pm);
    f.add(half * pf);
    p.add(half * pp);
  }
  return {m.value(), f.value(), p.value()};
}

}  // namespace

MoserPathPoint moser_path_point(const RadialFunction& u_c, const Perturbation& g, double n, double t) {
  if (!(n >= 2.0)) throw std::invalid_argument("moser_path_point: n must be at least 2");
  const RadialGrid& G = u_c.grid();
  if (G.R < 1.0) throw std::invalid_argument("moser_path_point: grid must reach r = 1");
  const double c = u_c.mass();
  const double L = std::log(n);

  const auto base = path_breakpoints(G, n, {});
  const RefinedSums first = refined_sums(u_c, g, n, t, 0.0, base);
  const double tau = std::sqrt(first.mass / c);
  std::vector<double> extra;
  for (double b : g.breakpoints()) extra.push_back(tau * b);
  const RefinedSums s = extra.empty() ? refined_sums(u_c, g, n, t, tau, base)
                                      : refined_sums(u_c, g, n, t, tau, path_breakpoints(G, n, extra));

  // ‖∇(u_c + t w̃_n)‖² with the exact cross term for piecewise-linear u_c
  const double cross = std::sqrt(2.0 * kPi / L) * (interpolate(u_c, 1.0 / n) - interpolate(u_c, 1.0));
  const double K = u_c.kinetic() + 2.0 * t * cross + t * t;

  std::vector<double> Ug(u_c.size());
  for (std::size_t i = 0; i < Ug.size(); ++i) Ug[i] = u_c[i] + t * moser_value(n, G.r[i]);
  const double B = chern_simons(RadialFunction(u_c.grid_ptr(), Ug));

  MoserPathPoint pt;
  pt.t = t;
  pt.tau = tau;
  pt.kinetic = K;
  const double it2 = 1.0 / (tau * tau);
  pt.exp_term = 0.5 * it2 * s.IF;
  pt.energy = 0.5 * K + 0.5 * it2 * it2 * B - pt.exp_term - it2 * s.pert;
  const ScaledState st = moser_superposition(u_c, n, t);
  pt.energy_grid = evaluate_scaled(st.v, st.s, g, false).energy.total;
  return pt;
}

double moser_t_limit(const RadialFunction& u_c, double n) {
  const double top = std::sqrt(kOverflowGuard) * 0.999 - std::abs(u_c[0]);
  return top / moser_value(n, 0.0);
}

PathProfile path_energy_profile(const RadialFunction& u_c, const Perturbation& g, double m_c, double n, double t_max,
                                int samples) {
  if (samples < 3) throw std::invalid_argument("path_energy_profile: need at least three samples");
  const double limit = moser_t_limit(u_c, n);
  PathProfile p;
  p.n = n;
  p.m_c = m_c;
  p.t_max = t_max > 0.0 ? std::min(t_max, limit) : limit;

  for (;;) {
    p.rows.clear();
    for (int k = 0; k < samples; ++k) p.rows.push_back(moser_path_point(u_c, g, n, p.t_max * k / (samples - 1)));
    std::size_t top = 0, top_grid = 0;
    for (std::size_t k = 1; k < p.rows.size(); ++k) {
      if (p.rows[k].energy > p.rows[top].energy) top = k;
      if (p.rows[k].energy_grid > p.rows[top_grid].energy_grid) top_grid = k;
    }
    p.sup = p.rows[top].energy;
    p.t_at_sup = p.rows[top].t;
    if (top > 0 && top + 1 < p.rows.size()) {
      auto neg = [&](double t) { return -moser_path_point(u_c, g, n, t).energy; };
      const auto r = boost::math::tools::brent_find_minima(neg, p.rows[top - 1].t, p.rows[top + 1].t, 40);
      if (-r.second > p.sup) {
        p.sup = -r.second;
        p.t_at_sup = r.first;
      }
    }
    p.t_hat_found = p.t_hat_grid_found = false;
    for (std::size_t k = top + 1; k < p.rows.size(); ++k)
      if (p.rows[k].energy < 2.0 * m_c) {
        p.t_hat = p.rows[k].t;
        p.t_hat_found = true;
        break;
      }
    for (std::size_t k = top_grid + 1; k < p.rows.size(); ++k)
      if (p.rows[k].energy_grid < 2.0 * m_c) {
        p.t_hat_grid = p.rows[k].t;
        p.t_hat_grid_found = true;
        break;
      }
    if ((p.t_hat_found && p.t_hat_grid_found) || p.t_max >= limit || p.extensions >= 4) break;
    p.t_max = std::min(1.5 * p.t_max, limit);
    ++p.extensions;
  }
  p.gap = m_c + 2.0 * kPi - p.sup;
  return p;
}

// ---------------------------------------------------------------------------
// Paths

PathState moser_path(const RadialFunction& u_c, const Perturbation& g, double m_c, double n, double t_hat,
                     int images) {
  if (images < 4) throw std::invalid_argument("moser_path: need at least four images");
  PathState p;
  p.c = u_c.mass();
  p.m_c = m_c;
  for (int k = 0; k < images; ++k) p.images.push_back(moser_superposition(u_c, n, t_hat * k / (images - 1)));
  refresh_energies(p, g);
  return p;
}

void refresh_energies(PathState& p, const Perturbation& g) {
  p.energies.resize(p.images.size());
  for (std::size_t k = 0; k < p.images.size(); ++k)
    p.energies[k] = extended_energy(p.images[k].v, p.images[k].s, g);
  p.max_index = static_cast<std::size_t>(std::max_element(p.energies.begin(), p.energies.end()) - p.energies.begin());
}

// ---------------------------------------------------------------------------
// Preconditioned tangential gradients

namespace {

// Solves (e2·A + μ·W) x = b where A is the second-order radial stiffness
// matrix and W the quadrature weights (Thomas algorithm), with x = 0 at r = R.
// Saddle searches hold the outer node fixed: with a free end a plateau
// reaching r = R costs no kinetic energy and the barrier disappears.
std::vector<double> precondition(const RadialGrid& G, double e2, double mu, std::vector<double> b) {
  const std::size_t n = b.size();
  std::vector<double> diag(n), off(n - 1);
  for (std::size_t i = 0; i < n; ++i) diag[i] = mu * G.w[i];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double k = e2 * 2.0 * kPi * (G.r[i] + 0.5 * G.dr) / G.dr;
    diag[i] += k;
    diag[i + 1] += k;
    off[i] = -k;
  }
  diag[n - 1] = 1.0;
  off[n - 2] = 0.0;
  b[n - 1] = 0.0;
  std::vector<double> cp(n), x(b);
  cp[0] = off[0] / diag[0];
  x[0] = b[0] / diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double m = diag[i] - off[i - 1] * cp[i - 1];
    if (i + 1 < n) cp[i] = off[i] / m;
    x[i] = (b[i] - off[i - 1] * x[i - 1]) / m;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= cp[i] * x[i + 1];
  return x;
}

struct Direction {
  std::vector<double> pv;   // preconditioned tangential gradient in v
  double ps = 0.0;          // scaled s-gradient
  double dual_v = 0.0;      // ⟨∇_v Φ̃, pv⟩ ≥ 0
  double dual_s = 0.0;      // P²/h_s
  double residual = 0.0;    // L² norm of the tangential gradient
  double lambda_v = 0.0;
};

Direction direction(const ScaledEvaluation& ev, const RadialFunction& v, double s) {
  const RadialGrid& G = v.grid();
  const std::size_t n = v.size();
  const double c = ev.mass;
  const double e2 = std::exp(2.0 * s);
  Direction d;
  // multiplier over the free nodes (the outer node is held fixed)
  for (std::size_t i = 0; i + 1 < n; ++i) d.lambda_v -= G.w[i] * ev.grad[i] * v[i];
  d.lambda_v /= c;
  std::vector<double> r(n), e(n), wv(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = ev.grad[i] + d.lambda_v * v[i];
    e[i] = G.w[i] * ev.grad[i];
    wv[i] = G.w[i] * v[i];
  }
  r[n - 1] = 0.0;  // the outer node is not free
  d.residual = std::sqrt(weighted_dot(G, r, r));
  const double mu = std::max(ev.kinetic, 1e-300) / c;
  const auto p = precondition(G, e2, mu, e);
  const auto q = precondition(G, e2, mu, wv);
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a += wv[i] * p[i];
    b += wv[i] * q[i];
  }
  d.pv.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.pv[i] = p[i] - (a / b) * q[i];
  for (std::size_t i = 0; i < n; ++i) d.dual_v += e[i] * d.pv[i];
  const double hs = 2.0 * (ev.kinetic + ev.chern_simons);
  d.ps = ev.pohozaev.value / hs;
  d.dual_s = ev.pohozaev.value * d.ps;
  return d;
}

double state_distance2(const ScaledState& a, const ScaledState& b, double c) {
  const RadialGrid& G = a.v.grid();
  double s = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    const double d = a.v[i] - b.v[i];
    s += G.w[i] * d * d;
  }
  const double ds = a.s - b.s;
  return s / c + ds * ds;
}

// Returns the common image spacing after reparameterization.
double reparameterize(PathState& p) {
  const std::size_t P = p.images.size();
  std::vector<double> ell(P, 0.0);
  for (std::size_t k = 1; k < P; ++k) {
    const double d = std::sqrt(state_distance2(p.images[k - 1], p.images[k], p.c));
    if (!(d > 1e-12)) throw ReparameterizationFailure("string method: adjacent images collapsed");
    ell[k] = ell[k - 1] + d;
  }
  std::vector<double> target(P);
  for (std::size_t k = 0; k < P; ++k) target[k] = ell.back() * static_cast<double>(k) / static_cast<double>(P - 1);

  const std::size_t n = p.images[0].v.size();
  std::vector<std::vector<double>> vals(P, std::vector<double>(n));
  std::vector<double> svals(P);
  auto interp = [&](auto&& getter, auto&& setter) {
    std::vector<double> x(ell), y(P);
    for (std::size_t k = 0; k < P; ++k) y[k] = getter(k);
    boost::math::interpolators::pchip<std::vector<double>> f(std::move(x), std::move(y));
    for (std::size_t k = 1; k + 1 < P; ++k) setter(k, f(target[k]));
  };
  for (std::size_t i = 0; i < n; ++i)
    interp([&](std::size_t k) { return p.images[k].v[i]; }, [&](std::size_t k, double y) { vals[k][i] = y; });
  interp([&](std::size_t k) { return p.images[k].s; }, [&](std::size_t k, double y) { svals[k] = y; });
  for (std::size_t k = 1; k + 1 < P; ++k) {
    p.images[k].v = normalized(p.images[k].v.grid_ptr(), std::move(vals[k]), p.c);
    p.images[k].s = svals[k];
  }
  return ell.back() / static_cast<double>(P - 1);
}

double path_spacing(const PathState& p) {
  double L = 0.0;
  for (std::size_t k = 1; k < p.images.size(); ++k) L += std::sqrt(state_distance2(p.images[k - 1], p.images[k], p.c));
  return L / static_cast<double>(p.images.size() - 1);
}

}  // namespace

namespace {

double fiber_energy(const RadialFunction& v, double s, const Perturbation& g) {
  try {
    return evaluate_scaled(v, s, g, false).energy.total;
  } catch (const MagnitudeOverflow&) {
    return -std::numeric_limits<double>::infinity();
  }
}

double fiber_slope(const RadialFunction& v, double s, const Perturbation& g) {
  try {
    return evaluate_scaled(v, s, g, false).pohozaev.value;
  } catch (const MagnitudeOverflow&) {
    return -std::numeric_limits<double>::infinity();
  }
}

double solve_slope(const RadialFunction& v, const Perturbation& g, double a, double b) {
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t it = 200;
  const auto r = boost::math::tools::toms748_solve([&](double s) { return fiber_slope(v, s, g); }, a, b, tol, it);
  return 0.5 * (r.first + r.second);
}

// Sign change of P found by walking out from the guess; NaN if none.
double local_fiber_root(const RadialFunction& v, double s_guess, const Perturbation& g) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto P = [&](double s) { return fiber_slope(v, s, g); };
  double a = s_guess, b = s_guess, step = 0.05;
  const double fa = P(a);
  if (fa > 0.0) {
    double fb = fa;
    while (fb > 0.0) {
      a = b;
      b += step;
      step *= 2.0;
      fb = P(b);
      if (step > 100.0) return nan;
    }
    // an overflow on the far side is pulled back to a finite bracket
    while (std::isinf(fb)) {
      const double m = 0.5 * (a + b);
      const double fm = P(m);
      if (fm > 0.0) {
        a = m;
      } else {
        b = m;
        fb = fm;
      }
    }
  } else {
    double fl = fa;
    while (!(fl > 0.0)) {
      b = a;
      a -= step;
      step *= 2.0;
      fl = P(a);
      if (step > 100.0) return nan;
    }
    if (std::isinf(P(b))) {
      while (std::isinf(P(b))) b = 0.5 * (a + b);
      if (P(b) > 0.0) return nan;
    }
  }
  return solve_slope(v, g, a, b);
}

}  // namespace

double fiber_maximum(const RadialFunction& v, double s_guess, const Perturbation& g) {
  // The peak of the fiber lies above the barrier and has positive energy;
  // near s → −∞ the fiber is ≈ 0⁻ and P can change sign spuriously there.
  const double local = local_fiber_root(v, s_guess, g);
  if (std::isfinite(local) && fiber_energy(v, local, g) > 0.0) return local;

  const double top = max_abs(v);
  if (!(top > 0.0)) throw NumericFailure("fiber_maximum: zero profile");
  const double s_hi = std::log(std::sqrt(kOverflowGuard) / top);
  const double ds = 0.05;
  double best_s = s_hi, best_e = -std::numeric_limits<double>::infinity();
  for (double s = s_hi - 40.0; s <= s_hi; s += ds) {
    const double e = fiber_energy(v, s, g);
    if (e > best_e) {
      best_e = e;
      best_s = s;
    }
  }
  const double a = best_s - ds, b = best_s + ds;
  if (fiber_slope(v, a, g) > 0.0 && fiber_slope(v, b, g) < 0.0) return solve_slope(v, g, a, b);
  throw NumericFailure("fiber_maximum: no interior maximum on the fiber");
}

SaddleReport climb_to_saddle(const ScaledState& start, const Perturbation& g, double tol, int max_iter) {
  const double c = start.v.mass();
  const GridPtr grid = start.v.grid_ptr();
  RadialFunction v = start.v;
  double s = fiber_maximum(v, start.s, g);
  ScaledEvaluation ev = evaluate_scaled(v, s, g, true);
  double alpha = 1.0;
  SaddleReport rep;
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                       (ev.energy.kinetic_half + ev.energy.exp_term + std::abs(ev.energy.perturb_term));
  for (rep.iterations = 0; rep.iterations < max_iter; ++rep.iterations) {
    const Direction d = direction(ev, v, s);
    rep.projected_gradient_norm = d.residual;
    if (d.residual <= tol) {
      rep.converged = true;
      break;
    }
    bool accepted = false;
    for (int k = 0; k < 60 && !accepted; ++k) {
      std::vector<double> w(v.size());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = v[i] - alpha * d.pv[i];
      const RadialFunction vt = normalized(grid, std::move(w), c);
      try {
        const double st = fiber_maximum(vt, s, g);
        ScaledEvaluation et = evaluate_scaled(vt, st, g, true);
        const double dJ = et.energy.total - ev.energy.total;
        bool ok = dJ <= -1e-4 * alpha * d.dual_v;
        // Once the predicted decrease is under the energy roundoff, accept
        // steps that leave J flat and shrink the tangential residual.
        if (!ok && std::abs(dJ) <= floor && 1e-4 * alpha * d.dual_v <= floor)
          ok = direction(et, vt, st).residual < d.residual;
        if (ok) {
          v = vt;
          s = st;
          ev = std::move(et);
          accepted = true;
          alpha = std::min(1.0, 2.0 * alpha);
          break;
        }
      } catch (const NumericFailure&) {
      } catch (const MagnitudeOverflow&) {
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  rep.state = {v, s};
  rep.energy = ev.energy;
  rep.pohozaev = ev.pohozaev;
  rep.lambda = -ev.pairing / c;
  rep.kinetic = ev.kinetic;
  rep.mass = v.mass();
  if (!rep.converged) rep.projected_gradient_norm = direction(ev, v, s).residual;
  return rep;
}

double segment_max(const PathState& p, const Perturbation& g, int subdivisions) {
  double best = -std::numeric_limits<double>::infinity();
  for (double e : p.energies) best = std::max(best, e);
  for (std::size_t k = 0; k + 1 < p.images.size(); ++k) {
    const ScaledState& a = p.images[k];
    const ScaledState& b = p.images[k + 1];
    for (int j = 1; j <= subdivisions; ++j) {
      const double th = static_cast<double>(j) / (subdivisions + 1);
      std::vector<double> w(a.v.size());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = (1.0 - th) * a.v[i] + th * b.v[i];
      const RadialFunction v = normalized(a.v.grid_ptr(), std::move(w), p.c);
      try {
        best = std::max(best, extended_energy(v, (1.0 - th) * a.s + th * b.s, g));
      } catch (const MagnitudeOverflow&) {
      }
    }
  }
  return best;
}

StringResult string_method(const PathState& init, const Perturbation& g, const StringOptions& opts) {
  if (init.images.size() < 4) throw std::invalid_argument("string_method: need at least four images");
  if (!init.endpoint_admissible()) throw AdmissibilityFailure("string_method: last image is not below 2m(c)");
  StringResult res;
  PathState path = init;
  refresh_energies(path, g);
  res.initial_max = path.max_energy();
  const std::size_t P = path.images.size();
  std::vector<double> alpha(P, 0.5);
  int quiet = 0;
  // Φ is unbounded below past the peak; images are relaxed only down to the
  // frozen endpoint's energy so they cannot run off and starve the peak of
  // arclength resolution.
  const double floor_energy = path.energies.back();
  double spacing = path_spacing(path);
  for (res.sweeps = 0; res.sweeps < opts.max_sweeps; ++res.sweeps) {
    const PathState old = path;
    for (std::size_t k = 1; k + 1 < P; ++k) {
      ScaledState& im = path.images[k];
      ScaledEvaluation ev;
      try {
        ev = evaluate_scaled(im.v, im.s, g, true);
      } catch (const MagnitudeOverflow&) {
        continue;
      }
      if (ev.energy.total <= floor_energy) continue;
      const Direction d = direction(ev, im.v, im.s);
      const double dual = d.dual_v + d.dual_s;
      // trust region: no image moves more than a quarter spacing per sweep
      const double len = std::sqrt(weighted_dot(im.v.grid(), d.pv, d.pv) / path.c + d.ps * d.ps);
      const double cap = len > 0.0 ? 0.25 * spacing / len : alpha[k];
      for (int b = 0; b < 30; ++b) {
        const double a = std::min(alpha[k], cap);
        std::vector<double> w(im.v.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = im.v[i] - a * d.pv[i];
        const RadialFunction vt = normalized(im.v.grid_ptr(), std::move(w), path.c);
        const double st = im.s - a * d.ps;
        double et = std::numeric_limits<double>::infinity();
        try {
          et = extended_energy(vt, st, g);
        } catch (const MagnitudeOverflow&) {
        }
        if (et >= floor_energy && et <= ev.energy.total - 1e-4 * a * dual) {
          im = {vt, st};
          alpha[k] = std::min(1.0, 1.5 * alpha[k]);
          break;
        }
        alpha[k] = 0.5 * a;
      }
    }
    spacing = reparameterize(path);
    refresh_energies(path, g);
    const double before = old.max_energy(), after = path.max_energy();
    if (after > before + 1e-10 * (1.0 + std::abs(before))) {
      path = old;
      spacing = path_spacing(path);
      for (double& a : alpha) a *= 0.5;
      ++res.rejected_sweeps;
      if (++quiet >= opts.stall_sweeps) break;
      continue;
    }
    quiet = std::abs(after - before) <= opts.sweep_tol * (1.0 + std::abs(after)) ? quiet + 1 : 0;
    if (quiet >= opts.stall_sweeps) {
      ++res.sweeps;
      break;
    }
  }
  res.relaxed = path;
  res.relaxed_max = path.max_energy();
  res.resolved_max = segment_max(path, g);
  res.M_estimate = res.relaxed_max;
  if (opts.climb) {
    res.saddle = climb_to_saddle(path.images[path.max_index], g, opts.climb_tol, opts.climb_max_iter);
    if (res.saddle.converged) res.M_estimate = res.saddle.energy.total;
  }
  const ConstantsReport th = thresholds(g, {path.c});
  res.kappa_lower_bound = th.at_mass[0].kappa_lower;
  return res;
}

// ---------------------------------------------------------------------------
// I/O

void save_path(const PathState& p, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json j = p;
  j["files"] = nlohmann::json::array();
  for (std::size_t k = 0; k < p.images.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "image_%03zu.csv", k);
    write_csv(p.images[k].v, (fs::path(dir) / name).string());
    j["files"].push_back(name);
  }
  std::ofstream f(fs::path(dir) / "path.json");
  if (!f) throw std::runtime_error("cannot write " + dir + "/path.json");
  f << j.dump(2) << '\n';
}

PathState load_path(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream f(fs::path(dir) / "path.json");
  if (!f) throw std::runtime_error("cannot read " + dir + "/path.json");
  const nlohmann::json j = nlohmann::json::parse(f);
  PathState p;
  p.c = j.at("c").get<double>();
  p.m_c = j.at("m_c").get<double>();
  const auto& files = j.at("files");
  const auto& s = j.at("s");
  if (files.size() != s.size()) throw std::runtime_error(dir + ": image count mismatch");
  for (std::size_t k = 0; k < files.size(); ++k)
    p.images.push_back({read_csv((fs::path(dir) / files[k].get<std::string>()).string()), s[k].get<double>()});
  p.energies = j.at("energies").get<std::vector<double>>();
  p.max_index = j.at("max_index").get<std::size_t>();
  return p;
}

void to_json(nlohmann::json& j, const PathProfile& p) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : p.rows)
    rows.push_back({{"t", r.t},
                    {"tau", r.tau},
                    {"energy", r.energy},
                    {"energy_grid", r.energy_grid},
                    {"kinetic", r.kinetic},
                    {"exp_term", r.exp_term}});
  j = nlohmann::json{{"n", p.n},
                     {"m_c", p.m_c},
                     {"t_max", p.t_max},
                     {"sup", p.sup},
                     {"t_at_sup", p.t_at_sup},
                     {"ceiling", p.m_c + 2.0 * kPi},
                     {"gap", p.gap},
                     {"t_hat", p.t_hat},
                     {"t_hat_found", p.t_hat_found},
                     {"t_hat_grid", p.t_hat_grid},
                     {"t_hat_grid_found", p.t_hat_grid_found},
                     {"extensions", p.extensions},
                     {"rows", rows}};
}

void to_json(nlohmann::json& j, const PathState& p) {
  std::vector<double> s;
  for (const auto& im : p.images) s.push_back(im.s);
  j = nlohmann::json{{"c", p.c},
                     {"m_c", p.m_c},
                     {"images", p.images.size()},
                     {"s", s},
                     {"energies", p.energies},
                     {"max_index", p.max_index},
                     {"max_energy", p.energies.empty() ? 0.0 : p.max_energy()},
                     {"endpoint_admissible", p.endpoint_admissible()}};
}

void to_json(nlohmann::json& j, const SaddleReport& s) {
  j = nlohmann::json{{"s", s.state.s},
                     {"energy", s.energy},
                     {"pohozaev", s.pohozaev},
                     {"lambda", s.lambda},
                     {"projected_gradient_norm", s.projected_gradient_norm},
                     {"kinetic", s.kinetic},
                     {"mass", s.mass},
                     {"iterations", s.iterations},
                     {"converged", s.converged}};
}

void to_json(nlohmann::json& j, const StringResult& r) {
  j = nlohmann::json{{"M_estimate", r.M_estimate},
                     {"relaxed_max", r.relaxed_max},
                     {"resolved_max", r.resolved_max},
                     {"initial_max", r.initial_max},
                     {"sweeps", r.sweeps},
                     {"rejected_sweeps", r.rejected_sweeps},
                     {"kappa_lower_bound", r.kappa_lower_bound},
                     {"ceiling", r.relaxed.m_c + 2.0 * kPi},
                     {"saddle", r.saddle},
                     {"path", r.relaxed}};
}

}  // namespace csnorm
