#include "csnorm/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "csnorm/constants.hpp"
#include "csnorm/errors.hpp"
#include "csnorm/numerics.hpp"

namespace csnorm {

double seed_profile(double c0, double r) {
  const double r2 = r * r;
  return std::sqrt(c0 / (3.0 * kPi)) / (r2 * r2 + 1.0);
}

RadialFunction seed_function(double c, const GridPtr& grid) {
  if (!(c > 0.0)) throw std::invalid_argument("seed_function: mass must be positive");
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = seed_profile(1.0, grid->r[i]);
  return RadialFunction(grid, std::move(v)).with_mass(c);
}

std::vector<DilationSample> dilation_profile(const RadialFunction& u, const Perturbation& g,
                                             const std::vector<double>& t_samples,
                                             const std::optional<EnvelopeWitness>& witness) {
  std::vector<DilationSample> out;
  out.reserve(t_samples.size());
  for (double t : t_samples) {
    if (!(t > 0.0)) throw std::invalid_argument("dilation_profile: t must be positive");
    const ScaledEvaluation e = evaluate_scaled(u, std::log(t), g, false);
    DilationSample s;
    s.t = t;
    s.energy = e.energy.total;
    s.quadratic_part = e.energy.kinetic_half + e.energy.chern_simons_half;
    s.kinetic = e.kinetic;
    if (witness)
      s.envelope = 0.5 * t * t * (u.kinetic() + chern_simons(u)) -
                   0.5 * t * kPi * witness->delta * witness->delta * g.g(witness->x0) * witness->m_tilde;
    out.push_back(s);
  }
  return out;
}

namespace {

double l2_dot(const RadialGrid& G, const std::vector<double>& a, const std::vector<double>& b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(G.w[i] * a[i] * b[i]);
  return s.value();
}

}  // namespace

SolverReport minimize_from(const RadialFunction& start, const Perturbation& g, const MinimizerOptions& opts) {
  const RadialGrid& G = start.grid();
  const GridPtr grid = start.grid_ptr();
  const double c = start.mass();
  if (!(c > 0.0)) throw std::invalid_argument("minimize: starting point has zero mass");
  const double s0 = std::isnan(opts.s0) ? thresholds(g).s0_at_c0 : opts.s0;

  SolverReport rep;
  rep.c = c;
  rep.s0 = s0;
  RadialFunction u = start.with_mass(c);
  if (!(u.kinetic() < s0)) throw OutOfRegime("minimize: starting point lies outside the kinetic ball");
  const EnergyBreakdown e0 = energy(u, g);
  rep.initial_energy = e0.total;
  // Below this size an energy change is indistinguishable from roundoff.
  const double energy_floor = 64.0 * std::numeric_limits<double>::epsilon() *
                              (std::abs(e0.perturb_term) + e0.kinetic_half + e0.chern_simons_half + std::abs(e0.exp_term));

  const std::size_t n = u.size();
  const double step_cap = 1e6 * G.dr * G.dr;
  double alpha = opts.step > 0.0 ? opts.step : 0.25 * G.dr * G.dr;
  rep.min_step = std::numeric_limits<double>::infinity();

  std::vector<double> v(n), v_prev, u_prev;
  // projected gradient norm at a trial point
  auto projected_norm = [&](const RadialFunction& w) {
    const RadialFunction gw = gradient(w, g);
    const double l = -l2_dot(G, gw.values(), w.values()) / c;
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = gw[i] + l * w[i];
    return std::sqrt(l2_dot(G, p, p));
  };
  for (rep.iterations = 0; rep.iterations < opts.max_iter; ++rep.iterations) {
    const RadialFunction grad = gradient(u, g);
    const double lam = -l2_dot(G, grad.values(), u.values()) / c;
    for (std::size_t i = 0; i < n; ++i) v[i] = -(grad[i] + lam * u[i]);
    const double pg2 = l2_dot(G, v, v);
    rep.projected_gradient_norm = std::sqrt(pg2);
    if (rep.projected_gradient_norm <= opts.tol) {
      rep.converged = true;
      break;
    }
    // Barzilai–Borwein guess for the trial step, then Armijo backtracking.
    if (!v_prev.empty()) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double si = u[i] - u_prev[i], yi = v_prev[i] - v[i];
        ss += G.w[i] * si * si;
        sy += G.w[i] * si * yi;
      }
      if (sy > 0.0) alpha = std::min(ss / sy, step_cap);
    }
    bool accepted = false;
    RadialFunction trial;
    double dE = 0.0;
    for (int k = 0; k < 200; ++k) {
      std::vector<double> w(n);
      for (std::size_t i = 0; i < n; ++i) w[i] = u[i] + alpha * v[i];
      trial = RadialFunction(grid, std::move(w)).with_mass(c);
      if (!(trial.kinetic() < s0)) {
        ++rep.guard_activations;
        alpha *= opts.backtrack;
        ++rep.backtracks;
        continue;
      }
      dE = energy_difference(u, trial, g);
      if (dE <= -opts.armijo * alpha * pg2) {
        accepted = true;
        break;
      }
      // Near convergence the Armijo decrease drops under the energy roundoff;
      // then a step that keeps Φ flat and shrinks the projected gradient is taken.
      if (std::abs(dE) <= energy_floor && opts.armijo * alpha * pg2 <= energy_floor &&
          projected_norm(trial) < rep.projected_gradient_norm) {
        ++rep.roundoff_accepts;
        accepted = true;
        break;
      }
      alpha *= opts.backtrack;
      ++rep.backtracks;
    }
    if (!accepted) {
      rep.stalled = true;
      break;
    }
    rep.energy_decrements.push_back(dE);
    rep.min_step = std::min(rep.min_step, alpha);
    rep.max_step = std::max(rep.max_step, alpha);
    rep.last_step = alpha;
    u_prev = u.values();
    v_prev = v;
    u = trial;
  }

  if (rep.energy_decrements.empty()) rep.min_step = 0.0;
  rep.u = u;
  rep.energy = energy(u, g);
  rep.pohozaev = pohozaev(u, g);
  const RadialFunction grad = gradient(u, g);
  rep.lambda = -l2_dot(G, grad.values(), u.values()) / c;
  rep.gradient_norm = std::sqrt(l2_dot(G, grad.values(), grad.values()));
  rep.mass = u.mass();
  rep.kinetic = u.kinetic();
  rep.kinetic_margin = s0 - rep.kinetic;
  rep.monotone_nonincreasing = std::is_sorted(u.values().rbegin(), u.values().rend());
  rep.positive = std::all_of(u.values().begin(), u.values().end(), [](double x) { return x > 0.0; });
  return rep;
}

SolverReport minimize_local(double c, const Perturbation& g, const GridPtr& grid, const MinimizerOptions& opts) {
  MinimizerOptions o = opts;
  if (std::isnan(o.c0) || std::isnan(o.s0)) {
    const ConstantsReport th = thresholds(g);
    if (std::isnan(o.c0)) o.c0 = th.c0;
    if (std::isnan(o.s0)) o.s0 = th.s0_at_c0;
  }
  if (!(c > 0.0 && c < o.c0)) throw OutOfRegime("minimize_local: mass must lie in (0, c0)");

  RadialFunction u = seed_function(c, grid);
  double best_t = 1.0;
  if (o.dilation_search) {
    // coarse log grid in t, restricted to the kinetic ball
    std::vector<double> ts;
    for (int k = -20; k <= 20; ++k) ts.push_back(std::pow(10.0, 0.1 * k));
    double best = evaluate_scaled(u, 0.0, g, false).energy.total;
    for (const auto& s : dilation_profile(u, g, ts)) {
      if (s.kinetic < o.s0 && s.energy < best) {
        best = s.energy;
        best_t = s.t;
      }
    }
    if (best_t != 1.0) u = dilate_mass_preserving(u, best_t).with_mass(c);
  }
  SolverReport rep = minimize_from(u, g, o);
  rep.seed_dilation = best_t;
  return rep;
}

void to_json(nlohmann::json& j, const SolverReport& r) {
  double worst_increase = 0.0;
  for (double d : r.energy_decrements) worst_increase = std::max(worst_increase, d);
  j = nlohmann::json{{"c", r.c},
                     {"phi", r.energy.total},
                     {"energy", r.energy},
                     {"lambda", r.lambda},
                     {"pohozaev", r.pohozaev},
                     {"projected_gradient_norm", r.projected_gradient_norm},
                     {"gradient_norm", r.gradient_norm},
                     {"iterations", r.iterations},
                     {"accepted_steps", r.energy_decrements.size()},
                     {"backtracks", r.backtracks},
                     {"roundoff_accepts", r.roundoff_accepts},
                     {"guard_activations", r.guard_activations},
                     {"step", {{"min", r.min_step}, {"max", r.max_step}, {"last", r.last_step}}},
                     {"mass", r.mass},
                     {"kinetic", r.kinetic},
                     {"s0", r.s0},
                     {"kinetic_margin", r.kinetic_margin},
                     {"seed_dilation", r.seed_dilation},
                     {"initial_energy", r.initial_energy},
                     {"largest_energy_change_per_step", worst_increase},
                     {"converged", r.converged},
                     {"stalled", r.stalled},
                     {"monotone_nonincreasing", r.monotone_nonincreasing},
                     {"positive", r.positive}};
}

}  // namespace csnorm
