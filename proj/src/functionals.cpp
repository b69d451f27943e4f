#include "csnorm/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "csnorm/errors.hpp"
#include "csnorm/numerics.hpp"

namespace csnorm {

namespace {

// Gregory-corrected prefix integral of q(r) = r u(r)²/2.
std::vector<double> charge_profile(const RadialGrid& g, const std::vector<double>& u) {
  const std::size_t N = g.N;
  const double dr = g.dr, c = dr * dr / 12.0;
  std::vector<double> q(N + 1), h(N + 1, 0.0);
  for (std::size_t j = 0; j <= N; ++j) q[j] = 0.5 * g.r[j] * u[j] * u[j];
  const double start = c * 0.5 * u[0] * u[0];
  double prefix = 0.0;  // Σ_{j=1}^{i-1} q_j
  for (std::size_t i = 1; i <= N; ++i) {
    const double D = (i < N) ? (q[i + 1] - q[i - 1]) / (2.0 * dr)
                             : (3.0 * q[N] - 4.0 * q[N - 1] + q[N - 2]) / (2.0 * dr);
    h[i] = dr * (prefix + 0.5 * q[i]) + start - c * D;
    prefix += q[i];
  }
  return h;
}

double cs_value(const RadialGrid& g, const std::vector<double>& u, const std::vector<double>& h) {
  double b = 0.0;
  for (std::size_t i = 1; i <= g.N; ++i) {
    const double t = u[i] * h[i] / g.r[i];
    b += g.w[i] * t * t;
  }
  return b;
}

// Adds scale·∂B/∂u_k to out[k].
void add_cs_gradient(const RadialGrid& g, const std::vector<double>& u, const std::vector<double>& h, double scale,
                     std::vector<double>& out) {
  const std::size_t N = g.N;
  const double dr = g.dr, c = dr * dr / 12.0;
  std::vector<double> a(N + 1, 0.0);
  double total = 0.0;
  for (std::size_t i = 1; i <= N; ++i) {
    a[i] = 2.0 * g.w[i] * u[i] * u[i] * h[i] / (g.r[i] * g.r[i]);
    total += a[i];
  }
  // E_k = Σ_i a_i ∂D_i/∂q_k
  std::vector<double> E(N + 1, 0.0);
  const double inv = 1.0 / (2.0 * dr);
  for (std::size_t i = 1; i < N; ++i) {
    E[i + 1] += a[i] * inv;
    E[i - 1] -= a[i] * inv;
  }
  E[N] += 3.0 * a[N] * inv;
  E[N - 1] -= 4.0 * a[N] * inv;
  E[N - 2] += a[N] * inv;

  out[0] += scale * c * u[0] * total;
  double tail = 0.0;  // Σ_{i>k} a_i
  for (std::size_t k = N; k >= 1; --k) {
    const double direct = 2.0 * g.w[k] * u[k] * h[k] * h[k] / (g.r[k] * g.r[k]);
    const double T = dr * tail + 0.5 * dr * a[k] - c * E[k];
    out[k] += scale * (direct + g.r[k] * u[k] * T);
    tail += a[k];
  }
}

void guard(double x, std::size_t i) {
  if (x > kOverflowGuard) {
    std::ostringstream os;
    os << "u^2 = " << x << " exceeds " << kOverflowGuard << " at node " << i;
    throw MagnitudeOverflow(os.str());
  }
}

// Nodal quadrature of the perturbation terms loses accuracy where g′ jumps
// (g + ρg′ is then discontinuous). In the cell holding a declared breakpoint,
// the trapezoid contribution is replaced by Gauss–Legendre on both sides of
// the break (u interpolated linearly), and the trapezoid sums on either side
// receive one-sided Gregory end corrections at the cell edges.
struct BreakCorrection {
  double energy = 0.0;    // correction to ∫ g(ρ) u
  double pohozaev = 0.0;  // correction to ∫ (g + ρg′)(ρ) u
  std::size_t first = 0;  // node index of coef[0]
  double coef[6] = {0, 0, 0, 0, 0, 0};  // ∂energy/∂u_{first+k}
  bool active = false;
};

BreakCorrection break_correction(const RadialGrid& g, const std::vector<double>& u, const Perturbation& pert,
                                 double es, double b) {
  BreakCorrection c;
  const double rb = es * b, em = 1.0 / es;
  if (!(rb > 2.0 * g.dr) || !(rb < g.r[g.N - 3])) return c;
  const std::size_t i = static_cast<std::size_t>(rb / g.dr);
  if (i < 2 || i + 3 > g.N) return c;
  const double a = g.r[i], z = g.r[i + 1];
  if (rb <= a || rb >= z) return c;
  c.first = i - 2;
  static const double xg[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static const double wg[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  auto side = [&](double lo, double hi) {
    for (int k = 0; k < 3; ++k) {
      const double r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xg[k];
      const double wt = 0.5 * (hi - lo) * wg[k] * 2.0 * kPi * r;
      const double th = (r - a) / g.dr;
      const double ul = (1.0 - th) * u[i] + th * u[i + 1];
      const double rho = em * r;
      const double gv = pert.g(rho);
      c.energy += wt * gv * ul;
      c.pohozaev += wt * (gv + rho * pert.gprime(rho)) * ul;
      c.coef[2] += wt * gv * (1.0 - th);
      c.coef[3] += wt * gv * th;
    }
  };
  side(a, rb);
  side(rb, z);
  // Remove the trapezoid cell and add −(Δr/24)(3f_i − 4f_{i−1} + f_{i−2} + 3f_{i+1} − 4f_{i+2} + f_{i+3}).
  const double half = 0.5 * g.dr, e = -g.dr / 24.0;
  const double m[6] = {e, -4.0 * e, 3.0 * e - half, 3.0 * e - half, -4.0 * e, e};
  for (int k = 0; k < 6; ++k) {
    const std::size_t j = c.first + static_cast<std::size_t>(k);
    const double rho = em * g.r[j];
    const double gv = pert.g(rho);
    const double base = m[k] * 2.0 * kPi * g.r[j];
    c.energy += base * gv * u[j];
    c.pohozaev += base * (gv + rho * pert.gprime(rho)) * u[j];
    c.coef[k] += base * gv;
  }
  c.active = true;
  return c;
}


// When e^s·(feature scale of g) is below a few Δr, g(e^{−s}y) is not resolved
// near the origin and the nodal rule (which puts g(0) on the r = 0 weight) is
// wrong by orders of magnitude. On [0, r_J] the terms are then integrated
// exactly against the hat functions of the linear interpolant of u; the
// substitution ρ = e^{−s}y and dyadic panels in ρ keep the quadrature uniform.
struct OriginLoad {
  bool active = false;
  std::size_t J = 0;
  std::vector<double> energy, pohozaev;  // replacement coefficients for nodes 0..J
};

constexpr std::size_t kOriginCells = 32;

double feature_scale(const Perturbation& pert) {
  double f = 1.0;
  for (double b : pert.breakpoints()) f = std::max(f, b);
  return f;
}

OriginLoad origin_load(const RadialGrid& g, const Perturbation& pert, double s) {
  OriginLoad o;
  const double es = std::exp(s), em = std::exp(-s);
  if (pert.is_zero() || es * feature_scale(pert) >= 0.5 * kOriginCells * g.dr || g.N < 2 * kOriginCells + 8) return o;
  o.active = true;
  o.J = kOriginCells;
  o.energy.assign(o.J + 1, 0.0);
  o.pohozaev.assign(o.J + 1, 0.0);
  using Rule = boost::math::quadrature::gauss<double, 20>;
  auto piece = [&](double a, double b, std::size_t i, bool rising) {
    std::vector<double> cuts{a, b};
    for (double bp : pert.breakpoints())
      if (bp > a && bp < b) cuts.push_back(bp);
    for (double x = 1.0; x < b; x *= 2.0)
      if (x > a) cuts.push_back(x);
    std::sort(cuts.begin(), cuts.end());
    const double ri = g.r[i];
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      auto hat = [&](double rho) {
        const double y = es * rho;
        return rising ? 1.0 - (ri - y) / g.dr : 1.0 - (y - ri) / g.dr;
      };
      o.energy[i] += Rule::integrate([&](double rho) { return pert.g(rho) * hat(rho) * rho; }, cuts[k], cuts[k + 1]);
      o.pohozaev[i] += Rule::integrate(
          [&](double rho) { return (pert.g(rho) + rho * pert.gprime(rho)) * hat(rho) * rho; }, cuts[k], cuts[k + 1]);
    }
  };
  for (std::size_t i = 0; i <= o.J; ++i) {
    if (i > 0) piece(em * g.r[i - 1], em * g.r[i], i, true);
    if (i < o.J) piece(em * g.r[i], em * g.r[i + 1], i, false);
    o.energy[i] *= 2.0 * kPi * es * es;
    o.pohozaev[i] *= 2.0 * kPi * es * es;
  }
  // The tail [r_J, R] keeps the nodal rule: half weight at r_J plus the
  // Gregory left-end term (Δr/24)(−3f_J + 4f_{J+1} − f_{J+2}).
  o.energy.resize(o.J + 3, 0.0);
  o.pohozaev.resize(o.J + 3, 0.0);
  const double m[3] = {0.5 * g.dr - 3.0 * g.dr / 24.0, 4.0 * g.dr / 24.0, -g.dr / 24.0};
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t j = o.J + k;
    const double rho = em * g.r[j], base = 2.0 * kPi * g.r[j];
    const double w = k == 0 ? base * m[0] : g.w[j] + base * m[k];
    o.energy[j] += w * pert.g(rho);
    o.pohozaev[j] += w * (pert.g(rho) + rho * pert.gprime(rho));
  }
  return o;
}
}  // namespace

std::vector<double> cumulative_charge(const RadialFunction& u) { return charge_profile(u.grid(), u.values()); }

double chern_simons(const RadialFunction& u) {
  const auto h = charge_profile(u.grid(), u.values());
  return cs_value(u.grid(), u.values(), h);
}

ExpIntegrals exp_integrals(const RadialFunction& u) {
  const RadialGrid& g = u.grid();
  ExpIntegrals e;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = u[i] * u[i];
    guard(x, i);
    const double F = exp_excess(x), em1 = std::expm1(x);
    e.I_F += g.w[i] * F;
    e.I_f += g.w[i] * x * em1;
    e.I_P += g.w[i] * (x * em1 - F);
  }
  return e;
}

ScaledEvaluation evaluate_scaled(const RadialFunction& v, double s, const Perturbation& pert, bool with_gradient) {
  const RadialGrid& g = v.grid();
  const auto& u = v.values();
  const std::size_t n = u.size();
  if (!(std::abs(s) < kOverflowGuard)) throw MagnitudeOverflow("dilation parameter |s| exceeds the overflow guard");
  const double es = std::exp(s), em = std::exp(-s), e2 = es * es, em2 = em * em;

  for (std::size_t i = 0; i < n; ++i) guard(es * es * u[i] * u[i], i);

  const double K = v.kinetic();
  const auto h = charge_profile(g, u);
  const double B = cs_value(g, u, h);

  const OriginLoad origin = origin_load(g, pert, s);
  double IF = 0.0, If = 0.0, IP = 0.0, pert_v = 0.0, pert_p = 0.0;
  ScaledEvaluation out;
  if (with_gradient) out.grad.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double ut = es * u[i];
    const double x = ut * ut;
    const double F = exp_excess(x), em1 = std::expm1(x);
    IF += g.w[i] * F;
    If += g.w[i] * x * em1;
    IP += g.w[i] * (x * em1 - F);
    const double rho = em * g.r[i];
    double load = g.w[i] * pert.g(rho), load_p = g.w[i] * (pert.g(rho) + rho * pert.gprime(rho));
    if (origin.active && i < origin.energy.size()) {
      load = origin.energy[i];
      load_p = origin.pohozaev[i];
    }
    pert_v += load * u[i];
    pert_p += load_p * u[i];
    if (with_gradient) out.grad[i] = -g.w[i] * em * ut * em1 - em * load;
  }
  if (pert.closed_form() && !pert.is_zero()) {
    for (double b : pert.breakpoints()) {
      if (origin.active && es * b < g.r[origin.J]) continue;
      const BreakCorrection c = break_correction(g, u, pert, es, b);
      if (!c.active) continue;
      pert_v += c.energy;
      pert_p += c.pohozaev;
      if (with_gradient)
        for (int k = 0; k < 6; ++k) out.grad[c.first + static_cast<std::size_t>(k)] -= em * c.coef[k];
    }
  }
  if (with_gradient) {
    add_kinetic_gradient(g, u, 0.5 * e2, out.grad);
    add_cs_gradient(g, u, h, 0.5 * e2, out.grad);
    for (std::size_t i = 0; i < n; ++i) out.grad[i] /= g.w[i];
  }

  EnergyBreakdown& E = out.energy;
  E.kinetic_half = 0.5 * e2 * K;
  E.chern_simons_half = 0.5 * e2 * B;
  E.exp_term = 0.5 * em2 * IF;
  E.perturb_term = em * pert_v;
  E.total = E.kinetic_half + E.chern_simons_half - E.exp_term - E.perturb_term;

  PohozaevValue& P = out.pohozaev;
  P.kinetic = e2 * K;
  P.chern_simons = e2 * B;
  P.exp_pohozaev = em2 * IP;
  P.perturb_pohozaev = em * pert_p;
  P.value = P.kinetic + P.chern_simons - P.exp_pohozaev + P.perturb_pohozaev;

  out.pairing = e2 * (K + 3.0 * B) - em2 * If - em * pert_v;
  out.mass = v.mass();
  out.kinetic = e2 * K;
  out.chern_simons = e2 * B;
  return out;
}

EnergyBreakdown energy(const RadialFunction& u, const Perturbation& g) {
  return evaluate_scaled(u, 0.0, g, false).energy;
}

PohozaevValue pohozaev(const RadialFunction& u, const Perturbation& g) {
  return evaluate_scaled(u, 0.0, g, false).pohozaev;
}

RadialFunction gradient(const RadialFunction& u, const Perturbation& g) {
  auto ev = evaluate_scaled(u, 0.0, g, true);
  return RadialFunction(u.grid_ptr(), std::move(ev.grad));
}

double perturbation_integral(const RadialFunction& u, const Perturbation& g) {
  return evaluate_scaled(u, 0.0, g, false).energy.perturb_term;
}

std::vector<double> perturbation_load(const GridPtr& grid, const Perturbation& g) {
  const auto ev = evaluate_scaled(RadialFunction::zeros(grid), 0.0, g, true);
  std::vector<double> l(grid->size());
  for (std::size_t i = 0; i < l.size(); ++i) l[i] = -ev.grad[i] * grid->w[i];
  return l;
}

double dual_pairing(const RadialFunction& u, const Perturbation& g) {
  return evaluate_scaled(u, 0.0, g, false).pairing;
}

double multiplier(const RadialFunction& u, const Perturbation& g) {
  const double m = u.mass();
  if (!(m > 0.0)) throw std::invalid_argument("multiplier: zero mass");
  const RadialFunction G = gradient(u, g);
  const auto& w = u.grid().w;
  double p = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) p += w[i] * G[i] * u[i];
  return -p / m;
}

double multiplier_explicit(const RadialFunction& u, const Perturbation& g) {
  const double m = u.mass();
  if (!(m > 0.0)) throw std::invalid_argument("multiplier: zero mass");
  return -dual_pairing(u, g) / m;
}

double energy_difference(const RadialFunction& a, const RadialFunction& b, const Perturbation& g) {
  const RadialGrid& G = a.grid();
  const auto& ua = a.values();
  const auto& ub = b.values();
  CompensatedSum s;
  s.add(0.5 * kinetic_difference(G, ua, ub));
  const auto ha = charge_profile(G, ua), hb = charge_profile(G, ub);
  for (std::size_t i = 1; i <= G.N; ++i) {
    const double ta = ua[i] * ha[i] / G.r[i], tb = ub[i] * hb[i] / G.r[i];
    s.add(0.5 * G.w[i] * (tb - ta) * (tb + ta));
  }
  if (g.closed_form() && !g.is_zero()) {
    for (double bp : g.breakpoints()) {
      const BreakCorrection ca = break_correction(G, ua, g, 1.0, bp), cb = break_correction(G, ub, g, 1.0, bp);
      if (ca.active) s.add(-(cb.energy - ca.energy));
    }
  }
  for (std::size_t i = 0; i < ua.size(); ++i) {
    const double xa = ua[i] * ua[i], xb = ub[i] * ub[i];
    guard(xb, i);
    s.add(-0.5 * G.w[i] * (exp_excess(xb) - exp_excess(xa)));
    s.add(-G.w[i] * g.g(G.r[i]) * (ub[i] - ua[i]));
  }
  return s.value();
}

double max_abs(const RadialFunction& u) {
  double m = 0.0;
  for (double x : u.values()) m = std::max(m, std::abs(x));
  return m;
}

void to_json(nlohmann::json& j, const EnergyBreakdown& e) {
  j = nlohmann::json{{"kinetic_half", e.kinetic_half},
                     {"chern_simons_half", e.chern_simons_half},
                     {"exp_term", e.exp_term},
                     {"perturb_term", e.perturb_term},
                     {"total", e.total}};
}

void to_json(nlohmann::json& j, const PohozaevValue& p) {
  j = nlohmann::json{{"value", p.value},
                     {"kinetic", p.kinetic},
                     {"chern_simons", p.chern_simons},
                     {"exp_pohozaev", p.exp_pohozaev},
                     {"perturb_pohozaev", p.perturb_pohozaev}};
}

void to_json(nlohmann::json& j, const ExpIntegrals& e) {
  j = nlohmann::json{{"I_F", e.I_F}, {"I_P", e.I_P}, {"I_f", e.I_f}};
}

}  // namespace csnorm
