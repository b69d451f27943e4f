#include "csnorm/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "csnorm/numerics.hpp"

namespace csnorm {

double radial_area_integral(const std::function<double(double)>& f, double a, double b, double tol) {
  using boost::math::quadrature::gauss_kronrod;
  auto h = [&](double r) { return 2.0 * kPi * r * f(r); };
  if (std::isinf(b)) {
    // slowly decaying algebraic tails defeat Gauss-Kronrod on a mapped interval
    boost::math::quadrature::exp_sinh<double> es;
    auto shifted = [&](double x) { return h(a + x); };
    return es.integrate(shifted, tol);
  }
  return gauss_kronrod<double, 31>::integrate(h, a, b, 25, tol);
}

Perturbation::Perturbation(std::string name, Profile g, Profile gprime, std::vector<double> breakpoints,
                           bool closed_form)
    : name_(std::move(name)), g_(std::move(g)), gp_(std::move(gprime)), breaks_(std::move(breakpoints)),
      closed_form_(closed_form) {
  std::sort(breaks_.begin(), breaks_.end());
  compute_norms();
}

Perturbation Perturbation::example() {
  static const Perturbation cached = [] {
  auto g = [](double r) { return r <= 1.0 ? 0.5 : 1.0 / (r * r + 1.0); };
  auto gp = [](double r) {
    if (r <= 1.0) return 0.0;
    const double d = r * r + 1.0;
    return -2.0 * r / (d * d);
  };
  return Perturbation("example", g, gp, {1.0}, true);
  }();
  return cached;
}

Perturbation Perturbation::zero() {
  Perturbation p;
  p.name_ = "zero";
  p.zero_ = true;
  p.closed_form_ = true;
  return p;
}

Perturbation Perturbation::probe_increasing() {
  auto g = [](double r) { return r * r * std::exp(-r); };
  auto gp = [](double r) { return (2.0 * r - r * r) * std::exp(-r); };
  return Perturbation("probe_r2_exp", g, gp, {2.0}, true);
}

Perturbation Perturbation::from_samples(std::vector<double> r, std::vector<double> g, std::vector<double> gprime,
                                        double tail_bound) {
  if (r.size() < 2 || g.size() != r.size() || gprime.size() != r.size())
    throw std::invalid_argument("perturbation samples: need at least two consistent rows");
  for (std::size_t i = 1; i < r.size(); ++i)
    if (!(r[i] > r[i - 1])) throw std::invalid_argument("perturbation samples: radii must increase");
  if (r.front() < 0.0) throw std::invalid_argument("perturbation samples: negative radius");
  auto rr = std::make_shared<std::vector<double>>(std::move(r));
  auto lerp = [rr](const std::vector<double>& y, double x) {
    const auto& R = *rr;
    if (x > R.back()) return 0.0;
    if (x <= R.front()) return y.front();
    const auto it = std::upper_bound(R.begin(), R.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - R.begin()) - 1;
    const double f = (x - R[i]) / (R[i + 1] - R[i]);
    return (1.0 - f) * y[i] + f * y[i + 1];
  };
  auto gs = std::make_shared<std::vector<double>>(std::move(g));
  auto gps = std::make_shared<std::vector<double>>(std::move(gprime));
  Perturbation p("sampled", [lerp, gs](double x) { return lerp(*gs, x); },
                 [lerp, gps](double x) { return lerp(*gps, x); }, *rr, false);
  p.tail_bound_ = tail_bound;
  p.compute_norms();
  return p;
}

Perturbation Perturbation::load_csv(const std::string& path, double tail_bound) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(f, line);
  if (line.rfind("r,g,gprime", 0) != 0) throw std::invalid_argument(path + ": expected header r,g,gprime");
  std::vector<double> r, g, gp;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b, c;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    std::getline(ss, c, ',');
    r.push_back(std::stod(a));
    g.push_back(std::stod(b));
    gp.push_back(std::stod(c));
  }
  Perturbation p = from_samples(std::move(r), std::move(g), std::move(gp), tail_bound);
  p.name_ = path;
  return p;
}

void Perturbation::compute_norms() {
  if (zero_) return;
  // Pieces between breakpoints; the last piece runs to +∞ for closed forms and
  // stops at the last sample for sampled profiles.
  std::vector<double> cuts{0.0};
  for (double b : breaks_)
    if (b > cuts.back()) cuts.push_back(b);
  const double inf = std::numeric_limits<double>::infinity();
  auto sum = [&](const std::function<double(double)>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (closed_form_) {
        s += radial_area_integral(f, cuts[i], cuts[i + 1], 1e-13);
      } else {
        // Sampled rows are linear in between; adaptive refinement only chases
        // roundoff there, so a fixed rule per row interval is enough.
        const double a = cuts[i], b = cuts[i + 1];
        s += boost::math::quadrature::gauss<double, 20>::integrate(
            [&](double r) { return 2.0 * kPi * r * f(r); }, a, b);
      }
    }
    if (closed_form_) s += radial_area_integral(f, cuts.back(), inf, 1e-13);
    return s;
  };
  const double i43 = sum([this](double r) { return std::pow(std::abs(g_(r)), 4.0 / 3.0); });
  const double i43rd = sum([this](double r) { return std::pow(std::abs(r * gp_(r)), 4.0 / 3.0); });
  norm2sq_ = sum([this](double r) { return g_(r) * g_(r); });
  norm43_ = std::pow(i43 + tail_bound_, 0.75);
  norm43_rd_ = std::pow(i43rd, 0.75);
}

std::vector<double> default_theta_grid() {
  std::vector<double> t;
  for (int k = 1; k <= 9; ++k) t.push_back(0.1 * k);
  return t;
}

std::vector<double> default_sample_radii(std::size_t count) {
  std::vector<double> r(count);
  for (std::size_t i = 0; i < count; ++i)
    r[i] = std::pow(10.0, -3.0 + 6.0 * static_cast<double>(i) / static_cast<double>(count - 1));
  return r;
}

namespace {

void record(AssumptionCheck& c, double violation, double r) {
  if (violation > c.worst_violation) {
    c.worst_violation = violation;
    c.witness_r = r;
  }
}

void finish(AssumptionCheck& c, bool symbolic_holds) {
  c.passed = c.worst_violation <= 0.0;
  c.symbolic = symbolic_holds && c.passed;
  if (!c.passed)
    c.verdict = "violated";
  else
    c.verdict = c.symbolic ? "holds" : "no violation found";
}

}  // namespace

AssumptionReport check_assumptions(const Perturbation& g, const std::vector<double>& thetas,
                                   const std::vector<double>& radii) {
  AssumptionReport rep;
  rep.perturbation = g.name();
  rep.sample_radii = radii;
  rep.g1.id = "G1";
  rep.g2.id = "G2";
  rep.g3.id = "G3";
  for (double r : radii) {
    const double gv = g.g(r), gp = g.gprime(r);
    record(rep.g1, -gv, r);
    record(rep.g2, -(2.0 * gv + r * gp), r);
    // nonincreasing: a positive derivative or an increase to the next sample
    record(rep.g3, gp, r);
  }
  for (std::size_t i = 0; i + 1 < radii.size(); ++i)
    record(rep.g3, g.g(radii[i + 1]) - g.g(radii[i]), radii[i]);

  // The shipped example is settled by sign arguments: g ≥ 0, 2g + r g′ equals 1
  // on [0,1] and 2/(r²+1)² beyond, and g′ ≤ 0.
  const bool example = g.name() == "example" || g.is_zero();
  finish(rep.g1, example);
  finish(rep.g2, example);
  finish(rep.g3, example);

  for (double th : thetas) {
    ThetaCheck tc;
    tc.theta = th;
    // Kinks at b make the window (b, b/θ) the likeliest place for a violation,
    // and it is too narrow for a coarse log grid when θ is near 1.
    std::vector<double> rs = radii;
    for (double b : g.breakpoints())
      for (int k = 1; k < 64; ++k) rs.push_back(b * (1.0 + (1.0 / th - 1.0) * k / 64.0));
    for (double r : rs) {
      const double lhs = g.g(r) - g.g(th * r);
      const double rhs = (1.0 - th) * g.radial_moment(r);
      const double v = lhs - rhs;
      if (v > tc.worst_violation) {
        tc.worst_violation = v;
        tc.witness_r = r;
      }
    }
    tc.passed = tc.worst_violation <= 0.0;
    if (tc.passed) rep.g4_passing_thetas.push_back(th);
    rep.g4.push_back(tc);
  }
  if (rep.g3.passed)
    for (double r : radii)
      if (g.radial_moment(r) > 0.0) rep.radial_moment_nonpositive = false;
  return rep;
}

void to_json(nlohmann::json& j, const AssumptionReport& r) {
  auto one = [](const AssumptionCheck& c) {
    return nlohmann::json{{"id", c.id},
                          {"passed", c.passed},
                          {"symbolic", c.symbolic},
                          {"verdict", c.verdict},
                          {"worst_violation", c.worst_violation},
                          {"witness_r", c.witness_r}};
  };
  nlohmann::json g4 = nlohmann::json::array();
  for (const auto& t : r.g4)
    g4.push_back({{"theta", t.theta},
                  {"passed", t.passed},
                  {"worst_violation", t.worst_violation},
                  {"witness_r", t.witness_r}});
  j = nlohmann::json{{"perturbation", r.perturbation},
                     {"sample_count", r.sample_radii.size()},
                     {"sample_r_min", r.sample_radii.empty() ? 0.0 : r.sample_radii.front()},
                     {"sample_r_max", r.sample_radii.empty() ? 0.0 : r.sample_radii.back()},
                     {"G1", one(r.g1)},
                     {"G2", one(r.g2)},
                     {"G3", one(r.g3)},
                     {"G4", {{"per_theta", g4}, {"passing_thetas", r.g4_passing_thetas}}},
                     {"radial_moment_nonpositive", r.radial_moment_nonpositive}};
}

}  // namespace csnorm
