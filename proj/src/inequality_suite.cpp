#include "csnorm/inequality_suite.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "csnorm/constants.hpp"
#include "csnorm/errors.hpp"
#include "csnorm/functionals.hpp"
#include "csnorm/mountain_pass.hpp"

namespace csnorm {

namespace {

const double kPi = 3.14159265358979323846;

// Separate stream for the hypothesis targets so that the corpus itself does
// not depend on how many targets are drawn per function.
constexpr std::uint64_t kTargetStream = 0x9e3779b97f4a7c15ULL;

std::string make_id(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%03d", prefix, i);
  return buf;
}

RadialFunction gaussian_mixture(CorpusRng& rng, const GridPtr& grid) {
  const int m = 1 + rng.below(3);
  std::vector<double> a(m), mu(m), sigma(m);
  for (int j = 0; j < m; ++j) {
    a[j] = rng.uniform(0.2, 1.5) * (rng.uniform() < 0.25 ? -1.0 : 1.0);
    mu[j] = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 3.0);
    sigma[j] = rng.uniform(0.25, 1.5);
  }
  std::vector<double> u(grid->size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
      const double z = (grid->r[i] - mu[j]) / sigma[j];
      s += a[j] * std::exp(-0.5 * z * z);
    }
    u[i] = s;
  }
  return RadialFunction(grid, std::move(u));
}

RadialFunction bumps(CorpusRng& rng, const GridPtr& grid) {
  const int m = 1 + rng.below(3);
  std::vector<double> a(m), mu(m), w(m);
  for (int j = 0; j < m; ++j) {
    a[j] = rng.uniform(0.2, 1.5);
    mu[j] = rng.uniform(0.0, 3.0);
    w[j] = rng.uniform(0.15, 1.5);
  }
  std::vector<double> u(grid->size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += a[j] * std::max(0.0, 1.0 - std::abs(grid->r[i] - mu[j]) / w[j]);
    u[i] = s;
  }
  return RadialFunction(grid, std::move(u));
}

RadialFunction scaled_moser(CorpusRng& rng, const GridPtr& grid) {
  const double n = 2.0 * std::pow(250.0, rng.uniform());
  const double ell = rng.uniform(0.3, 3.0);
  const double a = rng.uniform(0.3, 2.0);
  std::vector<double> u(grid->size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = a * moser_value(n, grid->r[i] / ell);
  return RadialFunction(grid, std::move(u));
}

// β(v,s) with ‖β‖₂² = c and ‖∇β‖₂² = K. Amplitude fixes the mass and the gauge
// dilation fixes the kinetic term, so targets far below the grid resolution
// are reached without resampling.
ScaledState to_mass_kinetic(const RadialFunction& u, double c, double K) {
  const RadialFunction v = u.with_mass(c);
  return {v, 0.5 * std::log(K / v.kinetic())};
}

InequalityRecord make_record(const std::string& id, const std::string& fid, double lhs, double rhs, double tol,
                             double mass, double kinetic) {
  InequalityRecord r;
  r.id = id;
  r.function_id = fid;
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.tolerance = tol;
  r.mass = mass;
  r.kinetic = kinetic;
  if (!std::isfinite(r.slack)) {
    r.skipped = true;
    r.note = "non-finite side";
    r.passed = true;
    return r;
  }
  r.passed = r.slack >= -tol;
  return r;
}

InequalityRecord skipped(const std::string& id, const std::string& fid, const std::string& why) {
  InequalityRecord r;
  r.id = id;
  r.function_id = fid;
  r.skipped = true;
  r.passed = true;
  r.note = why;
  return r;
}

const std::vector<std::string> kIds = {"GN4",  "radial_decay", "cs_by_quartic",    "quartic_by_cs",          "cs_by_kinetic", "even_moment_3",
                                       "even_moment_4", "even_moment_5",       "exp_IF", "exp_IP",       "TM",  "kinetic_coercivity",
                                       "coercivity_quarter",           "energy_lower_bound"};

struct Targets {
  double kinetic_exp = 0.0;  // kinetic for the exponential-moment bounds
  double mass = 0.0;         // mass for the coercivity and lower-bound checks
  double kinetic_lower_bound = 0.0;
};

std::vector<InequalityRecord> verify_function(const CorpusFunction& f, const Targets& t,
                                              const SuiteTolerances& tol, double C4) {
  std::vector<InequalityRecord> out;
  const RadialFunction& u = f.u;
  const double c = u.mass(), K = u.kinetic();
  if (!(c > 0.0) || !(K > 0.0)) {
    for (const auto& id : kIds) out.push_back(skipped(id, f.id, "zero function: hypothesis scaling impossible"));
    return out;
  }
  const double Q = u.quartic(), B = chern_simons(u);

  out.push_back(make_record("GN4", f.id, Q, std::pow(C4, 4) * c * K, tol.algebraic, c, K));

  double decay = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u.grid().r[i] >= 1.0) decay = std::max(decay, std::abs(u[i]) * std::sqrt(kPi * u.grid().r[i]));
  out.push_back(make_record("radial_decay", f.id, decay, std::pow(c * K, 0.25), tol.quadrature, c, K));

  out.push_back(make_record("cs_by_quartic", f.id, B, c * Q / (16.0 * kPi), tol.algebraic, c, K));
  out.push_back(make_record("quartic_by_cs", f.id, Q, 4.0 * std::sqrt(K * B), tol.algebraic, c, K));
  out.push_back(make_record("cs_by_kinetic", f.id, B, K * c * c / (16.0 * kPi * kPi), tol.algebraic, c, K));

  // Moment and exponential-moment bounds at kinetic below π.
  const RadialFunction w = u.scaled(std::sqrt(t.kinetic_exp / K));
  const double cw = w.mass(), Kw = w.kinetic(), Qw = w.quartic();
  for (int k = 3; k <= 5; ++k) {
    std::vector<double> p(w.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::pow(w[i] * w[i], k);
    const double lhs = w.grid().integrate(p);
    const double kf = std::tgamma(k + 1.0);
    const double rhs = (2.0 + std::pow(2.0, 2 * k - 1) * (k - 2)) / ((k - 2) * std::pow(kPi, k - 1)) *
                           std::pow(cw * Kw, 0.5 * k) +
                       kf / (2.0 * std::pow(kPi, k - 1)) * std::pow(Kw, k);
    out.push_back(make_record("even_moment_" + std::to_string(k), f.id, lhs, rhs, tol.quadrature, cw, Kw));
  }
  try {
    const ExpIntegrals e = exp_integrals(w);
    const double arg = std::sqrt(cw * Kw) / kPi;
    const double pre = 2.0 * std::pow(cw, 1.5) * std::pow(Kw, 1.5) / (kPi * kPi);
    const double rF = 0.5 * Qw + std::pow(Kw, 3) / (2.0 * kPi * (kPi - Kw)) + pre * zeta(arg);
    const double rP = 0.5 * Qw + (2.0 * kPi - Kw) * std::pow(Kw, 3) / (2.0 * kPi * std::pow(kPi - Kw, 2)) +
                      pre * zeta_pohozaev(arg);
    out.push_back(make_record("exp_IF", f.id, e.I_F, rF, tol.quadrature, cw, Kw));
    out.push_back(make_record("exp_IP", f.id, e.I_P, rP, tol.quadrature, cw, Kw));
  } catch (const MagnitudeOverflow&) {
    out.push_back(skipped("exp_IF", f.id, "exponential overflow guard"));
    out.push_back(skipped("exp_IP", f.id, "exponential overflow guard"));
  }

  // Trudinger–Moser at ‖∇u‖₂² = 1 and ‖u‖₂ = 1; rhs is filled in later with
  // the corpus maximum. ∫(e^{αβ²}−1)dx = e^{−2s}∫(e^{αe^{2s}v²}−1)dy.
  {
    const ScaledState st = to_mass_kinetic(u, 1.0, 1.0);
    const double e2 = std::exp(2.0 * st.s);
    std::vector<double> p(st.v.size());
    bool ok = true;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double a = tol.tm_alpha * e2 * st.v[i] * st.v[i];
      if (a > kOverflowGuard) ok = false;
      p[i] = std::expm1(a);
    }
    if (ok)
      out.push_back(make_record("TM", f.id, st.v.grid().integrate(p) / e2, 0.0, tol.quadrature, st.v.mass(),
                                e2 * st.v.kinetic()));
    else
      out.push_back(skipped("TM", f.id, "exponential overflow guard"));
  }

  // Coercivity chain K + B − ½‖u‖₄⁴ ≥ (1 − c/4π)²K ≥ K/4 at mass c ≤ 2π.
  {
    const RadialFunction v = u.with_mass(t.mass);
    const double cv = v.mass(), Kv = v.kinetic(), Bv = chern_simons(v);
    const double factor = std::pow(1.0 - cv / (4.0 * kPi), 2);
    out.push_back(make_record("kinetic_coercivity", f.id, factor * Kv, Kv + Bv - 0.5 * v.quartic(), tol.algebraic, cv, Kv));
    out.push_back(make_record("coercivity_quarter", f.id, 0.25 * Kv, factor * Kv, tol.algebraic, cv, Kv));
  }
  return out;
}

}  // namespace

double CorpusRng::log_uniform(double a, double b) { return a * std::pow(b / a, uniform()); }

double CorpusRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

CorpusFamily parse_family(const std::string& name) {
  if (name == "mixed") return CorpusFamily::Mixed;
  if (name == "gaussian") return CorpusFamily::GaussianMixture;
  if (name == "bumps") return CorpusFamily::Bumps;
  if (name == "moser") return CorpusFamily::Moser;
  throw std::invalid_argument("unknown corpus family: " + name);
}

std::string family_name(CorpusFamily f) {
  switch (f) {
    case CorpusFamily::Mixed: return "mixed";
    case CorpusFamily::GaussianMixture: return "gaussian";
    case CorpusFamily::Bumps: return "bumps";
    case CorpusFamily::Moser: return "moser";
  }
  return "mixed";
}

std::vector<CorpusFunction> make_corpus(const CorpusSpec& spec, const GridPtr& grid) {
  if (spec.count < 0) throw std::invalid_argument("corpus count must be nonnegative");
  CorpusRng rng(spec.seed);
  std::vector<CorpusFunction> out;
  out.reserve(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    CorpusFamily fam = spec.family;
    if (fam == CorpusFamily::Mixed) fam = static_cast<CorpusFamily>(1 + i % 3);
    CorpusFunction f;
    f.family = family_name(fam);
    switch (fam) {
      case CorpusFamily::GaussianMixture:
        f.id = make_id("gm", i);
        f.u = gaussian_mixture(rng, grid);
        break;
      case CorpusFamily::Bumps:
        f.id = make_id("pl", i);
        f.u = bumps(rng, grid);
        break;
      default:
        f.id = make_id("ms", i);
        f.u = scaled_moser(rng, grid);
        break;
    }
    out.push_back(std::move(f));
  }
  return out;
}

double zeta_pohozaev(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("zeta_pohozaev: t must be finite and nonnegative");
  // p_k = t^k/(k+3)!, q_k = 4^{k+2} p_k; term_k = (k+2)(q_k + p_k/(k+1))
  double p = 1.0 / 6.0, q = 16.0 / 6.0, sum = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double term = (k + 2) * (q + p / (k + 1));
    sum += term;
    if (term < 1e-17 * sum && 4.0 * t < k + 4) break;
    p *= t / (k + 4);
    q *= 4.0 * t / (k + 4);
  }
  return sum;
}

std::vector<InequalityRecord> verify_energy_lower_bound(double c, const Perturbation& g,
                                                   const std::vector<CorpusFunction>& corpus,
                                                   const std::vector<double>& kinetic_targets, double C4,
                                                   double tol) {
  if (!(c > 0.0) || c > 2.0 * kPi) throw std::invalid_argument("energy lower bound needs 0 < c <= 2pi");
  const double gn = g.norm_43();
  const double s0 = s_0(c, C4, gn);
  std::vector<InequalityRecord> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const CorpusFunction& f = corpus[i];
    const double target = kinetic_targets.at(i % kinetic_targets.size());
    if (!(target > 0.0) || !(f.u.mass() > 0.0) || !(f.u.kinetic() > 0.0)) {
      out.push_back(skipped("energy_lower_bound", f.id, "zero kinetic: u is not in S_c"));
      continue;
    }
    const ScaledState st = to_mass_kinetic(f.u, c, target);
    double phi = 0.0, K = 0.0, mass = 0.0;
    try {
      const ScaledEvaluation ev = evaluate_scaled(st.v, st.s, g, false);
      phi = ev.energy.total;
      K = ev.kinetic;
      mass = ev.mass;
    } catch (const MagnitudeOverflow&) {
      out.push_back(skipped("energy_lower_bound", f.id, "exponential overflow guard"));
      continue;
    }
    if (K > kPi / 3.0 * (1.0 + 1e-12)) {
      out.push_back(skipped("energy_lower_bound", f.id, "kinetic above pi/3 after scaling"));
      continue;
    }
    out.push_back(make_record("energy_lower_bound", f.id, K * h_tilde(c, K, C4, gn), phi, tol, mass, K));
    if (target == s0) {
      // Φ > 0 on the boundary kinetic = s₀, via the positive lower bound s₀h̃_c(s₀)
      InequalityRecord r = make_record("boundary_positive", f.id, 0.0, phi, 0.0, mass, K);
      r.passed = phi > 0.0;
      out.push_back(r);
    }
  }
  return out;
}

SuiteReport verify_corpus(const CorpusSpec& spec, const GridPtr& grid, const Perturbation& g, double c_cap,
                          const SuiteTolerances& tol) {
  if (!(c_cap > 0.0) || c_cap > 2.0 * kPi) throw std::invalid_argument("c_cap must lie in (0, 2pi]");
  if (!(tol.kinetic_cap > 0.0) || tol.kinetic_cap >= kPi) throw std::invalid_argument("kinetic cap must lie in (0, pi)");
  const double C4 = gn_sharp_constant();
  const auto corpus = make_corpus(spec, grid);
  CorpusRng rng(spec.seed ^ kTargetStream);

  SuiteReport rep;
  rep.seed = spec.seed;
  rep.corpus_size = spec.count;
  rep.c_cap = c_cap;
  for (const auto& f : corpus) {
    Targets t;
    t.kinetic_exp = tol.kinetic_cap * rng.uniform(0.05, 1.0);
    t.mass = rng.log_uniform(1e-8, c_cap);
    t.kinetic_lower_bound = kPi / 3.0 * rng.uniform(0.02, 1.0);
    auto recs = verify_function(f, t, tol, C4);
    auto lb = verify_energy_lower_bound(t.mass, g, {f}, {t.kinetic_lower_bound}, C4, tol.quadrature);
    recs.insert(recs.end(), lb.begin(), lb.end());
    for (auto& r : recs) rep.records.push_back(std::move(r));
  }

  double tm_max = 0.0;
  for (const auto& r : rep.records)
    if (r.id == "TM" && !r.skipped) tm_max = std::max(tm_max, r.lhs);
  rep.tm_empirical_max = tm_max;
  for (auto& r : rep.records)
    if (r.id == "TM" && !r.skipped) {
      r.rhs = tm_max;
      r.slack = tm_max - r.lhs;
      r.passed = std::isfinite(r.lhs);
    }

  std::map<std::string, InequalitySummary> by_id;
  for (const auto& r : rep.records) {
    auto& s = by_id[r.id];
    if (s.records == 0) {
      s.id = r.id;
      s.min_slack = std::numeric_limits<double>::infinity();
    }
    ++s.records;
    if (r.skipped) {
      ++s.skipped;
      continue;
    }
    if (!r.passed) ++s.failures;
    if (r.slack < s.min_slack) {
      s.min_slack = r.slack;
      s.witness = r.function_id;
    }
  }
  rep.passed = true;
  for (const auto& id : kIds) {
    auto it = by_id.find(id);
    if (it == by_id.end()) continue;
    if (it->second.failures > 0) rep.passed = false;
    rep.summary.push_back(it->second);
  }
  rep.notes.push_back("exponential-moment bounds evaluated with kinetic scaled into (0, " +
                      format_double(tol.kinetic_cap) + "], strictly below pi");
  rep.notes.push_back("Trudinger-Moser check at alpha = " + format_double(tol.tm_alpha) +
                      " with mass and kinetic 1 is a boundedness check; empirical max " + format_double(tm_max));
  return rep;
}

void write_records_csv(const SuiteReport& r, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "id,function_id,lhs,rhs,slack,tolerance,mass,kinetic,passed,skipped,note\n";
  for (const auto& x : r.records)
    os << x.id << ',' << x.function_id << ',' << format_double(x.lhs) << ',' << format_double(x.rhs) << ','
       << format_double(x.slack) << ',' << format_double(x.tolerance) << ',' << format_double(x.mass) << ','
       << format_double(x.kinetic) << ',' << (x.passed ? 1 : 0) << ',' << (x.skipped ? 1 : 0) << ',' << x.note
       << '\n';
}

void to_json(nlohmann::json& j, const InequalityRecord& r) {
  j = {{"id", r.id},           {"function_id", r.function_id}, {"lhs", r.lhs},         {"rhs", r.rhs},
       {"slack", r.slack},     {"tolerance", r.tolerance},     {"mass", r.mass},       {"kinetic", r.kinetic},
       {"passed", r.passed},   {"skipped", r.skipped},         {"note", r.note}};
}

void to_json(nlohmann::json& j, const SuiteReport& r) {
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& s : r.summary)
    summary.push_back({{"id", s.id},
                       {"records", s.records},
                       {"failures", s.failures},
                       {"skipped", s.skipped},
                       {"min_slack", s.min_slack},
                       {"witness", s.witness}});
  j = {{"seed", r.seed},
       {"corpus_size", r.corpus_size},
       {"c_cap", r.c_cap},
       {"passed", r.passed},
       {"tm_empirical_max", r.tm_empirical_max},
       {"summary", summary},
       {"notes", r.notes},
       {"records", r.records}};
}

}  // namespace csnorm
