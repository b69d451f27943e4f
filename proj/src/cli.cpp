#include "csnorm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "csnorm/constants.hpp"
#include "csnorm/errors.hpp"
#include "csnorm/inequality_suite.hpp"
#include "csnorm/minimizer.hpp"
#include "csnorm/mountain_pass.hpp"
#include "csnorm/perturbation.hpp"
#include "csnorm/radial.hpp"

namespace fs = std::filesystem;

namespace csnorm {

namespace {

const double kPi = 3.14159265358979323846;

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

void dump(const nlohmann::json& j, std::string& out, int indent) {
  const std::string pad(indent + 2, ' '), close(indent, ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + nlohmann::json(it.key()).dump() + ": ";
        dump(it.value(), out, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump(j[i], out, indent + 2);
      }
      out += "\n" + close + "]";
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

Perturbation load_g(const RunConfig& cfg) {
  if (cfg.g == "example") return Perturbation::example();
  if (cfg.g == "zero") return Perturbation::zero();
  try {
    return Perturbation::load_csv(cfg.g, cfg.g_tail_bound);
  } catch (const std::exception& e) {
    throw ConfigError("cannot load perturbation '" + cfg.g + "': " + e.what());
  }
}

void write_profile_csv(const PathProfile& p, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "t,energy,energy_grid,tau,kinetic,exp_term\n";
  for (const auto& r : p.rows)
    os << format_double(r.t) << ',' << format_double(r.energy) << ',' << format_double(r.energy_grid) << ','
       << format_double(r.tau) << ',' << format_double(r.kinetic) << ',' << format_double(r.exp_term) << '\n';
}

std::string n_label(double n) {
  std::ostringstream os;
  os << std::llround(n);
  return os.str();
}

struct Context {
  const RunConfig& cfg;
  std::ostream& log;
  Perturbation g;
  GridPtr grid;
  double c0 = 0.0;
};

// Conditions a local minimizer on S_c must meet.
nlohmann::json minimizer_checks(const SolverReport& r) {
  const bool neg = r.energy.total < 0.0;
  const bool lam = r.lambda > 0.0;
  const bool poh = std::abs(r.pohozaev.value) <= 1e-4 * (1.0 + r.kinetic);
  const bool reg = r.kinetic < r.s0;
  const bool pg = r.projected_gradient_norm <= 1e-6;
  return {{"converged", r.converged},
          {"energy_negative", neg},
          {"lambda_positive", lam},
          {"pohozaev_small", poh},
          {"kinetic_below_s0", reg},
          {"projected_gradient_small", pg},
          {"passed", r.converged && neg && lam && poh && reg && pg}};
}

SolverReport run_minimize(Context& ctx, double c, const fs::path& dir) {
  MinimizerOptions o;
  o.tol = ctx.cfg.tol;
  ctx.log << "minimize: c = " << format_double(c) << "\n";
  SolverReport r;
  try {
    r = minimize_local(c, ctx.g, ctx.grid, o);
  } catch (const OutOfRegime& e) {
    throw ConfigError(e.what());
  }
  nlohmann::json j = r;
  j["checks"] = minimizer_checks(r);
  write_json(j, (dir / "minimize.json").string());
  write_csv(r.u, (dir / "minimizer_profile.csv").string());
  ctx.log << "  phi = " << format_double(r.energy.total) << ", lambda = " << format_double(r.lambda)
          << ", converged = " << r.converged << "\n";
  return r;
}

struct MpassOutcome {
  nlohmann::json summary;
  bool passed = false;
};

MpassOutcome run_mpass(Context& ctx, const SolverReport& mr, const std::vector<double>& ns, const fs::path& dir) {
  const double m = mr.energy.total;
  const double ceiling = m + 2.0 * kPi;
  MpassOutcome out;
  nlohmann::json gaps = nlohmann::json::array();
  std::vector<double> gap_values;
  PathProfile main_profile;
  bool have_main = false;
  for (double n : ns) {
    ctx.log << "mpass: profile n = " << n_label(n) << "\n";
    const PathProfile p = path_energy_profile(mr.u, ctx.g, m, n);
    write_profile_csv(p, (dir / ("mpass_profile_n" + n_label(n) + ".csv")).string());
    gaps.push_back({{"n", n}, {"sup", p.sup}, {"gap", p.gap}, {"t_at_sup", p.t_at_sup}, {"t_hat", p.t_hat}});
    gap_values.push_back(p.gap);
    if (n == ctx.cfg.n) {
      main_profile = p;
      have_main = true;
    }
  }
  if (!have_main) {
    main_profile = path_energy_profile(mr.u, ctx.g, m, ctx.cfg.n);
    write_profile_csv(main_profile, (dir / ("mpass_profile_n" + n_label(ctx.cfg.n) + ".csv")).string());
  }
  bool gaps_positive = true, gaps_increasing = true;
  for (std::size_t i = 0; i < gap_values.size(); ++i) {
    gaps_positive = gaps_positive && gap_values[i] > 0.0;
    if (i) gaps_increasing = gaps_increasing && gap_values[i] > gap_values[i - 1];
  }

  nlohmann::json string_json;
  bool chain = false, saddle_ok = false;
  std::string failure;
  if (!main_profile.t_hat_grid_found) {
    failure = "no admissible endpoint with energy below 2m(c) on the Moser path";
  } else {
    ctx.log << "mpass: string method, " << ctx.cfg.images << " images\n";
    const PathState path = moser_path(mr.u, ctx.g, m, ctx.cfg.n, main_profile.t_hat_grid, ctx.cfg.images);
    const StringResult sr = string_method(path, ctx.g);
    save_path(sr.relaxed, (dir / "path").string());
    string_json = sr;
    const SaddleReport& s = sr.saddle;
    saddle_ok = s.converged && s.lambda > 0.0 && std::abs(s.pohozaev.value) <= 1e-3 * (1.0 + s.kinetic);
    const bool m_neg = m < 0.0, k_pos = sr.kappa_lower_bound > 0.0;
    const bool k_le_M = sr.kappa_lower_bound <= sr.M_estimate, M_lt = sr.M_estimate < ceiling;
    chain = m_neg && k_pos && k_le_M && M_lt;
    string_json["ordering"] = {{"m_negative", m_neg},
                               {"kappa_positive", k_pos},
                               {"kappa_le_M", k_le_M},
                               {"M_below_ceiling", M_lt},
                               {"passed", chain}};
    ctx.log << "  M_estimate = " << format_double(sr.M_estimate) << ", ceiling = " << format_double(ceiling)
            << "\n";
  }
  out.summary = {{"m_c", m},
                 {"ceiling", ceiling},
                 {"moser_gaps", gaps},
                 {"gaps_positive", gaps_positive},
                 {"gaps_increasing", gaps_increasing},
                 {"string", string_json},
                 {"saddle_passed", saddle_ok},
                 {"ordering_passed", chain}};
  if (!failure.empty()) out.summary["failure"] = failure;
  out.passed = gaps_positive && gaps_increasing && saddle_ok && chain;
  out.summary["passed"] = out.passed;
  write_json(out.summary, (dir / "mpass.json").string());
  return out;
}

ConstantsReport run_constants(Context& ctx, const std::vector<double>& masses, const fs::path& dir) {
  ctx.log << "constants\n";
  const ConstantsReport r = thresholds(ctx.g, masses);
  write_json(r, (dir / "constants.json").string());
  return r;
}

bool run_verify(Context& ctx, const fs::path& dir, nlohmann::json& summary) {
  ctx.log << "verify: assumptions and " << ctx.cfg.corpus << "-function corpus\n";
  const AssumptionReport a = check_assumptions(ctx.g, default_theta_grid(), default_sample_radii());
  const bool assumptions_ok = a.g1.passed && a.g2.passed && a.g3.passed && !a.g4_passing_thetas.empty();
  CorpusSpec spec;
  spec.count = ctx.cfg.corpus;
  spec.seed = ctx.cfg.seed;
  const SuiteReport rep = verify_corpus(spec, ctx.grid, ctx.g, 2.0 * kPi);
  write_records_csv(rep, (dir / "inequality_records.csv").string());
  nlohmann::json j = {{"assumptions", a}, {"assumptions_passed", assumptions_ok}, {"suite", rep}};
  // assumption failures are reported, not fatal (the example g fails G4 at its kink)
  j["passed"] = rep.passed;
  write_json(j, (dir / "verify.json").string());
  summary = {{"assumptions_passed", assumptions_ok},
             {"suite_passed", rep.passed},
             {"tm_empirical_max", rep.tm_empirical_max}};
  nlohmann::json per = nlohmann::json::array();
  for (const auto& s : rep.summary)
    per.push_back({{"id", s.id}, {"failures", s.failures}, {"skipped", s.skipped}, {"min_slack", s.min_slack}});
  summary["inequalities"] = per;
  ctx.log << "  suite " << (rep.passed ? "passed" : "FAILED") << "\n";
  return rep.passed;
}

}  // namespace

void validate(const RunConfig& cfg) {
  static const std::vector<std::string> modes = {"constants", "verify", "minimize", "mpass", "full"};
  if (std::find(modes.begin(), modes.end(), cfg.mode) == modes.end()) throw ConfigError("unknown mode: " + cfg.mode);
  if (cfg.c && !(*cfg.c > 0.0 && *cfg.c <= 2.0 * kPi)) throw ConfigError("c must lie in (0, 2pi]");
  if (!(cfg.c_frac > 0.0 && cfg.c_frac < 1.0)) throw ConfigError("c-frac must lie in (0, 1)");
  for (double f : cfg.c_fracs)
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("c-fracs entries must lie in (0, 1)");
  if (cfg.c_fracs.empty()) throw ConfigError("c-fracs must not be empty");
  if (!(cfg.R > 0.0) || !std::isfinite(cfg.R) || cfg.N < 16) throw ConfigError("grid needs R > 0 and N >= 16");
  if (cfg.corpus < 1) throw ConfigError("corpus must be positive");
  if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
  if (!(cfg.n > 1.0)) throw ConfigError("n must exceed 1");
  if (cfg.images < 3) throw ConfigError("images must be at least 3");
  if (cfg.g_tail_bound < 0.0) throw ConfigError("g-tail-bound must be nonnegative");
  for (double n : cfg.moser_n)
    if (!(n > 1.0)) throw ConfigError("moser-n entries must exceed 1");
}

std::string canonical(const RunConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["mode"] = cfg.mode;
  kv["c"] = cfg.c ? format_double(*cfg.c) : "";
  kv["c-frac"] = format_double(cfg.c_frac);
  kv["c-fracs"] = join(cfg.c_fracs);
  kv["g"] = cfg.g;
  kv["g-tail-bound"] = format_double(cfg.g_tail_bound);
  kv["grid"] = format_double(cfg.R) + "," + std::to_string(cfg.N);
  kv["seed"] = std::to_string(cfg.seed);
  kv["corpus"] = std::to_string(cfg.corpus);
  kv["tol"] = format_double(cfg.tol);
  kv["n"] = format_double(cfg.n);
  kv["images"] = std::to_string(cfg.images);
  kv["moser-n"] = join(cfg.moser_n);
  std::string s;
  for (const auto& [k, v] : kv) s += k + "=" + v + "\n";
  return s;
}

std::string resolve_output_dir(const RunConfig& cfg) {
  if (!cfg.out.empty()) return cfg.out;
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  return "csnorm_out";
}

std::string dump_json(const nlohmann::json& j) {
  std::string s;
  dump(j, s, 0);
  s += "\n";
  return s;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << dump_json(j);
}

int run(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  Context ctx{cfg, log, load_g(cfg), nullptr, 0.0};
  ctx.grid = (cfg.R == kReferenceR && cfg.N == kReferenceN) ? reference_grid() : build_grid(cfg.R, cfg.N);
  const fs::path dir = resolve_output_dir(cfg);
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "config.txt");
    os << canonical(cfg);
  }
  ctx.c0 = thresholds(ctx.g).c0;

  std::vector<double> masses;
  if (cfg.c)
    masses = {*cfg.c};
  else if (cfg.mode == "full")
    for (double f : cfg.c_fracs) masses.push_back(f * ctx.c0);
  else
    masses = {cfg.c_frac * ctx.c0};

  if (cfg.mode == "constants") {
    run_constants(ctx, masses, dir);
    return kExitOk;
  }
  if (cfg.mode == "verify") {
    nlohmann::json s;
    return run_verify(ctx, dir, s) ? kExitOk : kExitFailure;
  }
  if (cfg.mode == "minimize") {
    const SolverReport r = run_minimize(ctx, masses[0], dir);
    return r.converged ? kExitOk : kExitFailure;
  }
  if (cfg.mode == "mpass") {
    const SolverReport r = run_minimize(ctx, masses[0], dir);
    if (!r.converged) return kExitFailure;
    const MpassOutcome m = run_mpass(ctx, r, {cfg.n}, dir);
    return m.summary.value("saddle_passed", false) ? kExitOk : kExitFailure;
  }

  // full: constants, verification, then both theorem pipelines per mass.
  const ConstantsReport th = run_constants(ctx, masses, dir);
  nlohmann::json verify_summary;
  const bool verified = run_verify(ctx, dir, verify_summary);
  nlohmann::json per_mass = nlohmann::json::array();
  bool all = verified;
  for (std::size_t k = 0; k < masses.size(); ++k) {
    const fs::path sub = dir / ("mass_" + std::to_string(k));
    fs::create_directories(sub);
    const SolverReport r = run_minimize(ctx, masses[k], sub);
    const nlohmann::json checks = minimizer_checks(r);
    nlohmann::json entry = {{"c", masses[k]},
                            {"c_over_c0", masses[k] / ctx.c0},
                            {"m_c", r.energy.total},
                            {"lambda", r.lambda},
                            {"pohozaev", r.pohozaev.value},
                            {"kinetic", r.kinetic},
                            {"s0", r.s0},
                            {"local_minimizer", checks}};
    bool ok = checks["passed"].get<bool>();
    if (r.converged) {
      const MpassOutcome m = run_mpass(ctx, r, cfg.moser_n, sub);
      entry["mountain_pass"] = m.summary;
      entry["mountain_pass"].erase("string");
      if (m.summary.contains("string") && !m.summary["string"].is_null()) {
        const auto& s = m.summary["string"];
        entry["mountain_pass"]["M_estimate"] = s["M_estimate"];
        entry["mountain_pass"]["kappa_lower_bound"] = s["kappa_lower_bound"];
        entry["mountain_pass"]["saddle"] = s["saddle"];
        entry["mountain_pass"]["ordering"] = s["ordering"];
      }
      ok = ok && m.passed;
    } else {
      entry["mountain_pass"] = {{"passed", false}, {"failure", "minimizer did not converge"}};
      ok = false;
    }
    entry["passed"] = ok;
    all = all && ok;
    per_mass.push_back(entry);
  }
  const nlohmann::json summary = {{"config", canonical(cfg)},
                                  {"c0", th.c0},
                                  {"c1", th.c1},
                                  {"c2", th.c2},
                                  {"C4", th.C4},
                                  {"verify", verify_summary},
                                  {"masses", per_mass},
                                  {"passed", all}};
  write_json(summary, (dir / "full_summary.json").string());
  log << "full: " << (all ? "all checks passed" : "some checks FAILED (see full_summary.json)") << "\n";
  return all ? kExitOk : kExitFailure;
}

}  // namespace csnorm
