// Command-line entry point: csnorm <constants|verify|minimize|mpass|full> [flags]
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "csnorm/cli.hpp"

namespace {

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw csnorm::ConfigError(std::string("bad ") + what + " entry: " + item);
    }
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  csnorm::RunConfig cfg;
  CLI::App app{"Radial-grid toolkit for normalized Chern-Simons-Schrodinger solutions"};
  app.set_config("--config", "", "key=value configuration file; flags override it");
  app.require_subcommand(1, 1);
  app.fallthrough();
  for (const char* m : {"constants", "verify", "minimize", "mpass", "full"}) app.add_subcommand(m, "");
  app.get_subcommand("constants")->description("thresholds c1, c2, c0, s0 and the GN constant");
  app.get_subcommand("verify")->description("assumptions on g and the inequality corpus");
  app.get_subcommand("minimize")->description("local minimizer on S_c");
  app.get_subcommand("mpass")->description("Moser path and string-method saddle");
  app.get_subcommand("full")->description("all stages; exit 0 only if every check passes");

  double c = 0.0;
  std::string grid, c_fracs, moser_n;
  auto* c_opt = app.add_option("--c", c, "mass (absolute)");
  app.add_option("--c-frac", cfg.c_frac, "mass as a fraction of c0");
  app.add_option("--c-fracs", c_fracs, "comma-separated fractions of c0 for full");
  app.add_option("--g", cfg.g, "perturbation: example, zero or a CSV path");
  app.add_option("--g-tail-bound", cfg.g_tail_bound, "declared L^{4/3} tail bound for a sampled g");
  app.add_option("--grid", grid, "R,N");
  app.add_option("--seed", cfg.seed, "corpus seed");
  app.add_option("--corpus", cfg.corpus, "corpus size");
  app.add_option("--out", cfg.out, std::string("output directory (default $") + csnorm::kOutputEnv + " or ./csnorm_out)");
  app.add_option("--tol", cfg.tol, "projected-gradient tolerance of the minimizer");
  app.add_option("--n", cfg.n, "Moser parameter of the string-method path");
  app.add_option("--images", cfg.images, "images on the path");
  app.add_option("--moser-n", moser_n, "comma-separated Moser parameters for the gap table in full");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? csnorm::kExitOk : csnorm::kExitUsage;
  }

  try {
    cfg.mode = app.get_subcommands().front()->get_name();
    if (c_opt->count() > 0) cfg.c = c;
    if (!c_fracs.empty()) cfg.c_fracs = parse_list(c_fracs, "c-fracs");
    if (!moser_n.empty()) cfg.moser_n = parse_list(moser_n, "moser-n");
    if (!grid.empty()) {
      const auto v = parse_list(grid, "grid");
      if (v.size() != 2 || v[1] < 1 || v[1] != std::floor(v[1])) throw csnorm::ConfigError("grid must be R,N");
      cfg.R = v[0];
      cfg.N = static_cast<std::size_t>(v[1]);
    }
    csnorm::validate(cfg);
    std::cout << csnorm::canonical(cfg);
    return csnorm::run(cfg, std::cerr);
  } catch (const csnorm::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return csnorm::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return csnorm::kExitFailure;
  }
}
