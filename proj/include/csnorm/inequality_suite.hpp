#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "csnorm/perturbation.hpp"
#include "csnorm/radial.hpp"

namespace csnorm {

// Uniform draws built from raw 64-bit output so that corpora do not depend on
// the standard library's distribution implementations.
class CorpusRng {
 public:
  explicit CorpusRng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double log_uniform(double a, double b);
  int below(int n) { return static_cast<int>(uniform() * n); }
  // Box–Muller on two uniforms.
  double normal();

 private:
  std::mt19937_64 eng_;
};

enum class CorpusFamily { Mixed, GaussianMixture, Bumps, Moser };

struct CorpusSpec {
  CorpusFamily family = CorpusFamily::Mixed;  // Mixed cycles through the three families
  int count = 200;
  std::uint64_t seed = 20240611;
};

struct CorpusFunction {
  std::string id;
  std::string family;
  RadialFunction u;
};

std::vector<CorpusFunction> make_corpus(const CorpusSpec& spec, const GridPtr& grid);
CorpusFamily parse_family(const std::string& name);
std::string family_name(CorpusFamily f);

struct InequalityRecord {
  std::string id;
  std::string function_id;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs − lhs
  double tolerance = 0.0;
  double mass = 0.0;
  double kinetic = 0.0;
  bool passed = false;
  bool skipped = false;
  std::string note;
};

struct SuiteTolerances {
  double algebraic = 1e-9;
  double quadrature = 1e-6;
  double kinetic_cap = 0.9 * 3.14159265358979323846;  // exponential-moment bounds need ‖∇u‖₂² < π
  double tm_alpha = 2.0 * 3.14159265358979323846;
};

struct InequalitySummary {
  std::string id;
  int records = 0;
  int failures = 0;
  int skipped = 0;
  double min_slack = 0.0;
  std::string witness;  // function with the smallest slack
};

struct SuiteReport {
  std::uint64_t seed = 0;
  int corpus_size = 0;
  double c_cap = 0.0;
  std::vector<InequalityRecord> records;
  std::vector<InequalitySummary> summary;
  double tm_empirical_max = 0.0;  // max of ∫(e^{αu²}−1) over the corpus at ‖∇u‖₂ = 1
  std::vector<std::string> notes;
  bool passed = false;
};

// ζ_P(t) = Σ (k+2)[4^{k+2}(k+1)+1] / [(k+1)(k+3)!] t^k, the series of the
// Pohozaev-type exponential bound.
double zeta_pohozaev(double t);

// Lower bound Φ(u) ≥ K·h̃_c(K), K = ‖∇u‖₂², on corpus functions moved to
// mass c and the given kinetic targets (≤ π/3). Targets equal to s₀ also
// produce a boundary record Φ(u) > 0.
std::vector<InequalityRecord> verify_energy_lower_bound(double c, const Perturbation& g,
                                                   const std::vector<CorpusFunction>& corpus,
                                                   const std::vector<double>& kinetic_targets, double C4,
                                                   double tol = 1e-6);

// Every listed inequality on every corpus function. Masses for the
// mass-constrained checks are drawn up to c_cap (≤ 2π).
SuiteReport verify_corpus(const CorpusSpec& spec, const GridPtr& grid, const Perturbation& g, double c_cap,
                          const SuiteTolerances& tol = {});

void write_records_csv(const SuiteReport& r, const std::string& path);
void to_json(nlohmann::json& j, const InequalityRecord& r);
void to_json(nlohmann::json& j, const SuiteReport& r);

}  // namespace csnorm
