#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace csnorm {

// Invalid configuration; the command line maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Environment variable naming the default output directory.
inline constexpr const char* kOutputEnv = "CSNORM_OUT";

struct RunConfig {
  std::string mode = "full";  // constants | verify | minimize | mpass | full
  std::optional<double> c;    // absolute mass; overrides c_frac
  double c_frac = 0.5;        // mass as a fraction of c₀
  std::vector<double> c_fracs = {0.3, 0.5, 0.8};  // masses visited by `full` when c is unset
  std::string g = "example";  // "example", "zero" or a CSV path (r,g,g')
  double g_tail_bound = 0.0;
  double R = 12.0;
  std::size_t N = 4096;
  std::uint64_t seed = 20240611;
  int corpus = 200;
  double tol = 1e-6;  // projected-gradient tolerance of the minimizer
  double n = 1000.0;  // Moser parameter of the string-method path
  int images = 33;
  std::vector<double> moser_n = {100.0, 1000.0, 10000.0};
  std::string out;  // empty: $CSNORM_OUT, then ./csnorm_out
};

// Throws ConfigError on out-of-range fields.
void validate(const RunConfig& cfg);
// Sorted key=value lines; the output directory is left out so that reruns in
// different directories echo identically.
std::string canonical(const RunConfig& cfg);
std::string resolve_output_dir(const RunConfig& cfg);

// Runs the configured mode, writes its artifacts under the output directory
// and returns the exit code. Progress lines go to `log`.
int run(const RunConfig& cfg, std::ostream& log);

// JSON with every double printed at 17 significant digits; non-finite values
// become null.
std::string dump_json(const nlohmann::json& j);
void write_json(const nlohmann::json& j, const std::string& path);

}  // namespace csnorm
