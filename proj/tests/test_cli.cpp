#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "csnorm/cli.hpp"

using namespace csnorm;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("csnorm_cli_" + name);
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int exit_code(const std::string& args) {
  const std::string cmd = std::string(CSNORM_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, CanonicalIsSortedAndOmitsOutput) {
  RunConfig a, b;
  a.out = "/tmp/x";
  b.out = "/tmp/y";
  EXPECT_EQ(canonical(a), canonical(b));
  const std::string s = canonical(a);
  EXPECT_EQ(s.rfind("c=\n", 0), 0u);
  EXPECT_NE(s.find("grid=12,4096\n"), std::string::npos);
  EXPECT_EQ(s.find("/tmp/x"), std::string::npos);
  a.c = 1e-7;
  EXPECT_NE(canonical(a).find("c=9.9999999999999995e-08\n"), std::string::npos);
}

TEST(Config, ValidationRejectsBadValues) {
  RunConfig c;
  EXPECT_NO_THROW(validate(c));
  c.mode = "plot";
  EXPECT_THROW(validate(c), ConfigError);
  c = RunConfig{};
  c.c_frac = 1.0;
  EXPECT_THROW(validate(c), ConfigError);
  c = RunConfig{};
  c.c = 7.0;
  EXPECT_THROW(validate(c), ConfigError);
  c = RunConfig{};
  c.N = 4;
  EXPECT_THROW(validate(c), ConfigError);
  c = RunConfig{};
  c.images = 2;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Config, OutputDirectoryFallsBackToEnvironment) {
  RunConfig c;
  c.out = "explicit";
  EXPECT_EQ(resolve_output_dir(c), "explicit");
  c.out.clear();
  setenv(kOutputEnv, "/tmp/from_env", 1);
  EXPECT_EQ(resolve_output_dir(c), "/tmp/from_env");
  unsetenv(kOutputEnv);
  EXPECT_EQ(resolve_output_dir(c), "csnorm_out");
}

TEST(Json, SeventeenDigitsAndNullForNonFinite) {
  const nlohmann::json j = {{"a", 0.1}, {"b", std::nan("")}, {"c", {1, 2}}, {"d", "x"}};
  const std::string s = dump_json(j);
  EXPECT_NE(s.find("\"a\": 0.10000000000000001"), std::string::npos);
  EXPECT_NE(s.find("\"b\": null"), std::string::npos);
  EXPECT_NE(s.find("\"d\": \"x\""), std::string::npos);
  EXPECT_TRUE(nlohmann::json::parse(s).is_object());
}

TEST(Run, ConstantsWritesReport) {
  RunConfig c;
  c.mode = "constants";
  c.out = fresh_dir("constants").string();
  std::ostringstream log;
  EXPECT_EQ(run(c, log), kExitOk);
  const auto j = nlohmann::json::parse(slurp(fs::path(c.out) / "constants.json"));
  EXPECT_TRUE(j.contains("c0"));
  EXPECT_EQ(slurp(fs::path(c.out) / "config.txt"), canonical(c));
}

TEST(Run, VerifyOnDefaultsExitsZeroAndIsReproducible) {
  RunConfig c;
  c.mode = "verify";
  c.corpus = 30;
  c.out = fresh_dir("verify_a").string();
  std::ostringstream log;
  EXPECT_EQ(run(c, log), kExitOk);
  const std::string first = slurp(fs::path(c.out) / "inequality_records.csv");
  const std::string first_json = slurp(fs::path(c.out) / "verify.json");
  c.out = fresh_dir("verify_b").string();
  EXPECT_EQ(run(c, log), kExitOk);
  EXPECT_EQ(slurp(fs::path(c.out) / "inequality_records.csv"), first);
  EXPECT_EQ(slurp(fs::path(c.out) / "verify.json"), first_json);
}

TEST(Run, MinimizeSchema) {
  RunConfig c;
  c.mode = "minimize";
  c.c_frac = 0.5;
  c.out = fresh_dir("minimize").string();
  std::ostringstream log;
  EXPECT_EQ(run(c, log), kExitOk);
  const auto j = nlohmann::json::parse(slurp(fs::path(c.out) / "minimize.json"));
  for (const char* k : {"phi", "lambda", "pohozaev", "kinetic", "mass", "converged"}) EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_LT(j["phi"].get<double>(), 0.0);
  EXPECT_TRUE(fs::exists(fs::path(c.out) / "minimizer_profile.csv"));
}

TEST(Run, OutOfRegimeMassIsAConfigError) {
  RunConfig c;
  c.mode = "minimize";
  c.c = 1.0;
  c.out = fresh_dir("regime").string();
  std::ostringstream log;
  EXPECT_THROW(run(c, log), ConfigError);
}

TEST(Binary, ExitCodes) {
  const fs::path d = fresh_dir("bin");
  EXPECT_EQ(exit_code(""), kExitUsage);
  EXPECT_EQ(exit_code("minimize --c-frac 3 --out " + d.string()), kExitUsage);
  EXPECT_EQ(exit_code("constants --grid 12 --out " + d.string()), kExitUsage);
  EXPECT_EQ(exit_code("verify --g /nonexistent.csv --out " + d.string()), kExitUsage);
  EXPECT_EQ(exit_code("--help"), kExitOk);
  EXPECT_EQ(exit_code("constants --out " + d.string()), kExitOk);
}

TEST(Binary, ConfigFileWithFlagOverride) {
  const fs::path d = fresh_dir("cfgfile");
  fs::create_directories(d);
  {
    std::ofstream os(d / "run.cfg");
    os << "corpus = 12\nseed = 5\n";
  }
  EXPECT_EQ(exit_code("verify --config " + (d / "run.cfg").string() + " --seed 6 --out " + (d / "out").string()), kExitOk);
  const std::string cfg = slurp(d / "out" / "config.txt");
  EXPECT_NE(cfg.find("corpus=12\n"), std::string::npos);
  EXPECT_NE(cfg.find("seed=6\n"), std::string::npos);
}
