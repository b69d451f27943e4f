#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "csnorm/radial.hpp"

using namespace csnorm;

namespace {

const double kPi = 3.14159265358979323846;

RadialFunction gaussian(const GridPtr& g, double a = 1.0) {
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * std::exp(-g->r[i] * g->r[i] / 2.0);
  return RadialFunction(g, v);
}

}  // namespace

TEST(Grid, RejectsBadArguments) {
  EXPECT_THROW(build_grid(0.0, 10), std::invalid_argument);
  EXPECT_THROW(build_grid(-1.0, 10), std::invalid_argument);
  EXPECT_THROW(build_grid(1.0, 1), std::invalid_argument);
}

TEST(Grid, ConstantIntegratesExactly) {
  auto g = build_grid(1.0, 2);
  EXPECT_NEAR(g->integrate(std::vector<double>(3, 1.0)), kPi, 1e-15);
  EXPECT_EQ(g->integrate(std::vector<double>(3, 0.0)), 0.0);
  for (std::size_t N : {3u, 7u, 100u, 4096u}) {
    auto h = build_grid(2.5, N);
    EXPECT_NEAR(h->integrate(std::vector<double>(h->size(), 1.0)), kPi * 2.5 * 2.5, 1e-12);
  }
}

TEST(Grid, WeightsPositiveAndNodesUniform) {
  for (std::size_t N : {2u, 3u, 5u, 4096u}) {
    auto g = build_grid(3.0, N);
    for (std::size_t i = 0; i <= N; ++i) {
      EXPECT_GT(g->w[i], 0.0);
      EXPECT_DOUBLE_EQ(g->r[i], 3.0 * static_cast<double>(i) / static_cast<double>(N));
    }
  }
}

TEST(Grid, GaussianIntegral) {
  auto g = reference_grid();
  std::vector<double> f(g->size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-g->r[i] * g->r[i]);
  EXPECT_NEAR(g->integrate(f), kPi, 1e-10);
}

TEST(Norms, GaussianClosedForms) {
  auto u = gaussian(reference_grid());
  EXPECT_NEAR(u.mass() / kPi - 1.0, 0.0, 1e-10);
  EXPECT_NEAR(u.kinetic() / kPi - 1.0, 0.0, 1e-10);
  EXPECT_NEAR(u.quartic() / (kPi / 2) - 1.0, 0.0, 1e-10);
  auto z = RadialFunction::zeros(reference_grid());
  EXPECT_EQ(z.mass(), 0.0);
  EXPECT_EQ(z.kinetic(), 0.0);
  EXPECT_EQ(z.quartic(), 0.0);
}

TEST(Norms, KineticIsConvergentFourthOrder) {
  double prev = 0.0;
  for (std::size_t N : {256u, 512u}) {
    auto u = gaussian(build_grid(12.0, N));
    const double err = std::abs(u.kinetic() - kPi);
    if (prev > 0.0) EXPECT_LT(err, prev / 10.0);
    prev = err;
  }
}

TEST(Norms, KineticNullSpaceIsConstants) {
  auto g = build_grid(1.0, 16);
  std::vector<double> alt(g->size());
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = (i % 2) ? 1.0 : -1.0;
  EXPECT_GT(kinetic_energy(*g, alt), 1.0);
  EXPECT_NEAR(kinetic_energy(*g, std::vector<double>(g->size(), 3.0)), 0.0, 1e-20);
}

TEST(Norms, CacheMatchesRecomputation) {
  auto u = gaussian(reference_grid(), 0.7);
  const Norms a = u.norms();
  RadialFunction copy(u.grid_ptr(), u.values());
  const Norms b = copy.norms();
  EXPECT_EQ(a.mass, b.mass);
  EXPECT_EQ(a.kinetic, b.kinetic);
  EXPECT_EQ(a.quartic, b.quartic);
}

TEST(Norms, RejectsNonFinite) {
  auto g = build_grid(1.0, 4);
  std::vector<double> v(5, 0.0);
  v[2] = std::nan("");
  EXPECT_THROW(RadialFunction(g, v), std::invalid_argument);
}

TEST(Norms, KineticGradientMatchesFiniteDifference) {
  auto g = build_grid(3.0, 40);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> u(g->size());
  for (double& x : u) x = U(rng);
  std::vector<double> grad(g->size(), 0.0);
  add_kinetic_gradient(*g, u, 1.0, grad);
  for (std::size_t k : {0u, 1u, 2u, 20u, 38u, 39u, 40u}) {
    auto up = u, um = u;
    up[k] += 1e-6;
    um[k] -= 1e-6;
    const double fd = (kinetic_energy(*g, up) - kinetic_energy(*g, um)) / 2e-6;
    EXPECT_NEAR(grad[k], fd, 1e-6 * (1.0 + std::abs(fd)));
  }
}

TEST(Dilation, IdentityAndRejects) {
  auto u = gaussian(reference_grid());
  EXPECT_EQ(dilate_mass_preserving(u, 1.0).values(), u.values());
  EXPECT_EQ(gauge_dilate(u, 0.0).values(), u.values());
  EXPECT_THROW(dilate_mass_preserving(u, 0.0), std::invalid_argument);
  EXPECT_THROW(dilate_mass_preserving(u, -2.0), std::invalid_argument);
}

TEST(Dilation, ScalingIdentities) {
  auto u = gaussian(reference_grid());
  auto v = dilate_mass_preserving(u, 2.0);
  EXPECT_NEAR(v.mass(), kPi, 1e-6 * kPi);
  EXPECT_NEAR(v.kinetic(), 4.0 * kPi, 1e-4 * 4.0 * kPi);
  auto b = gauge_dilate(u, std::log(2.0));
  EXPECT_NEAR(b.mass(), kPi, 1e-6 * kPi);
  EXPECT_NEAR(b.kinetic(), 4.0 * kPi, 1e-4 * 4.0 * kPi);
  auto h = dilate_mass_preserving(u, 0.5);
  EXPECT_NEAR(h.mass(), u.mass(), 1e-6 * u.mass());
}

TEST(Moser, PlateauValue) {
  auto g = reference_grid();
  for (double n : {10.0, 100.0, 1000.0})
    EXPECT_DOUBLE_EQ(moser_value(n, 1.0 / (2.0 * n)), std::sqrt(std::log(n) / (2.0 * kPi)));
  EXPECT_EQ(moser_value(10.0, 1.0), 0.0);
  EXPECT_EQ(moser_value(10.0, 2.0), 0.0);
  EXPECT_THROW(moser(1.5, g), std::invalid_argument);
  EXPECT_THROW(moser(10.0, build_grid(0.5, 100)), std::invalid_argument);
}

// Closed forms evaluated independently (30-digit arithmetic).
TEST(Moser, ExactIntegratorMatchesClosedForms) {
  struct Row {
    double n, mass, quartic;
  };
  const Row rows[] = {
      {10.0, 0.102487884271054827, 0.0151999204549171843},
      {100.0, 0.0542313815568826878, 0.00552555207562411250},
      {1000.0, 0.0361906706340641604, 0.00250016512795237647},
      {std::exp(1.0), 0.148498537572540481, 0.0170546306351405103},
  };
  for (const Row& r : rows) {
    EXPECT_NEAR(moser_exact::mass(r.n), r.mass, 1e-14);
    EXPECT_NEAR(moser_exact::quartic(r.n), r.quartic, 1e-14);
    EXPECT_NEAR(moser_exact::mass_formula(r.n), r.mass, 1e-14);
    EXPECT_NEAR(moser_exact::quartic_formula(r.n), r.quartic, 1e-14);
    EXPECT_EQ(moser_exact::kinetic(r.n), 1.0);
  }
}

TEST(Moser, ExpIntegralMatchesMomentSeries) {
  // ∫(e^{a w²}−1−a w²) = Σ_{k≥2} a^k/k! ∫ w^{2k}
  for (double n : {10.0, 100.0}) {
    const double a = 2.0;
    double s = 0.0, fact = 1.0;
    for (int k = 2; k <= 40; ++k) {
      fact *= k;
      s += std::pow(a, k) / fact * moser_exact::even_moment(n, k);
    }
    EXPECT_NEAR(moser_exact::exp_integral(n, a), s, 1e-13 * (1.0 + s));
  }
}

TEST(Moser, GridValuesOnRefinedGrid) {
  auto g = build_grid(1.5, 1u << 17);
  for (double n : {10.0, 100.0, 1000.0}) {
    auto w = moser(n, g);
    EXPECT_NEAR(w.kinetic(), 1.0, 1e-3);
    EXPECT_NEAR(w.mass(), moser_exact::mass_formula(n), 1e-3);
    EXPECT_NEAR(w.quartic(), moser_exact::quartic_formula(n), 1e-3);
  }
  auto w = moser(std::exp(1.0), g);
  EXPECT_NEAR(w.mass(), 0.148498537572540481, 1e-6);
}

TEST(Csv, RoundTrip) {
  auto u = gaussian(build_grid(4.0, 64), 0.3);
  const auto path = std::filesystem::temp_directory_path() / "csnorm_rt.csv";
  write_csv(u, path.string());
  auto v = read_csv(path.string());
  EXPECT_EQ(u.values(), v.values());
  EXPECT_EQ(u.grid().r, v.grid().r);
  std::filesystem::remove(path);
}
