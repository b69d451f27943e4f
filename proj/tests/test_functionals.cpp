#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "csnorm/errors.hpp"
#include "csnorm/functionals.hpp"

using namespace csnorm;

namespace {

const double kPi = 3.14159265358979323846;
// Independent 30-digit evaluations of the Gaussian closed forms.
const double kB = 0.0564862428365000999729723;          // (π/16) ln(4/3)
const double kIF = 0.998719063569545080007322858;       // π Σ_{k≥2} 1/(k·k!)
const double kIf = 2.25654891549398058853826410;        // π (e − 2)
const double kIP = 1.25782985192443550853094124;
const double kEnergyNoG = 1.09967991642837412921414642;
const double kEnergyExample = -1.27276383148308496428833424;
const double kPohozaevNoG = 1.94024904450185782990467446;
const double kPohozaevExample = 2.80919497998795948449818125;

RadialFunction gaussian(const GridPtr& g, double a = 1.0, double s = 1.0) {
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * std::exp(-g->r[i] * g->r[i] / (2.0 * s * s));
  return RadialFunction(g, v);
}

RadialFunction random_bumps(const GridPtr& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> v(g->size(), 0.0);
  for (int k = 0; k < 3; ++k) {
    const double a = 0.2 + 0.8 * U(rng), c = 2.0 * U(rng), s = 0.4 + 1.2 * U(rng);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double d = (g->r[i] - c) / s;
      v[i] += a * std::exp(-d * d);
    }
  }
  return RadialFunction(g, v);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Charge, GaussianProfile) {
  auto u = gaussian(reference_grid());
  const auto h = cumulative_charge(u);
  EXPECT_EQ(h[0], 0.0);
  const auto& r = u.grid().r;
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(h[i], (1.0 - std::exp(-r[i] * r[i])) / 4.0, 1e-8);
  EXPECT_NEAR(h.back(), 0.25, 1e-10);
  EXPECT_NEAR(4.0 * kPi * h.back(), u.mass(), 1e-14);
  auto z = cumulative_charge(RadialFunction::zeros(reference_grid()));
  for (double x : z) EXPECT_EQ(x, 0.0);
}

TEST(Charge, NondecreasingForSmoothProfiles) {
  auto g = reference_grid();
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const auto h = cumulative_charge(random_bumps(g, s));
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_GE(h[i], h[i - 1]);
  }
}

TEST(ChernSimons, GaussianFrullani) {
  auto u = gaussian(reference_grid());
  const double B = chern_simons(u);
  EXPECT_LT(rel(B, kB), 1e-8);
  EXPECT_LE(B, kPi / 32.0);
  EXPECT_EQ(chern_simons(RadialFunction::zeros(reference_grid())), 0.0);
}

TEST(ChernSimons, DegreeSixHomogeneity) {
  auto u = random_bumps(reference_grid(), 7);
  const double B = chern_simons(u);
  for (double a : {0.3, 1.7, -2.0}) EXPECT_LT(rel(chern_simons(u.scaled(a)), std::pow(a, 6) * B), 1e-10);
}

TEST(ExpIntegrals, GaussianSeries) {
  const auto e = exp_integrals(gaussian(reference_grid()));
  EXPECT_LT(rel(e.I_F, kIF), 1e-8);
  EXPECT_LT(rel(e.I_f, kIf), 1e-8);
  EXPECT_LT(rel(e.I_P, kIP), 1e-8);
  EXPECT_LE(std::abs(e.I_P - (e.I_f - e.I_F)), 1e-12 * e.I_P);
  const auto z = exp_integrals(RadialFunction::zeros(reference_grid()));
  EXPECT_EQ(z.I_F, 0.0);
  EXPECT_EQ(z.I_P, 0.0);
  EXPECT_EQ(z.I_f, 0.0);
}

TEST(ExpIntegrals, IdentityOnRandomProfiles) {
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const auto e = exp_integrals(random_bumps(reference_grid(), s).scaled(1.5));
    EXPECT_LE(std::abs(e.I_P - (e.I_f - e.I_F)), 1e-12 * std::abs(e.I_P));
  }
}

TEST(ExpIntegrals, OverflowGuard) {
  auto u = gaussian(reference_grid(), 27.0);
  EXPECT_THROW(exp_integrals(u), MagnitudeOverflow);
  EXPECT_THROW(energy(u, Perturbation::example()), MagnitudeOverflow);
}

TEST(Energy, ZeroFunction) {
  const auto e = energy(RadialFunction::zeros(reference_grid()), Perturbation::example());
  EXPECT_EQ(e.total, 0.0);
}

TEST(Energy, GaussianBreakdown) {
  auto u = gaussian(reference_grid());
  const auto e0 = energy(u, Perturbation::zero());
  EXPECT_LT(rel(e0.total, kEnergyNoG), 1e-8);
  EXPECT_EQ(e0.total, e0.kinetic_half + e0.chern_simons_half - e0.exp_term - e0.perturb_term);
  const auto e1 = energy(u, Perturbation::example());
  EXPECT_NEAR(e1.total, kEnergyExample, 1e-6);
  EXPECT_GE(e1.kinetic_half, 0.0);
  EXPECT_GE(e1.chern_simons_half, 0.0);
  EXPECT_GE(e1.exp_term, 0.0);
  EXPECT_GE(e1.perturb_term, 0.0);
}

TEST(Pohozaev, GaussianValues) {
  auto u = gaussian(reference_grid());
  const auto p0 = pohozaev(u, Perturbation::zero());
  EXPECT_LT(rel(p0.value, kPohozaevNoG), 1e-8);
  EXPECT_EQ(p0.value, p0.kinetic + p0.chern_simons - p0.exp_pohozaev + p0.perturb_pohozaev);
  EXPECT_NEAR(pohozaev(u, Perturbation::example()).value, kPohozaevExample, 1e-6);
  EXPECT_EQ(pohozaev(RadialFunction::zeros(reference_grid()), Perturbation::example()).value, 0.0);
}

TEST(Pohozaev, DilationDerivative) {
  const auto g = Perturbation::example();
  for (std::uint64_t s = 1; s <= 10; ++s) {
    auto u = random_bumps(reference_grid(), s);
    const double eps = 1e-5;
    const double fd = (evaluate_scaled(u, eps, g, false).energy.total - evaluate_scaled(u, -eps, g, false).energy.total) /
                      (2.0 * eps);
    EXPECT_NEAR(fd, pohozaev(u, g).value, 1e-5);
  }
}

TEST(Scaled, KineticCsScaling) {
  auto v = random_bumps(reference_grid(), 4);
  const auto g = Perturbation::example();
  for (double t : {-1.0, 0.5, 2.0}) {
    const auto ev = evaluate_scaled(v, t, g, false);
    const double expect = 0.5 * std::exp(2.0 * t) * (v.kinetic() + chern_simons(v));
    EXPECT_LT(rel(ev.energy.kinetic_half + ev.energy.chern_simons_half, expect), 1e-12);
  }
  EXPECT_EQ(evaluate_scaled(v, 0.0, g, false).energy.total, energy(v, g).total);
}

TEST(Scaled, ResampledDilationAgreesToGridAccuracy) {
  auto v = gaussian(reference_grid(), 0.8, 1.5);
  const auto g = Perturbation::example();
  for (double t : {-0.3, 0.4}) {
    const double a = evaluate_scaled(v, t, g, false).energy.total;
    const double b = energy(gauge_dilate(v, t), g).total;
    EXPECT_NEAR(a, b, 1e-4);
  }
}

TEST(Gradient, ZeroFunctionGivesMinusG) {
  const auto g = Perturbation::example();
  auto grid = reference_grid();
  const auto G = gradient(RadialFunction::zeros(grid), g);
  // Away from the kink at r = 1 the load is nodal, so G = −g exactly.
  std::size_t differing = 0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    if (std::abs(G[i] + g.g(grid->r[i])) <= 1e-14) continue;
    ++differing;
    EXPECT_LT(std::abs(grid->r[i] - 1.0), 4.0 * grid->dr);
  }
  EXPECT_LE(differing, 6u);
  const auto G0 = gradient(RadialFunction::zeros(grid), Perturbation::zero());
  for (std::size_t i = 0; i < grid->size(); ++i) EXPECT_EQ(G0[i], 0.0);
  // The load vector integrates g against any grid function.
  const auto l = perturbation_load(grid, g);
  auto u = random_bumps(grid, 3);
  double s = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) s += l[i] * u[i];
  EXPECT_NEAR(s, perturbation_integral(u, g), 1e-13);
}

TEST(Gradient, FiniteDifferenceAudit) {
  const auto g = Perturbation::example();
  auto grid = reference_grid();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N01;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    auto u = random_bumps(grid, s);
    const auto G = gradient(u, g);
    for (int d = 0; d < 20; ++d) {
      std::vector<double> v(grid->size());
      for (double& x : v) x = N01(rng);
      double pair = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) pair += grid->w[i] * G[i] * v[i];
      const double eps = 1e-6;
      std::vector<double> up(u.values()), um(u.values());
      for (std::size_t i = 0; i < v.size(); ++i) {
        up[i] += eps * v[i];
        um[i] -= eps * v[i];
      }
      const double fd = (energy(RadialFunction(grid, up), g).total - energy(RadialFunction(grid, um), g).total) / (2 * eps);
      EXPECT_LE(std::abs(pair - fd), 1e-5 * (1.0 + std::abs(pair)));
    }
  }
}

TEST(Gradient, PairingFormula) {
  const auto g = Perturbation::example();
  for (std::uint64_t s = 1; s <= 10; ++s) {
    auto u = random_bumps(reference_grid(), s);
    const auto G = gradient(u, g);
    double pair = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) pair += u.grid().w[i] * G[i] * u[i];
    const auto e = exp_integrals(u);
    const double gu = perturbation_integral(u, g);
    const double formula = u.kinetic() + 3.0 * chern_simons(u) - e.I_f - gu;
    EXPECT_LT(std::abs(pair - formula), 1e-8 * std::abs(formula));
    EXPECT_LT(rel(multiplier(u, g), multiplier_explicit(u, g)), 1e-8);
  }
  EXPECT_THROW(multiplier(RadialFunction::zeros(reference_grid()), g), std::invalid_argument);
}

TEST(Gradient, ScaledGradientMatchesFiniteDifference) {
  const auto g = Perturbation::example();
  auto grid = reference_grid();
  auto u = random_bumps(grid, 9).scaled(0.2);
  const double s = 1.3;
  const auto ev = evaluate_scaled(u, s, g, true);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N01;
  for (int d = 0; d < 10; ++d) {
    std::vector<double> v(grid->size());
    for (double& x : v) x = N01(rng);
    double pair = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) pair += grid->w[i] * ev.grad[i] * v[i];
    const double eps = 1e-6;
    std::vector<double> up(u.values()), um(u.values());
    for (std::size_t i = 0; i < v.size(); ++i) {
      up[i] += eps * v[i];
      um[i] -= eps * v[i];
    }
    const double fd = (evaluate_scaled(RadialFunction(grid, up), s, g, false).energy.total -
                       evaluate_scaled(RadialFunction(grid, um), s, g, false).energy.total) /
                      (2 * eps);
    EXPECT_LE(std::abs(pair - fd), 1e-5 * (1.0 + std::abs(pair)));
  }
}

TEST(Energy, DifferenceMatchesDirect) {
  const auto g = Perturbation::example();
  auto a = random_bumps(reference_grid(), 2);
  auto b = random_bumps(reference_grid(), 3);
  EXPECT_NEAR(energy_difference(a, b, g), energy(b, g).total - energy(a, g).total, 1e-12);
}

// g(e^{−s}y) varies below the grid spacing for s ≪ log Δr. Oracle: 40-digit
// mpmath quadrature of e^{−s}∫g(e^{−s}y)e^{−y²}dy for the example g.
TEST(Scaled, UnderResolvedPerturbationMatchesOracle) {
  const auto g = Perturbation::example();
  auto u = gaussian(reference_grid(), 1.0, std::sqrt(0.5));
  const double oracle[3][2] = {{-5.0, 0.19538196734847746}, {-10.0, 0.0027426863442954612},
                               {-20.0, 2.5402386868166606e-7}};
  for (const auto& o : oracle) {
    const double got = evaluate_scaled(u, o[0], g, false).energy.perturb_term;
    EXPECT_NEAR(got / o[1], 1.0, 2e-6) << "s = " << o[0];
  }
}

TEST(Scaled, UnderResolvedGradientAndPohozaev) {
  const auto g = Perturbation::example();
  auto grid = reference_grid();
  auto u = random_bumps(grid, 4).scaled(0.3);
  const double s = -8.0;
  const auto ev = evaluate_scaled(u, s, g, true);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> N01;
  for (int d = 0; d < 5; ++d) {
    std::vector<double> v(grid->size());
    for (double& x : v) x = N01(rng);
    double pair = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) pair += grid->w[i] * ev.grad[i] * v[i];
    const double eps = 1e-6;
    std::vector<double> up(u.values()), um(u.values());
    for (std::size_t i = 0; i < v.size(); ++i) {
      up[i] += eps * v[i];
      um[i] -= eps * v[i];
    }
    const double fd = (evaluate_scaled(RadialFunction(grid, up), s, g, false).energy.total -
                       evaluate_scaled(RadialFunction(grid, um), s, g, false).energy.total) /
                      (2 * eps);
    EXPECT_LE(std::abs(pair - fd), 1e-5 * (std::abs(pair) + 1e-12));
  }
  const double h = 1e-4;
  const double dE = (evaluate_scaled(u, s + h, g, false).energy.total -
                     evaluate_scaled(u, s - h, g, false).energy.total) / (2 * h);
  EXPECT_NEAR(dE, ev.pohozaev.value, 1e-5 * std::abs(ev.pohozaev.value));
}

TEST(Scaled, PerturbationVanishesUnderSpreading) {
  const auto g = Perturbation::example();
  auto u = gaussian(reference_grid());
  double prev = evaluate_scaled(u, -4.0, g, false).energy.perturb_term;
  for (double s = -6.0; s >= -40.0; s -= 2.0) {
    const double p = evaluate_scaled(u, s, g, false).energy.perturb_term;
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, prev);
    prev = p;
  }
  EXPECT_THROW(evaluate_scaled(u, -800.0, g, false), MagnitudeOverflow);
}
