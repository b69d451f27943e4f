#include <cmath>

#include <gtest/gtest.h>

#include "csnorm/constants.hpp"
#include "csnorm/errors.hpp"

using namespace csnorm;

namespace {

const double kPi = 3.14159265358979323846;
// ‖g‖_{4/3} of the example profile in closed form.
const double kG = 5.07757022813043166136059967447;

}  // namespace

TEST(Zeta, ValueAtZero) {
  const auto z = zeta_series(0.0);
  EXPECT_DOUBLE_EQ(z.value, 17.0 / 6.0);
  EXPECT_EQ(z.terms, 1);
  EXPECT_FALSE(z.truncation_warning);
}

TEST(Zeta, AgreesWithLongSummation) {
  for (double t : {0.1, 0.5, 1.0, 3.0}) {
    const auto z = zeta_series(t);
    const double ref = zeta_partial(t, 200);
    EXPECT_NEAR(z.value, ref, 1e-12 * ref) << t;
    // the reported tail bound covers the actual truncation error
    EXPECT_LE(std::abs(z.value - ref) / ref, z.tail_bound + 4e-16) << t;
    EXPECT_LE(z.tail_bound, 1e-12) << t;
  }
}

TEST(Zeta, MonotoneAndWarnsPastTen) {
  double prev = zeta(0.0);
  for (int i = 1; i <= 50; ++i) {
    const double v = zeta(0.2 * i);
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_FALSE(zeta_series(10.0).truncation_warning);
  EXPECT_TRUE(zeta_series(10.5).truncation_warning);
  EXPECT_THROW(zeta(-1.0), std::invalid_argument);
}

TEST(GroundState, ExtremalAndConverged) {
  const auto q = solve_ground_state(1e-3);
  const auto q2 = solve_ground_state(5e-4);
  EXPECT_GE(q.extremality(), 1.0 - 1e-3);
  EXPECT_LE(q.extremality(), 1.0 + 1e-8);
  EXPECT_LT(std::abs(q.C4 - q2.C4), 1e-5);
  // Pohozaev identities of the 2D cubic ground state: ‖Q‖₂² = ‖∇Q‖₂² = ½‖Q‖₄⁴
  EXPECT_NEAR(q.mass, q.kinetic, 1e-8);
  EXPECT_NEAR(q.quartic, 2.0 * q.mass, 1e-8);
  EXPECT_NEAR(q.C4, 0.643, 5e-4);
  EXPECT_NEAR(gn_sharp_constant(), q.C4, 1e-15);
}

TEST(GroundState, FrozenValues) {
  // Regression values of this solver at step 1e-3.
  const auto q = solve_ground_state(1e-3);
  EXPECT_NEAR(q.Q0, 2.20620086469594, 1e-10);
  EXPECT_NEAR(q.mass, 11.7008965244729, 1e-9);
  EXPECT_NEAR(q.C4, 0.642987772610702, 1e-11);
}

TEST(HTilde, ZeroPerturbationReduction) {
  const double c = 0.3, C4 = gn_sharp_constant();
  double prev = h_tilde(c, 1e-3, C4, 0.0);
  for (int i = 1; i <= 100; ++i) {
    const double s = 1e-3 + 0.01 * i;
    const double v = h_tilde(c, s, C4, 0.0);
    EXPECT_NEAR(v, 1.0 / 12.0 - std::pow(c, 1.5) * std::sqrt(s) / (kPi * kPi) * zeta(std::sqrt(c / (3 * kPi))),
                1e-15);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(HTilde, CriticalPointByCentralDifference) {
  const double C4 = gn_sharp_constant();
  for (double c : {1e-6, 1e-3, 0.05, 1.0}) {
    const double sc = s_c(c, C4, kG);
    const double h = 1e-5 * sc;
    const double fd = (h_tilde(c, sc + h, C4, kG) - h_tilde(c, sc - h, C4, kG)) / (2 * h);
    EXPECT_LE(std::abs(fd), 1e-8) << c;
    // relative to the size of either term of the derivative
    const double scale = 0.75 * std::pow(c, 0.25) * C4 * kG * std::pow(sc, -1.75);
    EXPECT_LE(std::abs(h_tilde_prime(c, sc, C4, kG)) / scale, 1e-12) << c;
  }
}

TEST(HTilde, ArgmaxMatchesClosedForm) {
  const double C4 = gn_sharp_constant();
  // masses where s_c lies inside (0, π/3] and where it lies beyond
  for (double c : {1e-7, 4e-7, 0.02, 0.05, 0.5, 2.0, 6.0}) {
    const double expect = std::min(s_c(c, C4, kG), kPi / 3);
    EXPECT_NEAR(h_tilde_argmax(c, C4, kG), expect, 1e-4) << c;
  }
}

TEST(Thresholds, RootsSatisfyEqualities) {
  const auto r = thresholds(Perturbation::example(), {1e-7, 4e-7});
  EXPECT_NEAR(r.g_norm_43, kG, 1e-10 * kG);
  EXPECT_LE(std::abs(c1_expression(r.c1, r.C4, r.g_norm_43) - 1.0), 1e-10);
  EXPECT_LE(std::abs(c2_expression(r.c2, r.C4, r.g_norm_43) - 1.0), 1e-10);
  EXPECT_EQ(r.c0, std::min(r.c1, r.c2));
  EXPECT_GT(r.c1, 0.0);
  EXPECT_LE(r.c1, 2 * kPi);
  EXPECT_GT(r.c2, 0.0);
  EXPECT_LE(r.c2, 2 * kPi);
  EXPECT_TRUE(r.c1_strict_below);
  EXPECT_TRUE(r.c2_strict_below);
  EXPECT_LE(r.s0_at_c0, kPi / 3);
  EXPECT_GT(r.s0_at_c0, 0.0);
  ASSERT_EQ(r.at_mass.size(), 2u);
  for (const auto& m : r.at_mass) {
    EXPECT_GT(m.h_tilde_at_s0, 0.0);
    EXPECT_DOUBLE_EQ(m.kappa_lower, m.s0 * m.h_tilde_at_s0);
  }
}

TEST(Thresholds, FrozenExampleValues) {
  // Bisection values for the example profile, frozen after cross-checking the
  // roots against an independent 30-digit evaluation.
  const auto r = thresholds(Perturbation::example());
  EXPECT_NEAR(r.c2, 4.874457130521641e-07, 1e-17);
  EXPECT_NEAR(r.c1, 0.053591362527106924, 1e-12);
  EXPECT_EQ(r.c0, r.c2);
  EXPECT_DOUBLE_EQ(r.s0_at_c0, kPi / 3);
}

TEST(Thresholds, ExpressionsVanishAtZeroMass) {
  const double C4 = gn_sharp_constant();
  double p1 = 1.0, p2 = 1.0;
  for (int e = 7; e <= 19; e += 2) {
    const double c = std::pow(10.0, -e);
    const double a = c1_expression(c, C4, kG), b = c2_expression(c, C4, kG);
    EXPECT_LT(a, p1);
    EXPECT_LT(b, p2);
    p1 = a;
    p2 = b;
  }
  EXPECT_LT(p1, 1e-16);
  EXPECT_LT(p2, 1e-2);
}

TEST(Thresholds, SignConclusionBelowC0) {
  const auto r = thresholds(Perturbation::example());
  for (int i = 1; i <= 20; ++i) {
    const double c = r.c0 * i / 21.0;
    const double s0 = s_0(c, r.C4, r.g_norm_43);
    EXPECT_GT(h_tilde(c, s0, r.C4, r.g_norm_43), 0.0) << c;
  }
  EXPECT_GE(h_tilde(r.c0, r.s0_at_c0, r.C4, r.g_norm_43), -1e-12);
}

TEST(Thresholds, ZeroPerturbationIsInadmissible) {
  EXPECT_THROW(thresholds(Perturbation::zero()), AdmissibilityFailure);
}
