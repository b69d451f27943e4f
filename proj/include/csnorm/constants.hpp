#pragma once

#include <vector>

#include "json.hpp"

#include "csnorm/perturbation.hpp"

namespace csnorm {

struct ZetaResult {
  double value = 0.0;
  int terms = 0;
  double tail_bound = 0.0;  // bound on the relative truncation error
  bool truncation_warning = false;
};

// ζ(t) = Σ_{k≥0} [4^{k+2}(k+1)+1] / [(k+1)(k+3)!] t^k
ZetaResult zeta_series(double t);
double zeta(double t);
// Plain summation of the first `terms` terms (oracle).
double zeta_partial(double t, int terms);

struct GroundState {
  double Q0 = 0.0;       // Q(0)
  double mass = 0.0;     // ‖Q‖₂²
  double kinetic = 0.0;  // ‖∇Q‖₂²
  double quartic = 0.0;  // ‖Q‖₄⁴
  double C4 = 0.0;       // C₄ = (2/‖Q‖₂²)^{1/4}
  double r_cut = 0.0;    // radius where the decaying branch was cut
  double step = 0.0;
  int bisections = 0;
  // ‖Q‖₄⁴ / (C₄⁴‖Q‖₂²‖∇Q‖₂²), equal to 1 at the extremal
  double extremality() const { return quartic / (C4 * C4 * C4 * C4 * mass * kinetic); }
};

// Positive radial ground state of −Q″ − Q′/r + Q = Q³ by shooting on Q(0),
// RK4 with step h. Convention: ‖u‖₄ ≤ C₄ ‖u‖₂^{1/2} ‖∇u‖₂^{1/2}.
GroundState solve_ground_state(double h = 1e-3);
// Cached default-resolution value of C₄.
double gn_sharp_constant();

double h_tilde(double c, double s, double C4, double g_norm_43);
double h_tilde_prime(double c, double s, double C4, double g_norm_43);
double s_c(double c, double C4, double g_norm_43);
double s_0(double c, double C4, double g_norm_43);
// Left-hand sides of the two threshold inequalities; each equals 1 at its root.
double c1_expression(double c, double C4, double g_norm_43);
double c2_expression(double c, double C4, double g_norm_43);
// Numeric argmax of h̃_c over (0, π/3]: grid search with the given
// resolution, then Brent refinement.
double h_tilde_argmax(double c, double C4, double g_norm_43, double resolution = 1e-4);

struct ConstantsReport {
  double C4 = 0.0;
  double Q_mass = 0.0;
  double g_norm_43 = 0.0;
  double c1 = 0.0, c2 = 0.0, c0 = 0.0;
  double c1_residual = 0.0, c2_residual = 0.0;  // expression − 1 at the root
  bool c1_strict_below = true, c2_strict_below = true;
  double s0_at_c0 = 0.0;
  struct AtMass {
    double c = 0.0;
    double s_c = 0.0;
    double s0 = 0.0;
    double zeta = 0.0;
    double h_tilde_at_s0 = 0.0;
    double kappa_lower = 0.0;  // s₀·h̃_c(s₀)
  };
  std::vector<AtMass> at_mass;
};

// Root of f(c) = 1 on (0, 2π] for an increasing f; returns 2π if f(2π) ≤ 1.
double threshold_root(double (*f)(double, double, double), double C4, double g_norm_43);

ConstantsReport thresholds(const Perturbation& g, const std::vector<double>& masses = {});
ConstantsReport::AtMass constants_at_mass(double c, double C4, double g_norm_43);

void to_json(nlohmann::json& j, const ConstantsReport& r);
void to_json(nlohmann::json& j, const GroundState& q);

}  // namespace csnorm
