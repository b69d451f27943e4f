#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "json.hpp"

#include "csnorm/functionals.hpp"
#include "csnorm/perturbation.hpp"
#include "csnorm/radial.hpp"

namespace csnorm {

// √(c₀/3π)/(r⁴+1), the unnormalized seed shape.
double seed_profile(double c0, double r);
// Seed rescaled multiplicatively to mass exactly c.
RadialFunction seed_function(double c, const GridPtr& grid);

// Witness data for the upper envelope H̄_u(t) = (t²/2)(‖∇u‖₂²+B(u)) − ½tπδ²g(x₀)m̃.
struct EnvelopeWitness {
  double delta = 0.0;
  double x0 = 0.0;
  double m_tilde = 0.0;
};

struct DilationSample {
  double t = 0.0;
  double energy = 0.0;         // H_u(t) = Φ(t u(t·))
  double quadratic_part = 0.0; // (t²/2)(‖∇u‖₂²+B(u))
  double kinetic = 0.0;        // t²‖∇u‖₂²
  double envelope = 0.0;       // H̄_u(t), zero without a witness
};

std::vector<DilationSample> dilation_profile(const RadialFunction& u, const Perturbation& g,
                                             const std::vector<double>& t_samples,
                                             const std::optional<EnvelopeWitness>& witness = std::nullopt);

struct MinimizerOptions {
  double step = 0.0;        // initial step; 0 picks Δr²/4
  double tol = 1e-6;        // L² norm of the projected gradient
  int max_iter = 200000;
  double armijo = 1e-4;
  double backtrack = 0.5;
  // Regime data; NaN means "take from thresholds(g)".
  double c0 = std::numeric_limits<double>::quiet_NaN();
  double s0 = std::numeric_limits<double>::quiet_NaN();
  bool dilation_search = true;  // line search over H_u(t) for the seed
};

struct SolverReport {
  RadialFunction u;
  double c = 0.0;
  EnergyBreakdown energy;
  double lambda = 0.0;
  PohozaevValue pohozaev;
  double projected_gradient_norm = 0.0;
  double gradient_norm = 0.0;  // ‖G(ū)‖_{L²}
  int iterations = 0;
  int backtracks = 0;
  int roundoff_accepts = 0;  // steps accepted in the roundoff regime (|ΔΦ| at machine level)
  int guard_activations = 0;
  double min_step = 0.0, max_step = 0.0, last_step = 0.0;
  double mass = 0.0;
  double kinetic = 0.0;
  double s0 = 0.0;
  double kinetic_margin = 0.0;  // s₀ − ‖∇ū‖₂²
  double seed_dilation = 1.0;
  double initial_energy = 0.0;
  bool converged = false;
  bool stalled = false;             // backtracking exhausted before tol
  bool monotone_nonincreasing = false;  // observed, not enforced
  bool positive = false;
  std::vector<double> energy_decrements;  // Φ(u_{k+1}) − Φ(u_k) per accepted step
};

// Riemannian gradient descent on S_c from the given starting point.
SolverReport minimize_from(const RadialFunction& start, const Perturbation& g, const MinimizerOptions& opts = {});
// Seeded run on S_c ∩ A_{s₀}; throws OutOfRegime when c ≥ c₀.
SolverReport minimize_local(double c, const Perturbation& g, const GridPtr& grid, const MinimizerOptions& opts = {});

void to_json(nlohmann::json& j, const SolverReport& r);

}  // namespace csnorm
