#pragma once

#include <vector>

#include "json.hpp"

#include "csnorm/perturbation.hpp"
#include "csnorm/radial.hpp"

namespace csnorm {

struct EnergyBreakdown {
  double kinetic_half = 0.0;
  double chern_simons_half = 0.0;
  double exp_term = 0.0;
  double perturb_term = 0.0;
  double total = 0.0;
};

struct PohozaevValue {
  double value = 0.0;
  double kinetic = 0.0;
  double chern_simons = 0.0;
  double exp_pohozaev = 0.0;
  double perturb_pohozaev = 0.0;
};

struct ExpIntegrals {
  double I_F = 0.0;  // ∫(e^{u²}−1−u²)
  double I_P = 0.0;  // ∫[(u²−1)e^{u²}+1]
  double I_f = 0.0;  // ∫(e^{u²}−1)u²
};

// h_u(r_i) = ∫_0^{r_i} (l/2) u(l)² dl with the grid's end-corrected rule, so
// that 4π h_u(R) equals the discrete mass.
std::vector<double> cumulative_charge(const RadialFunction& u);
double chern_simons(const RadialFunction& u);
ExpIntegrals exp_integrals(const RadialFunction& u);

EnergyBreakdown energy(const RadialFunction& u, const Perturbation& g);
PohozaevValue pohozaev(const RadialFunction& u, const Perturbation& g);
// L²-representative of the derivative of the discrete Φ.
RadialFunction gradient(const RadialFunction& u, const Perturbation& g);
// Discrete ∫ g u dx, including the breakpoint-cell correction.
double perturbation_integral(const RadialFunction& u, const Perturbation& g);
// Discrete load vector ℓ with ∫ g v dx = Σ ℓ_i v_i for every grid function v.
std::vector<double> perturbation_load(const GridPtr& grid, const Perturbation& g);
// ⟨Φ′(u),u⟩ from the explicit four-term formula.
double dual_pairing(const RadialFunction& u, const Perturbation& g);
// λ = −⟨G(u),u⟩/‖u‖₂² from the gradient pairing.
double multiplier(const RadialFunction& u, const Perturbation& g);
// λ from the explicit formula.
double multiplier_explicit(const RadialFunction& u, const Perturbation& g);

// Φ(b) − Φ(a) accumulated node by node; stays accurate when a ≈ b.
double energy_difference(const RadialFunction& a, const RadialFunction& b, const Perturbation& g);

// Evaluation of Φ at β(v,s)(x) = e^s v(e^s x) through exact scaling identities:
//   Φ(β(v,s)) = e^{2s}/2 (K(v)+B(v)) − e^{−2s}/2 ∫(e^{(e^s v)²}−1−(e^s v)²) − e^{−s}∫g(e^{−s}y) v(y) dy.
// With s = 0 these are the plain discrete functionals.
struct ScaledEvaluation {
  EnergyBreakdown energy;
  PohozaevValue pohozaev;  // P(β(v,s)) = ∂_s Φ(β(v,s))
  double pairing = 0.0;    // ⟨Φ′(β(v,s)), β(v,s)⟩
  double mass = 0.0;
  double kinetic = 0.0;       // ‖∇β(v,s)‖₂²
  double chern_simons = 0.0;  // B(β(v,s))
  std::vector<double> grad;   // L²-representative with respect to v (empty unless requested)
};

ScaledEvaluation evaluate_scaled(const RadialFunction& v, double s, const Perturbation& g, bool with_gradient);

double max_abs(const RadialFunction& u);

void to_json(nlohmann::json& j, const EnergyBreakdown& e);
void to_json(nlohmann::json& j, const PohozaevValue& p);
void to_json(nlohmann::json& j, const ExpIntegrals& e);

}  // namespace csnorm
