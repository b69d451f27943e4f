#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "csnorm/functionals.hpp"
#include "csnorm/perturbation.hpp"
#include "csnorm/radial.hpp"

namespace csnorm {

// A point of S_c × ℝ standing for β(v,s)(x) = e^s v(e^s x).
struct ScaledState {
  RadialFunction v;
  double s = 0.0;
};

// W_{n,t}(x) = u_c(τx) + t w̃_n(τx), τ = ‖u_c + t w̃_n‖₂/√c, returned as
// (v, s) = ((u_c + t w̃_n)/τ, log τ) on the grid of u_c with the discrete mass.
ScaledState moser_superposition(const RadialFunction& u_c, double n, double t);
// Resample β(v,s) on another grid (only meaningful when e^{−s}R_v covers it).
RadialFunction materialize(const ScaledState& st, const GridPtr& grid);

// Ψ_n(t) = t²/4 − (1/2τ²)∫(e^{t²w̃_n²}−1−t²w̃_n²), exponential integral exact.
double psi_n(double n, double t, double tau);

// Φ̃(v,t) = Φ(β(v,t)).
double extended_energy(const RadialFunction& v, double t, const Perturbation& g);

// Φ(W_{n,t}) by composite Gauss–Legendre on u_c (linearly interpolated) plus
// t w̃_n; kinetic term from the exact cross-term identity.
struct MoserPathPoint {
  double t = 0.0;
  double tau = 0.0;          // refined τ
  double energy = 0.0;       // refined Φ(W_{n,t})
  double energy_grid = 0.0;  // Φ̃ of the grid (v,s) representation
  double kinetic = 0.0;      // ‖∇W_{n,t}‖₂²
  double exp_term = 0.0;     // ½∫F(W)
};
MoserPathPoint moser_path_point(const RadialFunction& u_c, const Perturbation& g, double n, double t);

struct PathProfile {
  double n = 0.0;
  double m_c = 0.0;
  double t_max = 0.0;
  std::vector<MoserPathPoint> rows;
  double sup = 0.0;          // refined sup_t Φ(W_{n,t})
  double t_at_sup = 0.0;
  double gap = 0.0;          // m(c) + 2π − sup
  double t_hat = 0.0;        // first sampled t past the peak with Φ < 2m(c) (refined)
  double t_hat_grid = 0.0;   // same test on the grid representation
  bool t_hat_found = false;
  bool t_hat_grid_found = false;
  int extensions = 0;        // times t_max was enlarged looking for t̂
};

// Largest t keeping (u_c(0) + t w̃_n(0))² inside the overflow guard.
double moser_t_limit(const RadialFunction& u_c, double n);
PathProfile path_energy_profile(const RadialFunction& u_c, const Perturbation& g, double m_c, double n,
                                double t_max = 0.0, int samples = 241);

struct PathState {
  std::vector<ScaledState> images;
  std::vector<double> energies;
  double c = 0.0;
  double m_c = 0.0;
  std::size_t max_index = 0;
  double max_energy() const { return energies.at(max_index); }
  // γ(0) = u_c and Φ(γ(1)) < 2m(c)
  bool endpoint_admissible() const { return !energies.empty() && energies.back() < 2.0 * m_c; }
};

// Images W_{n, k t̂/P}, k = 0..P, with energies on the grid representation.
PathState moser_path(const RadialFunction& u_c, const Perturbation& g, double m_c, double n, double t_hat,
                     int images);
void refresh_energies(PathState& p, const Perturbation& g);

struct SaddleReport {
  ScaledState state;
  EnergyBreakdown energy;
  PohozaevValue pohozaev;
  double lambda = 0.0;
  double projected_gradient_norm = 0.0;
  double kinetic = 0.0;  // ‖∇β(v,s)‖₂²
  double mass = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct StringOptions {
  int max_sweeps = 400;
  double sweep_tol = 1e-9;   // relative change of the max-image energy
  int stall_sweeps = 5;      // consecutive quiet sweeps before stopping
  double climb_tol = 1e-5;   // L² norm of the tangential gradient at the saddle
  int climb_max_iter = 4000;
  bool climb = true;
};

struct StringResult {
  PathState relaxed;
  SaddleReport saddle;
  double M_estimate = 0.0;
  double relaxed_max = 0.0;     // max image energy after relaxation
  double resolved_max = 0.0;    // max over the relaxed path with each segment subdivided
  double initial_max = 0.0;
  int sweeps = 0;
  int rejected_sweeps = 0;      // sweeps whose max energy rose and were undone
  double kappa_lower_bound = 0.0;
};

StringResult string_method(const PathState& init, const Perturbation& g, const StringOptions& opts = {});

// Max of Φ̃ along the piecewise-linear path (mass-renormalized), each segment
// sampled at `subdivisions` interior points.
double segment_max(const PathState& p, const Perturbation& g, int subdivisions = 16);

// Refine a critical point of Φ̃ on S_c × ℝ from (v,s): s tracks the top of the
// dilation fiber and v descends with the preconditioned tangential gradient.
SaddleReport climb_to_saddle(const ScaledState& start, const Perturbation& g, double tol, int max_iter);

// s maximizing Φ̃(v,·) on the fiber branch through s_guess (P(β(v,s)) = 0, P′ < 0).
double fiber_maximum(const RadialFunction& v, double s_guess, const Perturbation& g);

void save_path(const PathState& p, const std::string& dir);
PathState load_path(const std::string& dir);

void to_json(nlohmann::json& j, const PathProfile& p);
void to_json(nlohmann::json& j, const PathState& p);
void to_json(nlohmann::json& j, const SaddleReport& s);
void to_json(nlohmann::json& j, const StringResult& r);

}  // namespace csnorm
