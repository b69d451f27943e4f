#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace csnorm {

// Radial inhomogeneity g(|x|) with its radial derivative, so ∇g(x)·x = r g′(r).
class Perturbation {
public:
  using Profile = std::function<double(double)>;

  Perturbation() = default;
  // breakpoints: radii where g or g′ may be non-smooth; used to split quadrature.
  Perturbation(std::string name, Profile g, Profile gprime, std::vector<double> breakpoints = {},
               bool closed_form = true);

  static Perturbation example();
  static Perturbation zero();
  // r² e^{−r}: increasing near 0, used as a failing probe for the monotonicity check.
  static Perturbation probe_increasing();
  // Sampled profile with linear interpolation between rows; zero beyond the last
  // row. tail_bound is the user-declared bound on the missing L^{4/3} mass.
  static Perturbation from_samples(std::vector<double> r, std::vector<double> g,
                                   std::vector<double> gprime, double tail_bound = 0.0);
  static Perturbation load_csv(const std::string& path, double tail_bound = 0.0);

  const std::string& name() const { return name_; }
  bool closed_form() const { return closed_form_; }
  bool is_zero() const { return zero_; }
  double tail_bound() const { return tail_bound_; }
  const std::vector<double>& breakpoints() const { return breaks_; }

  double g(double r) const { return zero_ ? 0.0 : g_(r); }
  double gprime(double r) const { return zero_ ? 0.0 : gp_(r); }
  // ∇g·x at radius r.
  double radial_moment(double r) const { return r * gprime(r); }

  // ‖g‖_{4/3} and ‖∇g·x‖_{4/3}, computed once by adaptive quadrature.
  double norm_43() const { return norm43_; }
  double norm_43_radial_derivative() const { return norm43_rd_; }
  // ‖g‖_2² (diagnostic).
  double norm_2_squared() const { return norm2sq_; }

private:
  void compute_norms();

  std::string name_;
  Profile g_, gp_;
  std::vector<double> breaks_;
  bool closed_form_ = true;
  bool zero_ = false;
  double tail_bound_ = 0.0;
  double norm43_ = 0.0, norm43_rd_ = 0.0, norm2sq_ = 0.0;
};

// ∫_{ℝ²} φ(|x|) dx over [a, b] (b may be +∞): Gauss–Kronrod on finite pieces, exp-sinh on [a, ∞).
double radial_area_integral(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

struct AssumptionCheck {
  std::string id;
  bool passed = true;
  bool symbolic = false;  // true when settled by an exact argument, not sampling
  double worst_violation = 0.0;  // ≥ 0, zero when no violation was found
  double witness_r = 0.0;
  std::string verdict;
};

struct ThetaCheck {
  double theta = 0.0;
  bool passed = true;
  double worst_violation = 0.0;
  double witness_r = 0.0;
};

struct AssumptionReport {
  std::string perturbation;
  std::vector<double> sample_radii;
  AssumptionCheck g1, g2, g3;
  std::vector<ThetaCheck> g4;
  std::vector<double> g4_passing_thetas;
  // ∇g·x ≤ 0 wherever the monotonicity check passes.
  bool radial_moment_nonpositive = true;
};

std::vector<double> default_theta_grid();
// Log-spaced radii in [1e-3, 1e3].
std::vector<double> default_sample_radii(std::size_t count = 2001);

AssumptionReport check_assumptions(const Perturbation& g, const std::vector<double>& thetas,
                                   const std::vector<double>& radii);

void to_json(nlohmann::json& j, const AssumptionReport& r);

}  // namespace csnorm
