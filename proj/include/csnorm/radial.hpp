#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace csnorm {

// Uniform radial mesh on [0, R]. Weights approximate the area integral
// ∫_{B_R} f(|x|) dx = 2π ∫_0^R f(r) r dr.
//
// The weights are trapezoid weights with Gregory end corrections: the node at
// r = 0 carries πΔr²/6 and the last three nodes absorb a one-sided correction.
// The rule stays exact for f ≡ 1 and is fourth order for smooth radial
// integrands, while all weights remain positive.
struct RadialGrid {
  double R = 0.0;
  std::size_t N = 0;
  double dr = 0.0;
  std::vector<double> r;
  std::vector<double> w;

  std::size_t size() const { return r.size(); }
  double integrate(const std::vector<double>& f) const;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr build_grid(double R_max, std::size_t N);

// Reference grid used by every acceptance run.
inline constexpr double kReferenceR = 12.0;
inline constexpr std::size_t kReferenceN = 4096;
GridPtr reference_grid();

struct Norms {
  double mass = 0.0;
  double kinetic = 0.0;
  double quartic = 0.0;
};

// Immutable sampled radial profile. Copies share the grid and the lazily
// computed norm cache.
class RadialFunction {
public:
  RadialFunction() = default;
  RadialFunction(GridPtr grid, std::vector<double> values);

  static RadialFunction zeros(GridPtr grid);

  const GridPtr& grid_ptr() const { return grid_; }
  const RadialGrid& grid() const { return *grid_; }
  const std::vector<double>& values() const { return u_; }
  std::size_t size() const { return u_.size(); }
  double operator[](std::size_t i) const { return u_[i]; }

  double mass() const { return norms().mass; }
  double kinetic() const { return norms().kinetic; }
  double quartic() const { return norms().quartic; }
  const Norms& norms() const;

  RadialFunction scaled(double a) const;
  RadialFunction with_mass(double c) const;

private:
  struct Cache {
    std::once_flag once;
    Norms norms;
  };
  GridPtr grid_;
  std::vector<double> u_;
  std::shared_ptr<Cache> cache_;
};

Norms norms(const RadialFunction& u);

// Discrete kinetic energy ‖∇u‖₂² from staggered cell differences (fourth
// order interior stencil, even reflection at r = 0, second order last cell).
double kinetic_energy(const RadialGrid& g, const std::vector<double>& u);
// Adds scale·∂K/∂u_k to out[k].
void add_kinetic_gradient(const RadialGrid& g, const std::vector<double>& u, double scale,
                          std::vector<double>& out);
// K(b) − K(a) summed cell by cell, accurate when a and b are close.
double kinetic_difference(const RadialGrid& g, const std::vector<double>& a,
                          const std::vector<double>& b);

// Centered derivative, one-sided at both ends; u′(R) = 0 when |u(R)| < 1e-14.
std::vector<double> radial_derivative(const RadialFunction& u);

// Linear interpolation with zero extension beyond R.
double interpolate(const RadialFunction& u, double r);

// v(r) = t·u(t r), resampled.
RadialFunction dilate_mass_preserving(const RadialFunction& u, double t);
// β(v,t)(r) = e^t v(e^t r), resampled.
RadialFunction gauge_dilate(const RadialFunction& v, double t);

// Moser test function w̃_n. n is real so that n = e can be used.
double moser_value(double n, double r);
RadialFunction moser(double n, GridPtr grid);

// Exact integrals of w̃_n by the piecewise-analytic integrator. The tail piece
// is integrated in s = log(1/r), where w̃_n is linear in s.
namespace moser_exact {
double kinetic(double n);
// ∫ w̃_n^{2k} dx for integer k ≥ 1.
double even_moment(double n, int k);
double mass(double n);
double quartic(double n);
// ∫ (e^{a w̃²} − 1 − a w̃²) dx.
double exp_integral(double n, double a);
// Closed forms displayed alongside the definition of w̃_n.
double mass_formula(double n);
double quartic_formula(double n);
}  // namespace moser_exact

void write_csv(const RadialFunction& u, std::ostream& os);
void write_csv(const RadialFunction& u, const std::string& path);
RadialFunction read_csv(const std::string& path);

std::string format_double(double x);

}  // namespace csnorm
