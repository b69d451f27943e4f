#pragma once

#include <cmath>

namespace csnorm {

inline constexpr double kPi = 3.14159265358979323846;

// e^x − 1 − x without cancellation for small x.
inline double exp_excess(double x) {
  if (std::abs(x) < 0.5) {
    double term = x * x / 2.0, s = 0.0;
    for (int j = 3; j < 60; ++j) {
      s += term;
      term *= x / j;
      if (std::abs(term) <= 1e-17 * std::abs(s)) break;
    }
    return s;
  }
  return std::expm1(x) - x;
}

// Neumaier compensated sum.
struct CompensatedSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

}  // namespace csnorm
