#pragma once

// Test-only reference routines, deliberately independent of the library's
// implementation paths.

#include <cmath>

namespace oracle {

// Lanczos approximation (g = 7, 9 coefficients), accurate to ~1e-13 relative
// on the real axis; used as the independent gamma-function oracle.
inline double gamma_fn(double x) {
  static const double c[9] = {0.99999999999980993,
                              676.5203681218851,
                              -1259.1392167224028,
                              771.32342877765313,
                              -176.61502916214059,
                              12.507343278686905,
                              -0.13857109526572012,
                              9.9843695780195716e-6,
                              1.5056327351493116e-7};
  if (x < 0.5) {
    // reflection
    const double pi = 3.14159265358979323846;
    return pi / (std::sin(pi * x) * gamma_fn(1.0 - x));
  }
  x -= 1.0;
  double a = c[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += c[i] / (x + i);
  const double pi = 3.14159265358979323846;
  return std::sqrt(2.0 * pi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

inline double beta_fn(double a, double b) {
  return gamma_fn(a) * gamma_fn(b) / gamma_fn(a + b);
}

}  // namespace oracle
