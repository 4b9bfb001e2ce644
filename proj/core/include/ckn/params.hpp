#pragma once

#include "ckn/errors.hpp"

namespace ckn {

// p = 2n / (n - 2*gamma + 2*(beta - alpha)); DomainError on a nonpositive
// denominator.
double exponent_p(int n, double gamma, double alpha, double beta);

// Parameter tuple (n, gamma, alpha, beta) with the derived exponent p.
struct CknParams {
  int n = 1;
  double gamma = 0.25;
  double alpha = 0.0;
  double beta = 0.0;
  double p = 0.0;  // derived

  static CknParams make(int n, double gamma, double alpha, double beta);

  // 0 < alpha < min{beta, (1-2*gamma)/2} and beta < alpha + gamma (n = 1,
  // gamma < 1/2): the window in which a minimizer exists and is even,
  // positive, with |x|^{-alpha} u decreasing.
  bool in_core_window() const;

  // (n-2*gamma)/2 < alpha < n: range reached through the inversion.
  bool in_appendix_window() const;
};

}  // namespace ckn
