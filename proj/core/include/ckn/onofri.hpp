#pragma once

#include <vector>

#include "ckn/energy.hpp"
#include "ckn/grid.hpp"
#include "ckn/liouville.hpp"
#include "ckn/profiles.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

struct GapReport {
  double lhs = 0.0;        // log( (1/kappa) int e^v dm_b )
  double quad_term = 0.0;  // (1/2 kappa) int v (-Lap)^{1/2} v
  double mean_term = 0.0;  // (1/kappa) int v dm_b
  double gap = 0.0;        // quad + mean - lhs
  double error_bar = 0.0;
  double route_diff = 0.0;  // |double-integral route - operator route|
};

// Gap of the limiting inequality for a compactly supported profile against
// the family member eta(lp).  The quadratic term is evaluated through the
// double-integral route and cross-checked against the operator route.
GapReport onofri_gap(const CompactProfile& v, const LiouvilleParams& lp,
                     const QuadratureConfig& cfg);

// Grid-function surface: support is detected from the nonzero values; the
// tail model must be zero (UnsupportedSupport otherwise).
GapReport onofri_gap(const GridFunction& v, const LiouvilleParams& lp,
                     const QuadratureConfig& cfg);

// psi_k = (1/k) sum_{j=1..k} phi(x / 5^j) with the fixed plateau phi.
CompactProfile psi_k_profile(int k);
GridFunction constant_sequence_psi(int k, int nodes_per_decade = 8);

// int psi (-Lap)^{1/2} psi, evaluated through the operator route.
IntegrationResult quarter_norm_sq(const CompactProfile& psi,
                                  const QuadratureConfig& cfg);

// Counterexample profile v~_t for b in (-1,0):
// v~_t(x) = 2(1-b) [ phi2(|s|/t) log(1/t) + psi_t(|s|) log(1/|s|) ], s = x-1.
CompactProfile counterexample_family(double b, double t);
GapReport counterexample_gap(double b, double t, const LiouvilleParams& lp,
                             const QuadratureConfig& cfg);

struct PerturbationCheck {
  double direct = 0.0;      // int w L w for w = (1 + eps v) u
  double decomposed = 0.0;  // lambda + 2 eps I1 + eps^2 I2
  double lambda = 0.0;
  double I1 = 0.0, I2 = 0.0, I21 = 0.0, I22 = 0.0, I23 = 0.0;
  double diff = 0.0;
};

// Expansion of int w L w around a converged minimizer; v must be even.
PerturbationCheck perturbation_expansion_check(const MinimizerResult& m,
                                               const CompactProfile& v,
                                               double eps,
                                               const CknParams& params,
                                               const QuadratureConfig& cfg);

}  // namespace ckn
