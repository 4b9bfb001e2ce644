#pragma once

#include <vector>

#include "ckn/grid.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

// Member of the explicit singular Liouville family.
struct LiouvilleParams {
  double rho = 1.0;   // dilation parameter, > 0
  double b = 0.0;     // singular weight exponent, in (-1, 1)

  void validate() const;
};

// eta_rho(x) = log( 2(1-b) rho cos(pi b/2)
//                   / (|x|^{2(1-b)} + 2 rho |x|^{1-b} sin(pi b/2) + rho^2) ).
double eta_family(const LiouvilleParams& lp, double x);

struct MassReport {
  double kappa = 0.0;        // computed int |x|^{-b} e^eta dx
  double kappa_exact = 0.0;  // 2 pi (1-b)
  double rel_err = 0.0;
  double quad_error = 0.0;
};

MassReport liouville_mass(const LiouvilleParams& lp,
                          const QuadratureConfig& cfg);

// Samples eta_rho on a geometric grid with exact extension models.
GridFunction sample_eta(const LiouvilleParams& lp, double r_min, double r_max,
                        int nodes_per_decade);

// max over check nodes of |(-Lap)^{1/2} eta - |x|^{-b} e^eta| using the
// gridded representation at the resolution carried by `nodes_per_decade`.
// Check nodes avoid a configurable ball around the origin.
struct ResidualReport {
  double max_residual = 0.0;
  std::vector<double> nodes;
  std::vector<double> residuals;
};

ResidualReport liouville_residual(const LiouvilleParams& lp,
                                  const std::vector<double>& check_nodes,
                                  int nodes_per_decade,
                                  const QuadratureConfig& cfg);

// Least-squares selection of rho: minimizes the sup-node deviation from the
// family over a window; FitFailed above `fail_threshold`.
struct RhoFit {
  LiouvilleParams params;
  double fit_error = 0.0;
};

RhoFit fit_rho(const GridFunction& eta_samples, double b,
               double window = 5.0, double fail_threshold = 1e9);

}  // namespace ckn
