#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ckn/grid.hpp"
#include "ckn/params.hpp"
#include "ckn/profiles.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

// Multiplicative constant of the fractional Laplacian,
// pi^{-n/2} 2^{2 gamma} Gamma(n/2+gamma)/Gamma(1-gamma) * gamma.
double sigma_gamma(int n, double gamma);

// Sharp fractional Hardy constant, 2^{2g} Gamma^2((n+2g)/4) / Gamma^2((n-2g)/4).
double c_hardy(int n, double gamma);

// Quadrature route for the Hardy constant (n = 1 only):
// sigma_gamma * int_R (1 - |z|^{-(1-2g)/2}) / |1-z|^{1+2g} dz.
IntegrationResult c_hardy_quadrature(int n, double gamma,
                                     const QuadratureConfig& cfg);

// Hardy-type coupling constant C_{gamma,alpha}, evaluated from the folded
// unit-ball integrand (|z|^{-a}-1)(1-|z|^{-n+2g+a}) / |e1-z|^{n+2g}, which is
// absolutely convergent and avoids the principal value at z = e1.  n = 1 only.
IntegrationResult c_gamma_alpha(int n, double gamma, double alpha,
                                const QuadratureConfig& cfg);

struct ConstantsReport {
  double sigma_gamma = 0.0;
  double c_gamma_alpha = 0.0;
  double c_hardy = 0.0;
  double c_ckn = 0.0;  // = -sigma_gamma * c_gamma_alpha
  double quadrature_error = 0.0;
};
ConstantsReport constants_report(int n, double gamma, double alpha,
                                 const QuadratureConfig& cfg);

// Kernel G_{gamma,alpha}(x,y) = |x-y|^{-n-2g} |x|^{-a} |y|^{-a}.
double kernel_G(double gamma, double alpha, double x, double y);

// Nodal discretization of the weighted nonlocal operator on a fixed grid.
// Evaluation splits the principal-value integral into a local band handled
// through the interpolant's Taylor coefficients, paired symmetric panels,
// far-field panels aligned with the grid cells, and model-based closures
// inside the innermost gap and beyond the truncation radius.  For fixed grid
// geometry and extension-model kinds the result is a linear functional of the
// nodal values, exposed as a dense matrix.
class NonlocalOperator {
 public:
  NonlocalOperator(const GridFunction& prototype, double gamma, double alpha,
                   const QuadratureConfig& cfg);

  double apply(const GridFunction& u, double x) const;
  // int (u(x)-u(y)) (v(x)-v(y)) G(x,y) dy at x.
  double bilinear(const GridFunction& u, const GridFunction& v,
                  double x) const;

  // Row of the nodal matrix at an arbitrary target x (columns = positive
  // nodes of an even grid function).
  std::vector<double> row(double x) const;
  const std::vector<double>& matrix() const;  // row-major dim() x dim()
  std::size_t dim() const { return proto_.size(); }
  const GridFunction& prototype() const { return proto_; }
  double gamma() const { return gamma_; }
  double alpha() const { return alpha_; }

 private:
  struct Plan {
    // far-field points: weight w multiplies (u(x) - u(y))
    std::vector<double> ys, ws;
    // local Taylor moments against the kernel
    double J1 = 0.0, J2 = 0.0, J3 = 0.0, J4 = 0.0;
    double t_c = 0.0;  // local band half-width
    double x = 0.0;
  };
  Plan make_plan(double x) const;
  void taylor_weights(double x, double d1[4], double d2[4], double d3[4],
                      double d4[4], GridFunction::Stencil& st) const;

  GridFunction proto_;
  double gamma_ = 0.5;
  double alpha_ = 0.0;
  QuadratureConfig cfg_;
  mutable std::vector<double> mat_;
};

// PV int (u(x)-u(y)) G(x,y) dy with metadata-driven closure of the tails.
double apply_L(const GridFunction& u, const CknParams& params, double x,
               const QuadratureConfig& cfg);

// Continuum-route evaluation of the operator on an arbitrary evaluable
// function (adaptive quadrature rather than the fixed nodal plan).  `R_hint`
// marks where extension models take over and `decay` their algebraic order;
// operator identities hold exactly for the evaluated function, so two such
// evaluations agree to quadrature accuracy.
double apply_L_continuum(const RealFn& b, double gamma, double alpha, double x,
                         double R_hint, double decay, const QuadratureConfig& cfg);

// int (u(x)-u(y)) (v(x)-v(y)) G(x,y) dy through the same continuum route.
double bilinear_continuum(const RealFn& u, const RealFn& v, double gamma,
                          double alpha, double x, double R_hint, double decay,
                          const QuadratureConfig& cfg);

// int a (L b) dx with both factors evaluated as interpolants.
IntegrationResult pairing_integral(const GridFunction& a,
                                   const GridFunction& b,
                                   const CknParams& params,
                                   const QuadratureConfig& cfg);

// sigma_gamma * PV int (u(x)-u(y)) / |x-y|^{1+2g} dy.
double apply_frac_laplacian(const GridFunction& u, double gamma, double x,
                            const QuadratureConfig& cfg);

// Half-Laplacian-type evaluation for closed-form compactly supported
// profiles; the complement of the support is integrated in closed form.
double frac_laplacian_compact(const CompactProfile& v, double gamma, double x,
                              const QuadratureConfig& cfg);

// Double-integral route for the weighted norm:
// ||u||^2 = int int (u(x)-u(y))^2 G(x,y) dy dx.
IntegrationResult weighted_norm_sq(const GridFunction& u,
                                   const CknParams& params,
                                   const QuadratureConfig& cfg);

// Unweighted Gagliardo energy of an evaluable profile (alpha = 0 kernel).
IntegrationResult gagliardo_norm_sq(const GridFunction& u, double gamma,
                                    const QuadratureConfig& cfg);

struct Interval {
  double lo = 0.0, hi = 0.0;
};

// Localized seminorm [u]^2_S over S x S, S a union of intervals.
IntegrationResult seminorm_sq(const GridFunction& u,
                              const std::vector<Interval>& S,
                              const CknParams& params,
                              const QuadratureConfig& cfg);

// Seminorm mass of the annulus pair region B_R^2 \ B_rho^2 around x0.
IntegrationResult seminorm_annulus(const GridFunction& u, double x0,
                                   double rho, double R,
                                   const CknParams& params,
                                   const QuadratureConfig& cfg);

// Weighted measure |S|_{mu_alpha} = int_S |x|^{-alpha} dx.
IntegrationResult weighted_measure(const std::vector<Interval>& S,
                                   double alpha, const QuadratureConfig& cfg);

// Tail_alpha(u; x0, R) = R^{2g+a} int_{|x-x0|>R} |u| |x-x0|^{-1-2g} |x|^{-a} dx.
IntegrationResult tail_functional(const GridFunction& u, double x0, double R,
                                  const CknParams& params,
                                  const QuadratureConfig& cfg);

// Kelvin inversion: u_bar(x) = u(x/|x|^2) on the inverted grid with
// alpha_bar = n - 2g - alpha and beta_bar p = 2n - beta p (same p).
std::pair<GridFunction, CknParams> kelvin_invert(const GridFunction& u,
                                                 const CknParams& params);

// int |u| / (1 + |x|^q) dx.
IntegrationResult l1q_norm(const GridFunction& u, double q,
                           const QuadratureConfig& cfg);

}  // namespace ckn
