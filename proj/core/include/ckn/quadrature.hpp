#pragma once

#include <functional>
#include <vector>

namespace ckn {

using RealFn = std::function<double(double)>;

// Policy knobs for every singular integral in the library.
struct QuadratureConfig {
  double r_max = 1e6;        // truncation radius of the real line
  int n_cells = 16;          // panels per decade toward singular points
  double grading = 10.0;     // geometric grading ratio toward singular points
  double pv_exclusion = 0.25;  // symmetric exclusion half-width, fraction of local cell
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double tail_order = 2.0;   // assumed algebraic decay exponent closing truncated integrals
  int max_segments = 20000;  // refinement budget before NonConvergent
  bool adaptive = true;      // false: fixed panel schedule (refinement studies)

  void validate() const;  // throws DomainError on out-of-range knobs

  QuadratureConfig with_tols(double at, double rt) const {
    QuadratureConfig c = *this;
    c.abs_tol = at;
    c.rel_tol = rt;
    return c;
  }
};

struct IntegrationResult {
  double value = 0.0;
  double error = 0.0;  // conservative absolute error estimate
};

// Description of one endpoint of an integration interval.
struct Endpoint {
  double strength = 0.0;  // f ~ |x - e|^{-strength} near the endpoint; < 1 required
  bool graded = false;    // force a graded/substituted approach even when strength == 0
  static Endpoint regular() { return {}; }
  static Endpoint singular(double s) { return {s, true}; }
  static Endpoint steep() { return {0.0, true}; }
};

// Integrate f over the finite interval (a, b).  Endpoint power singularities
// are removed by a polynomial substitution; the interior is handled by
// adaptive Gauss-Kronrod panels.  `splits` marks interior points where the
// integrand is singular or merely kinked; each split inherits graded handling.
struct InteriorPoint {
  double x = 0.0;
  double strength = 0.0;
};

IntegrationResult integrate_line_ex(const RealFn& f, double a, double b,
                                    Endpoint ea, Endpoint eb,
                                    const std::vector<InteriorPoint>& splits,
                                    const QuadratureConfig& cfg);

// Spec-facing form: singular exponents at the two endpoints only.
IntegrationResult integrate_line(const RealFn& f, double a, double b,
                                 double exponent_a, double exponent_b,
                                 const QuadratureConfig& cfg);

// Principal value of g over (a, b) with a simple-pole-type singularity at x0:
// symmetric exclusion of half-width pv_exclusion * min(x0-a, b-x0), with the
// excluded band recovered from the (integrable) symmetric sum g(x0+t)+g(x0-t).
IntegrationResult pv_integrate(const RealFn& g, double a, double b, double x0,
                               const QuadratureConfig& cfg);

// Integral of f over (a, infinity), a > 0, where |f| ~ x^{-decay} at infinity
// (decay > 1).  The far field is mapped to (0, 1/a] by x -> 1/x; no truncation
// or tail model is involved, so algebraic tails are integrated essentially
// exactly.
IntegrationResult integrate_halfline(const RealFn& f, double a, double decay,
                                     Endpoint ea, const QuadratureConfig& cfg);

// Integral over the whole line of an evaluable integrand with interior
// singular points and algebraic decay at both ends.
IntegrationResult integrate_real_line(const RealFn& f,
                                      const std::vector<InteriorPoint>& splits,
                                      double decay, double feature_scale,
                                      const QuadratureConfig& cfg);

// Double integral of F over the square (a,b)^2 with a power singularity of
// net strength `diagonal_exponent` (< 1) on the diagonal x = y and optional
// axis weights at x = 0 / y = 0.  Nested adaptive quadrature in the rotated
// variable t = y - x.
IntegrationResult integrate_plane_offdiag(
    const std::function<double(double, double)>& F, double a, double b,
    double diagonal_exponent, double axis_exponent_x, double axis_exponent_y,
    const QuadratureConfig& cfg);

}  // namespace ckn
