#pragma once

#include <functional>
#include <vector>

#include "ckn/quadrature.hpp"

namespace ckn {

// Extension model used outside the sampled range.  `eval` is a function of
// |x|; `expo` is the signed power (negative powers decay, positive grow).
struct Extrap {
  enum class Kind { zero, power, const_plus_power, const_plus_log };
  Kind kind = Kind::zero;
  double c0 = 0.0;
  double c1 = 0.0;
  double expo = 0.0;

  double eval(double ax) const;

  static Extrap zero() { return {}; }
  static Extrap power(double c, double e) {
    return {Kind::power, 0.0, c, e};
  }
  static Extrap const_plus_power(double c0, double c1, double e) {
    return {Kind::const_plus_power, c0, c1, e};
  }
  static Extrap const_plus_log(double c0, double c1) {
    return {Kind::const_plus_log, c0, c1, 0.0};
  }
};

// A symmetric, geometrically graded sampling of a real function on a
// truncated line.  Nodes exclude 0; evaluation interpolates piecewise
// cubically in log|x| between nodes and falls back to the origin/tail
// models inside the innermost gap and beyond the truncation radius.
class GridFunction {
 public:
  GridFunction() = default;
  // `pos_nodes` strictly increasing positive half; the full node set is its
  // mirror image.  For even functions only the positive values are stored.
  GridFunction(std::vector<double> pos_nodes, std::vector<double> pos_values,
               bool even_flag, double decay_exponent, double origin_exponent);

  static GridFunction sample(const std::function<double(double)>& f,
                             double r_min, double r_max, int nodes_per_decade,
                             bool even, double decay_exponent,
                             double origin_exponent);

  double operator()(double x) const;

  const std::vector<double>& positive_nodes() const { return nodes_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  bool even() const { return even_; }
  double r_min() const { return nodes_.front(); }
  double r_max() const { return nodes_.back(); }
  std::size_t size() const { return nodes_.size(); }

  double decay_exponent = 2.0;   // |f(x)| <~ |x|^{-decay_exponent} beyond r_max
  double origin_exponent = 0.0;  // |f(x)| <~ |x|^{-origin_exponent} near 0

  Extrap tail;    // evaluated for |x| > r_max
  Extrap origin;  // evaluated for |x| < r_min

  // Least-squares fits of the model coefficients on the outermost/innermost
  // decade; linear in the nodal values for a fixed kind and exponent.
  void fit_tail(Extrap::Kind kind, double expo);
  void fit_origin(Extrap::Kind kind, double expo);

  // Linear representation of a fitted model: model(ax) depends on the nodal
  // values v through  sum_j (g0[j] + g1[j]*basis1(ax)) * v[i0+j].
  struct ModelMap {
    std::size_t i0 = 0;
    std::vector<double> g0, g1;
    Extrap::Kind kind = Extrap::Kind::zero;
    double expo = 0.0;
    double basis1(double ax) const;
  };
  ModelMap tail_map() const;
  ModelMap origin_map() const;
  // Log-log refit of the tail decay exponent from the outermost decade
  // (requires positive values there); returns the fitted exponent.
  double refit_decay_exponent();

  GridFunction with_values(std::vector<double> v) const;
  GridFunction map(const std::function<double(double, double)>& fxv) const;

  // Interpolation stencil of x: node indices and cubic Lagrange weights.
  struct Stencil {
    int idx[4];
    double w[4];
    int count = 0;
  };
  Stencil stencil(double ax) const;  // for r_min <= |x| <= r_max

  void validate() const;  // invariants: monotone nodes, no zero, sizes match

 private:
  std::vector<double> nodes_;   // positive half, increasing
  std::vector<double> values_;  // values on positive nodes
  std::vector<double> neg_values_;  // values on mirrored nodes (odd/general)
  std::vector<double> logn_;    // log(nodes_)
  bool even_ = true;

  double interp_side(double ax, const std::vector<double>& vals) const;
};

// Geometric node ladder 10^{k/n} covering [r_min, r_max]; 1.0 is always a
// node when r_min <= 1 <= r_max.
std::vector<double> log_grid(double r_min, double r_max, int nodes_per_decade);

}  // namespace ckn
