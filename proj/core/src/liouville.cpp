#include "ckn/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ckn/errors.hpp"
#include "ckn/operators.hpp"

namespace ckn {

namespace {
constexpr double kPi = std::numbers::pi;
}

void LiouvilleParams::validate() const {
  if (!(rho > 0.0)) throw DomainError("LiouvilleParams: rho must be positive");
  if (!(b > -1.0 && b < 1.0))
    throw DomainError("LiouvilleParams: b must lie in (-1, 1)");
}

double eta_family(const LiouvilleParams& lp, double x) {
  lp.validate();
  const double b = lp.b, rho = lp.rho;
  const double ax = std::abs(x);
  const double num = 2.0 * (1.0 - b) * rho * std::cos(kPi * b / 2.0);
  const double den = std::pow(ax, 2.0 * (1.0 - b)) +
                     2.0 * rho * std::pow(ax, 1.0 - b) * std::sin(kPi * b / 2.0) +
                     rho * rho;
  return std::log(num / den);
}

MassReport liouville_mass(const LiouvilleParams& lp,
                          const QuadratureConfig& cfg) {
  lp.validate();
  const double b = lp.b;
  RealFn f = [&lp, b](double x) {
    return std::pow(std::abs(x), -b) * std::exp(eta_family(lp, x));
  };
  std::vector<InteriorPoint> sp;
  if (b > 0.0) sp.push_back({0.0, b});
  // integrand decays like |x|^{-(2-b)}
  const double scale = std::pow(lp.rho, 1.0 / (1.0 - b));
  IntegrationResult r =
      integrate_real_line(f, sp, 2.0 - b, 4.0 * std::max(1.0, scale), cfg);
  MassReport rep;
  rep.kappa = r.value;
  rep.kappa_exact = 2.0 * kPi * (1.0 - b);
  rep.rel_err = std::abs(rep.kappa - rep.kappa_exact) / rep.kappa_exact;
  rep.quad_error = r.error;
  return rep;
}

GridFunction sample_eta(const LiouvilleParams& lp, double r_min, double r_max,
                        int nodes_per_decade) {
  lp.validate();
  GridFunction g = GridFunction::sample(
      [&lp](double x) { return eta_family(lp, x); }, r_min, r_max,
      nodes_per_decade, true, 0.0, 0.0);
  // Far field: eta ~ C - 2(1-b) log|x|; near field: eta(0) + O(|x|^{1-b}).
  g.fit_tail(Extrap::Kind::const_plus_log, 0.0);
  g.fit_origin(Extrap::Kind::const_plus_power, 1.0 - lp.b);
  return g;
}

ResidualReport liouville_residual(const LiouvilleParams& lp,
                                  const std::vector<double>& check_nodes,
                                  int nodes_per_decade,
                                  const QuadratureConfig& cfg) {
  lp.validate();
  const double r_min = 1e-6, r_max = 1e6;
  GridFunction eta = sample_eta(lp, r_min, r_max, nodes_per_decade);
  NonlocalOperator op(eta, 0.5, 0.0, cfg);
  const double sg = sigma_gamma(1, 0.5);
  ResidualReport rep;
  for (double x : check_nodes) {
    if (!(std::abs(x) > 0.0)) throw DomainError("residual: node at 0");
    const double lhs = sg * op.apply(eta, std::abs(x));
    const double rhs =
        std::pow(std::abs(x), -lp.b) * std::exp(eta_family(lp, x));
    const double r = std::abs(lhs - rhs);
    rep.nodes.push_back(x);
    rep.residuals.push_back(r);
    rep.max_residual = std::max(rep.max_residual, r);
  }
  return rep;
}

RhoFit fit_rho(const GridFunction& eta_samples, double b, double window,
               double fail_threshold) {
  const auto& nodes = eta_samples.positive_nodes();
  std::vector<double> xs, vs;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] > window) break;
    xs.push_back(nodes[i]);
    vs.push_back(eta_samples.values()[i]);
  }
  if (xs.size() < 3) throw FitFailed("fit_rho: too few samples in window");
  auto sup_dev = [&](double rho) {
    LiouvilleParams lp{rho, b};
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      worst = std::max(worst, std::abs(vs[i] - eta_family(lp, xs[i])));
    return worst;
  };
  // coarse deterministic scan in log rho, then golden-section refinement
  double best_r = 1.0, best = sup_dev(1.0);
  for (int k = 0; k <= 120; ++k) {
    const double rho = std::pow(10.0, -3.0 + 6.0 * k / 120.0);
    const double d = sup_dev(rho);
    if (d < best) {
      best = d;
      best_r = rho;
    }
  }
  double lo = best_r / 1.3, hi = best_r * 1.3;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log(lo), c = std::log(hi);
  double x1 = c - gr * (c - a), x2 = a + gr * (c - a);
  double f1 = sup_dev(std::exp(x1)), f2 = sup_dev(std::exp(x2));
  for (int k = 0; k < 80; ++k) {
    if (f1 < f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - gr * (c - a);
      f1 = sup_dev(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (c - a);
      f2 = sup_dev(std::exp(x2));
    }
  }
  const double rho = std::exp(0.5 * (a + c));
  RhoFit fit;
  fit.params = {rho, b};
  fit.fit_error = sup_dev(rho);
  if (fit.fit_error > fail_threshold)
    throw FitFailed("fit_rho: deviation exceeds threshold");
  return fit;
}

}  // namespace ckn
