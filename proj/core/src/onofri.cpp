#include "ckn/onofri.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ckn/errors.hpp"
#include "ckn/linalg.hpp"
#include "ckn/operators.hpp"
#include "ckn/summation.hpp"

namespace ckn {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<InteriorPoint> kink_splits(const CompactProfile& v) {
  std::vector<InteriorPoint> sp;
  for (double k : v.kinks)
    if (k > v.lo && k < v.hi) sp.push_back({k, 0.0});
  return sp;
}

}  // namespace

GapReport onofri_gap(const CompactProfile& v, const LiouvilleParams& lp,
                     const QuadratureConfig& cfg) {
  lp.validate();
  const double b = lp.b;
  const double kappa = 2.0 * kPi * (1.0 - b);
  GapReport rep;
  std::vector<InteriorPoint> sp = kink_splits(v);
  if (b > 0.0 && v.lo < 0.0 && v.hi > 0.0) sp.push_back({0.0, b});

  // mean term and exponential mass (e^v - 1 vanishes outside the support)
  RealFn dm = [&](double x) {
    return std::pow(std::abs(x), -b) * std::exp(eta_family(lp, x));
  };
  IntegrationResult mean = integrate_line_ex(
      [&](double x) { return v(x) * dm(x); }, v.lo, v.hi, Endpoint::regular(),
      Endpoint::regular(), sp, cfg);
  IntegrationResult expm = integrate_line_ex(
      [&](double x) { return std::expm1(v(x)) * dm(x); }, v.lo, v.hi,
      Endpoint::regular(), Endpoint::regular(), sp, cfg);
  rep.mean_term = mean.value / kappa;
  rep.lhs = std::log1p(expm.value / kappa);

  // quadratic term, double-integral route:
  //   int v (-Lap)^{1/2} v = (1/2pi) [ iint_{SxS} (v(x)-v(y))^2 / (x-y)^2
  //                                    + 2 int_S v^2 (1/(hi-x) + 1/(x-lo)) ]
  QuadratureConfig icfg = cfg;
  icfg.abs_tol = cfg.abs_tol * 0.2 / std::max(1.0, v.hi - v.lo);
  icfg.rel_tol = cfg.rel_tol * 0.2;
  double max_inner = 0.0;
  RealFn outer = [&](double x) {
    RealFn inner = [&](double y) {
      const double d = v(x) - v(y);
      return d * d / ((x - y) * (x - y));
    };
    std::vector<InteriorPoint> isp = kink_splits(v);
    isp.push_back({x, 0.0});
    IntegrationResult r = integrate_line_ex(
        inner, v.lo, v.hi, Endpoint::regular(), Endpoint::regular(), isp,
        icfg);
    max_inner = std::max(max_inner, r.error);
    return r.value;
  };
  IntegrationResult dbl = integrate_line_ex(
      outer, v.lo, v.hi, Endpoint::regular(), Endpoint::regular(),
      kink_splits(v), cfg);
  IntegrationResult cross = integrate_line_ex(
      [&](double x) {
        const double vx = v(x);
        return vx * vx * (1.0 / (v.hi - x) + 1.0 / (x - v.lo));
      },
      v.lo, v.hi, Endpoint::steep(), Endpoint::steep(), kink_splits(v), cfg);
  const double qnorm = (dbl.value + 2.0 * cross.value) / (2.0 * kPi);
  rep.quad_term = qnorm / (2.0 * kappa);

  // operator route cross-check
  IntegrationResult oproute = quarter_norm_sq(v, cfg.with_tols(
      std::max(cfg.abs_tol, 1e-9), std::max(cfg.rel_tol, 1e-7)));
  rep.route_diff = std::abs(qnorm - oproute.value) / (2.0 * kappa);

  rep.gap = rep.quad_term + rep.mean_term - rep.lhs;
  rep.error_bar =
      (mean.error + expm.error +
       (dbl.error + 2.0 * cross.error + (v.hi - v.lo) * max_inner) /
           (2.0 * kPi) / 2.0) /
          kappa +
      rep.route_diff;
  return rep;
}

GapReport onofri_gap(const GridFunction& v, const LiouvilleParams& lp,
                     const QuadratureConfig& cfg) {
  if (v.tail.kind != Extrap::Kind::zero)
    throw UnsupportedSupport("onofri_gap: profile must vanish beyond the grid");
  // detect support from the nonzero nodal values
  const auto& nodes = v.positive_nodes();
  double hi = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (v.values()[i] != 0.0 || v(-nodes[i]) != 0.0) hi = nodes[i];
  if (hi == 0.0) hi = 1.0;  // v identically zero: zero integrands flow through
  if (hi >= v.r_max() * (1.0 - 1e-12))
    throw UnsupportedSupport("onofri_gap: support reaches the grid boundary");
  CompactProfile p;
  p.lo = -1.02 * hi;
  p.hi = 1.02 * hi;
  p.fn = [&v](double x) { return v(x); };
  return onofri_gap(p, lp, cfg);
}

CompactProfile psi_k_profile(int k) {
  if (k < 1) throw DomainError("psi_k: k must be >= 1");
  CompactProfile phi = cutoff_phi();
  CompactProfile out;
  const double outer = 2.0 * std::pow(5.0, k);
  out.lo = -outer;
  out.hi = outer;
  for (int j = 1; j <= k; ++j) {
    out.kinks.push_back(std::pow(5.0, j));
    out.kinks.push_back(2.0 * std::pow(5.0, j));
  }
  out.fn = [phi, k](double x) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += phi(x / std::pow(5.0, j));
    return s / k;
  };
  return out;
}

GridFunction constant_sequence_psi(int k, int nodes_per_decade) {
  CompactProfile p = psi_k_profile(k);
  GridFunction g = GridFunction::sample([&p](double x) { return p(x); }, 1e-2,
                                        p.hi, nodes_per_decade, true, 8.0, 0.0);
  g.tail = Extrap::zero();
  g.origin = Extrap::const_plus_power(1.0, 0.0, 1.0);
  return g;
}

IntegrationResult quarter_norm_sq(const CompactProfile& psi,
                                  const QuadratureConfig& cfg) {
  // int psi (-Lap)^{1/2} psi over the support (psi vanishes outside);
  // even profiles are integrated on x > 0 only.
  bool even = psi.lo == -psi.hi;
  if (even)
    for (double s : {0.17, 0.43, 0.71, 0.93})
      if (psi(-s * psi.hi) != psi(s * psi.hi)) even = false;
  QuadratureConfig icfg = cfg;
  icfg.abs_tol = cfg.abs_tol * 0.1;
  icfg.rel_tol = cfg.rel_tol * 0.1;
  RealFn f = [&](double x) {
    const double p = psi(x);
    if (p == 0.0) return 0.0;
    return p * frac_laplacian_compact(psi, 0.5, x, icfg);
  };
  std::vector<InteriorPoint> sp = kink_splits(psi);
  if (even) {
    std::vector<InteriorPoint> spp;
    for (const InteriorPoint& q : sp)
      if (q.x > 0.0) spp.push_back(q);
    IntegrationResult half = integrate_line_ex(
        f, 0.0, psi.hi, Endpoint::regular(), Endpoint::steep(), spp, cfg);
    return {2.0 * half.value, 2.0 * half.error};
  }
  return integrate_line_ex(f, psi.lo, psi.hi, Endpoint::steep(),
                           Endpoint::steep(), sp, cfg);
}

CompactProfile counterexample_family(double b, double t) {
  if (!(b > -1.0 && b < 0.0))
    throw DomainError("counterexample_family: b must lie in (-1, 0)");
  if (!(t > 0.0 && t <= 0.1))
    throw DomainError("counterexample_family: t must lie in (0, 0.1]");
  CompactProfile phi1 = cutoff_phi1();
  CompactProfile phi2 = cutoff_phi2();
  CompactProfile out;
  out.lo = 0.0;
  out.hi = 2.0;
  out.kinks = {1.0 - 2.0 * t, 1.0 - t,       1.0 + t,   1.0 + 2.0 * t,
               0.5,           1.5,           0.25,      1.75};
  const double amp = 2.0 * (1.0 - b);
  const double lt = std::log(1.0 / t);
  out.fn = [phi1, phi2, amp, lt, t](double x) {
    const double s = std::abs(x - 1.0);
    const double psi_t = (s <= 0.5) ? 1.0 - phi2(s / t) : phi1(s);
    const double core = phi2(s / t) * lt + (s > 0.0 ? psi_t * std::log(1.0 / s) : 0.0);
    return amp * core;
  };
  return out;
}

GapReport counterexample_gap(double b, double t, const LiouvilleParams& lp,
                             const QuadratureConfig& cfg) {
  if (lp.b != b)
    throw DomainError("counterexample_gap: lp must carry the same b");
  CompactProfile v = counterexample_family(b, t);
  return onofri_gap(v, lp, cfg);
}

PerturbationCheck perturbation_expansion_check(const MinimizerResult& m,
                                               const CompactProfile& v,
                                               double eps,
                                               const CknParams& params,
                                               const QuadratureConfig& cfg) {
  if (!m.converged)
    throw NotConverged("perturbation check needs a converged minimizer");
  if (std::abs(v(0.5) - v(-0.5)) > 1e-14)
    throw DomainError("perturbation check: v must be even");
  const GridFunction& u = m.u;
  const auto& nodes = u.positive_nodes();
  const std::size_t mdim = nodes.size();

  NonlocalOperator op(u, params.gamma, params.alpha, cfg);
  const std::vector<double>& M = op.matrix();

  std::vector<double> uvals = u.values();
  std::vector<double> vv(mdim), wv(mdim);
  for (std::size_t i = 0; i < mdim; ++i) {
    vv[i] = v(nodes[i]);
    wv[i] = (1.0 + eps * vv[i]) * uvals[i];
  }
  // nodal cell weights
  std::vector<double> omega(mdim);
  for (std::size_t i = 0; i < mdim; ++i) {
    const double el = i == 0 ? nodes[0] * std::sqrt(nodes[0] / nodes[1])
                             : std::sqrt(nodes[i - 1] * nodes[i]);
    const double er = i + 1 == mdim
                          ? nodes[mdim - 1] * std::sqrt(nodes[mdim - 1] /
                                                        nodes[mdim - 2])
                          : std::sqrt(nodes[i] * nodes[i + 1]);
    omega[i] = er - el;
  }
  auto form = [&](const std::vector<double>& a,
                  const std::vector<double>& weightfn) {
    // 2 * sum omega * weightfn_i * (M a)_i  (even integrand over R)
    std::vector<double> Ma = matvec(M, a);
    std::vector<double> terms(mdim);
    for (std::size_t i = 0; i < mdim; ++i)
      terms[i] = 2.0 * omega[i] * weightfn[i] * Ma[i];
    return pairwise_sum(terms);
  };

  PerturbationCheck out;
  out.direct = form(wv, wv);
  out.lambda = form(uvals, uvals);

  const double bp = params.beta * params.p;
  auto wmass = [&](const std::vector<double>& mult) {
    std::vector<double> terms(mdim);
    for (std::size_t i = 0; i < mdim; ++i)
      terms[i] = 2.0 * omega[i] * mult[i] * std::pow(nodes[i], -bp) *
                 std::pow(uvals[i], params.p);
    return pairwise_sum(terms);
  };
  out.I1 = wmass(vv) / params.p;
  std::vector<double> v2(mdim);
  for (std::size_t i = 0; i < mdim; ++i) v2[i] = vv[i] * vv[i];
  out.I21 = wmass(v2) / params.p;

  // I22 = int u^2 v L v
  GridFunction vg = u.with_values(vv);
  vg.tail = Extrap::zero();
  vg.origin = Extrap::const_plus_power(v(0.0), 0.0, 1.0);
  {
    std::vector<double> u2v(mdim);
    for (std::size_t i = 0; i < mdim; ++i)
      u2v[i] = uvals[i] * uvals[i] * vv[i];
    out.I22 = form(vg.values(), u2v);
  }
  // I23 = int u v B(u, v)
  {
    std::vector<double> terms(mdim);
    for (std::size_t i = 0; i < mdim; ++i) {
      if (vv[i] == 0.0) {
        terms[i] = 0.0;
        continue;
      }
      terms[i] = 2.0 * omega[i] * uvals[i] * vv[i] *
                 op.bilinear(u, vg, nodes[i]);
    }
    out.I23 = pairwise_sum(terms);
  }
  out.I2 = out.I21 + out.I22 - out.I23;
  out.decomposed = out.lambda + 2.0 * eps * out.I1 + eps * eps * out.I2;
  out.diff = std::abs(out.direct - out.decomposed);
  return out;
}

}  // namespace ckn
