#include "ckn/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <sstream>

#include "ckn/errors.hpp"
#include "ckn/summation.hpp"

namespace ckn {
namespace {

// 15-point Kronrod rule with embedded 7-point Gauss rule (QUADPACK dqk15).
constexpr int kGK = 8;
constexpr double kXgk[kGK] = {
    0.9914553711208126392068547, 0.9491079123427585245261897,
    0.8648644233597690727897128, 0.7415311855993944398638648,
    0.5860872354676911302941448, 0.4058451513773971669066064,
    0.2077849550078984676006894, 0.0};
constexpr double kWgk[kGK] = {
    0.0229353220105292249637320, 0.0630920926299785532907007,
    0.1047900103222501838398763, 0.1406532597155259187451896,
    0.1690047266392679028265834, 0.1903505780647854099132564,
    0.2044329400752988924141620, 0.2094821410847278280129992};
constexpr double kWg[4] = {
    0.1294849661688696932706114, 0.2797053914892766679014678,
    0.3818300505051189449503698, 0.4179591836734693877551020};

// A segment integrates f over x in map(u_lo..u_hi).  kind 0 is the identity
// map; kind 1 is the polynomial endpoint substitution x = c + s*u^m, which
// turns a declared power singularity at x = c into a smooth integrand.
struct SegMap {
  int kind = 0;
  double c = 0.0, s = 1.0;
  int m = 1;

  double x(double u) const { return kind == 0 ? u : c + s * std::pow(u, m); }
  double jac(double u) const {
    return kind == 0 ? 1.0 : std::abs(s) * m * std::pow(u, m - 1);
  }
};

struct Segment {
  SegMap map;
  double u_lo = 0.0, u_hi = 1.0;
  double value = 0.0, err = 0.0;
  std::uint64_t id = 0;
  bool frozen = false;  // too narrow to refine further
};

struct GkOut {
  double value = 0.0, err = 0.0, resabs = 0.0;
};

GkOut gk15(const RealFn& f, const Segment& seg) {
  const double half = 0.5 * (seg.u_hi - seg.u_lo);
  const double mid = 0.5 * (seg.u_hi + seg.u_lo);
  double kr = 0.0, gs = 0.0, resabs = 0.0;
  for (int i = 0; i < kGK; ++i) {
    const int nrep = (i == kGK - 1) ? 1 : 2;
    for (int r = 0; r < nrep; ++r) {
      const double u = mid + (r == 0 ? -1.0 : 1.0) * half * kXgk[i];
      const double x = seg.map.x(u);
      // Peeled points that round onto the singular edge contribute nothing:
      // the substituted integrand vanishes there by construction.
      const double g =
          (seg.map.kind == 1 && x == seg.map.c) ? 0.0 : f(x) * seg.map.jac(u);
      if (!std::isfinite(g)) {
        std::ostringstream os;
        os << "integrand non-finite at x = " << x;
        throw NonConvergent(os.str());
      }
      kr += kWgk[i] * g;
      resabs += kWgk[i] * std::abs(g);
      if (i % 2 == 1) gs += kWg[i / 2] * g;
    }
  }
  kr *= half;
  gs *= half;
  resabs *= half;
  double est = std::abs(kr - gs);
  est = std::max(est, 50.0 * std::numeric_limits<double>::epsilon() * resabs);
  return {kr, est, resabs};
}

int substitution_order(double strength) {
  if (strength <= 0.0) return 3;
  const double m = 2.0 / (1.0 - strength);
  return std::clamp(static_cast<int>(std::ceil(m)), 3, 48);
}

struct Engine {
  const RealFn& f;
  const QuadratureConfig& cfg;
  std::vector<Segment> segs;
  std::uint64_t next_id = 0;
  double domain_lo = 0.0, domain_hi = 0.0;

  explicit Engine(const RealFn& fn, const QuadratureConfig& c) : f(fn), cfg(c) {}

  void add(SegMap map, double lo, double hi, int pieces) {
    pieces = std::max(1, pieces);
    for (int k = 0; k < pieces; ++k) {
      Segment s;
      s.map = map;
      s.u_lo = lo + (hi - lo) * k / pieces;
      s.u_hi = lo + (hi - lo) * (k + 1) / pieces;
      s.id = next_id++;
      segs.push_back(s);
    }
  }

  // Peeled endpoint extending `span` from `edge` into the interval;
  // sign = +1 peels a left endpoint, -1 a right endpoint.
  void add_peel(double edge, double span, int sign, double strength) {
    SegMap m;
    m.kind = 1;
    m.c = edge;
    m.s = sign * span;
    m.m = substitution_order(strength);
    add(m, 0.0, 1.0, std::max(2, cfg.n_cells / 4));
  }

  IntegrationResult run() {
    struct Cmp {
      const std::vector<Segment>* segs;
      bool operator()(std::size_t a, std::size_t b) const {
        const Segment& sa = (*segs)[a];
        const Segment& sb = (*segs)[b];
        if (sa.err != sb.err) return sa.err < sb.err;
        return sa.id > sb.id;
      }
    };

    double tot = 0.0, errsum = 0.0;
    for (Segment& s : segs) {
      const GkOut o = gk15(f, s);
      s.value = o.value;
      s.err = o.err;
      tot += s.value;
      errsum += s.err;
    }
    std::priority_queue<std::size_t, std::vector<std::size_t>, Cmp> heap(
        Cmp{&segs});
    for (std::size_t i = 0; i < segs.size(); ++i) heap.push(i);

    if (cfg.adaptive) {
      while (true) {
        const double tol =
            std::max(cfg.abs_tol, cfg.rel_tol * std::abs(tot));
        if (errsum <= tol) break;
        if (heap.empty()) {
          throw NonConvergent(
              "refinement stalled at roundoff before reaching tolerance");
        }
        if (static_cast<int>(segs.size()) >= cfg.max_segments) {
          const Segment& w = segs[heap.top()];
          std::ostringstream os;
          os << "refinement budget exhausted on [" << domain_lo << ", "
             << domain_hi << "]: error " << errsum << " > tol " << tol
             << "; worst segment near x = "
             << w.map.x(0.5 * (w.u_lo + w.u_hi)) << " (seg err " << w.err
             << ", mis-declared singularity strength?)";
          throw NonConvergent(os.str());
        }
        const std::size_t worst = heap.top();
        heap.pop();
        Segment& w = segs[worst];
        const double width = w.u_hi - w.u_lo;
        const double uscale =
            std::max({1.0, std::abs(w.u_lo), std::abs(w.u_hi)});
        if (width < 64.0 * std::numeric_limits<double>::epsilon() * uscale) {
          w.frozen = true;  // keep its error contribution, stop refining
          continue;
        }
        const double old_v = w.value, old_e = w.err;
        Segment right = w;
        right.id = next_id++;
        right.u_lo = 0.5 * (w.u_lo + w.u_hi);
        w.u_hi = right.u_lo;
        const GkOut ol = gk15(f, w);
        w.value = ol.value;
        w.err = ol.err;
        const GkOut orr = gk15(f, right);
        right.value = orr.value;
        right.err = orr.err;
        tot += w.value + right.value - old_v;
        errsum += w.err + right.err - old_e;
        segs.push_back(right);  // may reallocate; w is dead past this point
        heap.push(worst);
        heap.push(segs.size() - 1);
      }
    }
    // Deterministic final reduction.
    std::vector<double> vs, es;
    vs.reserve(segs.size());
    es.reserve(segs.size());
    for (const Segment& s : segs) {
      vs.push_back(s.value);
      es.push_back(s.err);
    }
    return {pairwise_sum(vs), pairwise_sum(es)};
  }
};

void build_between(Engine& eng, double L, double R, Endpoint el, Endpoint er,
                   const QuadratureConfig& cfg) {
  if (!(R > L)) return;
  const double width = R - L;
  const bool gl = el.graded || el.strength > 0.0;
  const bool gr = er.graded || er.strength > 0.0;
  if (el.strength >= 1.0 || er.strength >= 1.0)
    throw DomainError("endpoint singularity strength must be < 1");
  const double dl = gl ? width * 0.5 : 0.0;
  const double dr = gr ? width * 0.5 : 0.0;
  if (gl) eng.add_peel(L, dl, +1, el.strength);
  if (gr) eng.add_peel(R, dr, -1, er.strength);
  const double ml = L + dl, mr = R - dr;
  if (mr > ml) {
    SegMap id;
    eng.add(id, ml, mr, std::max(2, cfg.n_cells / 2));
  }
}

}  // namespace

void QuadratureConfig::validate() const {
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    throw DomainError("r_max must be finite and positive");
  if (n_cells <= 0) throw DomainError("n_cells must be positive");
  if (!(grading >= 1.0)) throw DomainError("grading must be >= 1");
  if (!(pv_exclusion > 0.0 && pv_exclusion < 1.0))
    throw DomainError("pv_exclusion must lie in (0,1)");
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
    throw DomainError("tolerances must be positive");
}

IntegrationResult integrate_line_ex(const RealFn& f, double a, double b,
                                    Endpoint ea, Endpoint eb,
                                    const std::vector<InteriorPoint>& splits,
                                    const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(b > a)) {
    if (b == a) return {0.0, 0.0};
    throw DomainError("integrate_line: empty interval (b < a)");
  }
  Engine eng(f, cfg);
  eng.domain_lo = a;
  eng.domain_hi = b;
  std::vector<InteriorPoint> sp;
  for (const InteriorPoint& p : splits)
    if (p.x > a && p.x < b) sp.push_back(p);
  std::sort(sp.begin(), sp.end(),
            [](const InteriorPoint& u, const InteriorPoint& v) {
              return u.x < v.x;
            });
  sp.erase(std::unique(sp.begin(), sp.end(),
                       [](const InteriorPoint& u, const InteriorPoint& v) {
                         return u.x == v.x;
                       }),
           sp.end());
  double left = a;
  Endpoint el = ea;
  for (const InteriorPoint& p : sp) {
    build_between(eng, left, p.x, el, Endpoint::singular(p.strength), cfg);
    left = p.x;
    el = Endpoint::singular(p.strength);
  }
  build_between(eng, left, b, el, eb, cfg);
  return eng.run();
}

IntegrationResult integrate_line(const RealFn& f, double a, double b,
                                 double exponent_a, double exponent_b,
                                 const QuadratureConfig& cfg) {
  if (exponent_a >= 1.0 || exponent_b >= 1.0)
    throw DomainError("endpoint exponent of integrable type required (< 1)");
  Endpoint ea = exponent_a > 0.0 ? Endpoint::singular(exponent_a)
                                 : Endpoint::regular();
  Endpoint eb = exponent_b > 0.0 ? Endpoint::singular(exponent_b)
                                 : Endpoint::regular();
  return integrate_line_ex(f, a, b, ea, eb, {}, cfg);
}

IntegrationResult pv_integrate(const RealFn& g, double a, double b, double x0,
                               const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(x0 > a && x0 < b)) throw DomainError("pv_integrate: x0 outside (a,b)");
  const double h0 = cfg.pv_exclusion * std::min(x0 - a, b - x0);
  IntegrationResult left = integrate_line_ex(
      g, a, x0 - h0, Endpoint::regular(), Endpoint::steep(), {}, cfg);
  IntegrationResult right = integrate_line_ex(
      g, x0 + h0, b, Endpoint::steep(), Endpoint::regular(), {}, cfg);
  // Excluded band, recovered through the integrable symmetric sum.  The
  // innermost slice is closed by its first-order Taylor value: below t_floor
  // the offsets x0 +- t are no longer resolvable in floating point.
  RealFn sym = [&g, x0](double t) { return g(x0 + t) + g(x0 - t); };
  const double t_floor =
      512.0 * std::numeric_limits<double>::epsilon() *
      std::max({1.0, std::abs(x0), h0});
  // For pole-type g the symmetric sum extends analytically through t = 0, so
  // a plain layout is both accurate and free of the cancellation noise that
  // graded evaluation points near t = 0 would see.
  IntegrationResult band = integrate_line_ex(
      sym, t_floor, h0, Endpoint::regular(), Endpoint::regular(), {}, cfg);
  const double s_floor = sym(t_floor);
  const double inner_value = s_floor * t_floor;
  const double inner_err = 2.0 * std::abs(inner_value) + 1e-300;
  return {left.value + right.value + band.value + inner_value,
          left.error + right.error + band.error + inner_err};
}

IntegrationResult integrate_halfline(const RealFn& f, double a, double decay,
                                     Endpoint ea, const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(a > 0.0)) throw DomainError("integrate_halfline requires a > 0");
  if (!(decay > 1.0))
    throw DomainError("integrate_halfline requires decay exponent > 1");
  const double X = a * 100.0;
  IntegrationResult direct =
      integrate_line_ex(f, a, X, ea, Endpoint::regular(), {}, cfg);
  RealFn inv = [&f](double w) { return f(1.0 / w) / (w * w); };
  IntegrationResult tail = integrate_line_ex(
      inv, 0.0, 1.0 / X, Endpoint::singular(std::max(0.0, 2.0 - decay)),
      Endpoint::regular(), {}, cfg);
  return {direct.value + tail.value, direct.error + tail.error};
}

IntegrationResult integrate_real_line(const RealFn& f,
                                      const std::vector<InteriorPoint>& splits,
                                      double decay, double feature_scale,
                                      const QuadratureConfig& cfg) {
  cfg.validate();
  if (!(decay > 1.0))
    throw DomainError("integrate_real_line requires decay exponent > 1");
  double X = std::max(1.0, feature_scale);
  for (const InteriorPoint& p : splits) X = std::max(X, 4.0 * std::abs(p.x));
  IntegrationResult mid = integrate_line_ex(
      f, -X, X, Endpoint::regular(), Endpoint::regular(), splits, cfg);
  const double ws = std::max(0.0, 2.0 - decay);
  RealFn inv_r = [&f](double w) { return f(1.0 / w) / (w * w); };
  RealFn inv_l = [&f](double w) { return f(-1.0 / w) / (w * w); };
  IntegrationResult tr = integrate_line_ex(
      inv_r, 0.0, 1.0 / X, Endpoint::singular(ws), Endpoint::regular(), {},
      cfg);
  IntegrationResult tl = integrate_line_ex(
      inv_l, 0.0, 1.0 / X, Endpoint::singular(ws), Endpoint::regular(), {},
      cfg);
  return {mid.value + tr.value + tl.value, mid.error + tr.error + tl.error};
}

IntegrationResult integrate_plane_offdiag(
    const std::function<double(double, double)>& F, double a, double b,
    double diagonal_exponent, double axis_exponent_x, double axis_exponent_y,
    const QuadratureConfig& cfg) {
  cfg.validate();
  if (diagonal_exponent >= 1.0)
    throw SingularityTooStrong(
        "effective diagonal exponent must be < 1 after pairing");
  QuadratureConfig inner_cfg = cfg;
  inner_cfg.abs_tol = cfg.abs_tol * 0.2 / std::max(1.0, b - a);
  inner_cfg.rel_tol = cfg.rel_tol * 0.2;

  const double ds = std::max(0.0, diagonal_exponent);
  double max_inner_err = 0.0;
  RealFn outer = [&](double x) {
    RealFn inner = [&F, x](double y) { return F(x, y); };
    std::vector<InteriorPoint> sp;
    if (x == 0.0) {
      sp.push_back({0.0, std::max(ds, axis_exponent_y)});
    } else {
      sp.push_back({x, ds});
      if (axis_exponent_y > 0.0 && 0.0 > a && 0.0 < b)
        sp.push_back({0.0, axis_exponent_y});
    }
    IntegrationResult r = integrate_line_ex(
        inner, a, b, Endpoint::regular(), Endpoint::regular(), sp, inner_cfg);
    max_inner_err = std::max(max_inner_err, r.error);
    return r.value;
  };
  std::vector<InteriorPoint> osp;
  if (axis_exponent_x > 0.0 && 0.0 > a && 0.0 < b)
    osp.push_back({0.0, axis_exponent_x});
  IntegrationResult out = integrate_line_ex(
      outer, a, b, Endpoint::regular(), Endpoint::regular(), osp, cfg);
  return {out.value, out.error + (b - a) * max_inner_err};
}

}  // namespace ckn
