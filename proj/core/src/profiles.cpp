#include "ckn/profiles.hpp"

#include <cmath>
#include <random>

#include "ckn/errors.hpp"

namespace ckn {

double smoothstep(double s, int order) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  switch (order) {
    case 1:
      return s * s * (3.0 - 2.0 * s);
    case 2:
      return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
    case 3:
      return s * s * s * s * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s)));
    case 4:
      return s * s * s * s * s *
             (126.0 + s * (-420.0 + s * (540.0 + s * (-315.0 + 70.0 * s))));
    default:
      throw DomainError("smoothstep: order must lie in 1..4");
  }
}

CompactProfile plateau(double inner, double outer, int order) {
  if (!(0.0 < inner && inner < outer))
    throw DomainError("plateau: need 0 < inner < outer");
  CompactProfile p;
  p.lo = -outer;
  p.hi = outer;
  p.kinks = {inner, outer};
  p.fn = [inner, outer, order](double x) {
    const double ax = std::abs(x);
    if (ax <= inner) return 1.0;
    if (ax >= outer) return 0.0;
    return smoothstep((outer - ax) / (outer - inner), order);
  };
  return p;
}

CompactProfile ring(double a, double b, double w, int order) {
  if (!(0.0 < a - w && a <= b && w > 0.0))
    throw DomainError("ring: need 0 < a-w and a <= b, w > 0");
  CompactProfile p;
  p.lo = -(b + w);
  p.hi = b + w;
  p.kinks = {a - w, a, b, b + w};
  p.fn = [a, b, w, order](double x) {
    const double ax = std::abs(x);
    if (ax <= a - w || ax >= b + w) return 0.0;
    const double rise = smoothstep((ax - (a - w)) / w, order);
    const double fall = smoothstep(((b + w) - ax) / w, order);
    return rise * fall;
  };
  return p;
}

CompactProfile cutoff_phi() { return plateau(1.0, 2.0); }
CompactProfile cutoff_phi1() { return plateau(0.75, 1.0); }
CompactProfile cutoff_phi2() { return plateau(1.0, 2.0); }

std::vector<CompactProfile> bump_battery(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(0.3, 1.5);
  std::uniform_real_distribution<double> ctr(-2.0, 2.0);
  std::uniform_real_distribution<double> wid(0.5, 2.0);
  std::vector<CompactProfile> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double A = amp(rng);
    const double c = ctr(rng);
    const double w = wid(rng);
    CompactProfile base = plateau(0.5 * w, w);
    CompactProfile v;
    v.lo = c - w;
    v.hi = c + w;
    v.kinks = {};
    for (double k : base.kinks) {
      v.kinks.push_back(c - k);
      v.kinks.push_back(c + k);
    }
    v.fn = [base, A, c](double x) { return A * base(x - c); };
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace ckn
