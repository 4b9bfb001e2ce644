#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace ckn {

// An evaluable function supported in [lo, hi] (identically zero outside).
struct CompactProfile {
  std::function<double(double)> fn;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> kinks;  // radii where the profile is only C^2

  double operator()(double x) const {
    return (x <= lo || x >= hi) ? 0.0 : fn(x);
  }
};

// Polynomial smoothstep of matching order k: 0 at s<=0, 1 at s>=1, C^k
// across the joints (k = 2 is the quintic default).
double smoothstep(double s, int order = 2);

// Even plateau: 1 on [-inner, inner], 0 outside [-outer, outer],
// smoothstep transition in between; `order` sets the smoothness class.
CompactProfile plateau(double inner, double outer, int order = 2);

// Even annular bump: 1 on [a, b] in |x|, 0 outside [a-w, b+w].
CompactProfile ring(double a, double b, double w, int order = 2);

// The three fixed cutoffs used throughout: phi (1 on B1, support B2),
// phi1 (1 on (-3/4,3/4), support (-1,1)), phi2 (1 on (-1,1), support (-2,2)).
CompactProfile cutoff_phi();
CompactProfile cutoff_phi1();
CompactProfile cutoff_phi2();

// Deterministic battery of compactly supported bumps
// v(x) = A * plateau((x - c)/w); amplitudes, centers, widths drawn from a
// seeded generator.
std::vector<CompactProfile> bump_battery(int count, std::uint64_t seed);

}  // namespace ckn
