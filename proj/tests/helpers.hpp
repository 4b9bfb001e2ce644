#pragma once

#include <cmath>
#include <vector>

#include "ckn/grid.hpp"
#include "ckn/profiles.hpp"

namespace testutil {

// Composite Simpson weights in log space for the positive nodes of a grid
// sampled on exact decade boundaries (uniform t-spacing).  Returns weights
// w_i such that  int_0^inf f dx ~= sum w_i f(x_i)  for decaying f.
inline std::vector<double> simpson_log_weights(
    const std::vector<double>& nodes) {
  const std::size_t m = nodes.size();
  std::vector<double> wt(m, 0.0);
  const double h = std::log(nodes[1] / nodes[0]);
  std::size_t end = m;
  if (m % 2 == 0) end = m - 3;  // close the last three cells with 3/8
  for (std::size_t i = 0; i + 2 < end + 1; i += 2) {
    wt[i] += h / 3.0;
    wt[i + 1] += 4.0 * h / 3.0;
    wt[i + 2] += h / 3.0;
  }
  if (m % 2 == 0) {
    wt[m - 4] += 3.0 * h / 8.0;
    wt[m - 3] += 9.0 * h / 8.0;
    wt[m - 2] += 9.0 * h / 8.0;
    wt[m - 1] += 3.0 * h / 8.0;
  }
  for (std::size_t i = 0; i < m; ++i) wt[i] *= nodes[i];  // dx = x dt
  return wt;
}

// Even bump sampled on a grid with an exact zero tail model.
inline ckn::GridFunction sample_compact(const ckn::CompactProfile& v,
                                        double r_min, double r_max, int n) {
  ckn::GridFunction g = ckn::GridFunction::sample(
      [&v](double x) { return v(x); }, r_min, r_max, n, true, 8.0, 0.0);
  g.tail = ckn::Extrap::zero();
  g.origin = ckn::Extrap::const_plus_power(v(0.0), 0.0, 1.0);
  return g;
}

}  // namespace testutil
