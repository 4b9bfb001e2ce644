#include "ckn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ckn/errors.hpp"

namespace ckn {

double Extrap::eval(double ax) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::power:
      return c1 * std::pow(ax, expo);
    case Kind::const_plus_power:
      return c0 + c1 * std::pow(ax, expo);
    case Kind::const_plus_log:
      return c0 + c1 * std::log(ax);
  }
  return 0.0;
}

std::vector<double> log_grid(double r_min, double r_max, int nodes_per_decade) {
  if (!(r_min > 0.0 && r_max > r_min))
    throw DomainError("log_grid: need 0 < r_min < r_max");
  if (nodes_per_decade <= 0) throw DomainError("log_grid: n per decade <= 0");
  const double t0 = std::log10(r_min);
  const double t1 = std::log10(r_max);
  // Anchor the ladder at integer powers of ten so that 1.0 is a node.
  const long k0 = std::lround(std::ceil(t0 * nodes_per_decade - 1e-9));
  const long k1 = std::lround(std::floor(t1 * nodes_per_decade + 1e-9));
  std::vector<double> nodes;
  nodes.reserve(k1 - k0 + 3);
  if (std::pow(10.0, static_cast<double>(k0) / nodes_per_decade) >
      r_min * (1.0 + 1e-12))
    nodes.push_back(r_min);
  for (long k = k0; k <= k1; ++k)
    nodes.push_back(std::pow(10.0, static_cast<double>(k) / nodes_per_decade));
  if (nodes.back() < r_max * (1.0 - 1e-12)) nodes.push_back(r_max);
  return nodes;
}

GridFunction::GridFunction(std::vector<double> pos_nodes,
                           std::vector<double> pos_values, bool even_flag,
                           double decay_exp, double origin_exp)
    : decay_exponent(decay_exp),
      origin_exponent(origin_exp),
      nodes_(std::move(pos_nodes)),
      values_(std::move(pos_values)),
      even_(even_flag) {
  if (!even_) neg_values_ = values_;
  logn_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) logn_[i] = std::log(nodes_[i]);
  validate();
}

void GridFunction::validate() const {
  if (nodes_.empty()) throw DomainError("GridFunction: empty node set");
  if (nodes_.size() != values_.size())
    throw DomainError("GridFunction: node/value size mismatch");
  if (nodes_.front() <= 0.0)
    throw DomainError("GridFunction: nodes must be positive (0 is never a node)");
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (!(nodes_[i] > nodes_[i - 1]))
      throw DomainError("GridFunction: nodes must be strictly increasing");
}

GridFunction GridFunction::sample(const std::function<double(double)>& f,
                                  double r_min, double r_max,
                                  int nodes_per_decade, bool even,
                                  double decay_exponent,
                                  double origin_exponent) {
  std::vector<double> nodes = log_grid(r_min, r_max, nodes_per_decade);
  std::vector<double> vals(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) vals[i] = f(nodes[i]);
  GridFunction g(std::move(nodes), std::move(vals), even, decay_exponent,
                 origin_exponent);
  if (!even)
    for (std::size_t i = 0; i < g.nodes_.size(); ++i)
      g.neg_values_[i] = f(-g.nodes_[i]);
  return g;
}

GridFunction::Stencil GridFunction::stencil(double ax) const {
  const std::size_t n = nodes_.size();
  Stencil st;
  const double t = std::log(ax);
  auto it = std::upper_bound(logn_.begin(), logn_.end(), t);
  long j = std::distance(logn_.begin(), it) - 1;  // cell [j, j+1]
  j = std::clamp<long>(j, 0, static_cast<long>(n) - 2);
  long lo = std::clamp<long>(j - 1, 0, static_cast<long>(n) - 4);
  if (n < 4) {  // degenerate small grids: linear
    st.count = 2;
    st.idx[0] = static_cast<int>(j);
    st.idx[1] = static_cast<int>(j + 1);
    const double t0 = logn_[j], t1 = logn_[j + 1];
    st.w[1] = (t - t0) / (t1 - t0);
    st.w[0] = 1.0 - st.w[1];
    return st;
  }
  st.count = 4;
  for (int k = 0; k < 4; ++k) st.idx[k] = static_cast<int>(lo + k);
  for (int k = 0; k < 4; ++k) {
    double w = 1.0;
    const double tk = logn_[lo + k];
    for (int l = 0; l < 4; ++l) {
      if (l == k) continue;
      w *= (t - logn_[lo + l]) / (tk - logn_[lo + l]);
    }
    st.w[k] = w;
  }
  return st;
}

double GridFunction::interp_side(double ax,
                                 const std::vector<double>& vals) const {
  const Stencil st = stencil(ax);
  double v = 0.0;
  for (int k = 0; k < st.count; ++k) v += st.w[k] * vals[st.idx[k]];
  return v;
}

double GridFunction::operator()(double x) const {
  const double ax = std::abs(x);
  if (ax > nodes_.back()) return tail.eval(ax);
  if (ax < nodes_.front()) return origin.eval(ax);
  if (even_ || x >= 0.0) return interp_side(ax, values_);
  return interp_side(ax, neg_values_);
}

namespace {

// Least squares of vals ~ c0*B0(x) + c1*B1(x) on the index range [i0, i1).
std::pair<double, double> lsq2(const std::vector<double>& xs,
                               const std::vector<double>& vals, std::size_t i0,
                               std::size_t i1,
                               const std::function<double(double)>& B0,
                               const std::function<double(double)>& B1) {
  double a00 = 0, a01 = 0, a11 = 0, b0 = 0, b1 = 0;
  for (std::size_t i = i0; i < i1; ++i) {
    const double f0 = B0(xs[i]), f1 = B1(xs[i]);
    a00 += f0 * f0;
    a01 += f0 * f1;
    a11 += f1 * f1;
    b0 += f0 * vals[i];
    b1 += f1 * vals[i];
  }
  const double det = a00 * a11 - a01 * a01;
  if (det == 0.0) return {0.0, 0.0};
  return {(b0 * a11 - b1 * a01) / det, (a00 * b1 - a01 * b0) / det};
}

}  // namespace

void GridFunction::fit_tail(Extrap::Kind kind, double expo) {
  const double cut = nodes_.back() * 0.1;
  std::size_t i0 = 0;
  while (i0 < nodes_.size() && nodes_[i0] < cut) ++i0;
  if (i0 + 2 > nodes_.size()) i0 = nodes_.size() >= 2 ? nodes_.size() - 2 : 0;
  switch (kind) {
    case Extrap::Kind::zero:
      tail = Extrap::zero();
      break;
    case Extrap::Kind::power: {
      double num = 0, den = 0;
      for (std::size_t i = i0; i < nodes_.size(); ++i) {
        const double p = std::pow(nodes_[i], expo);
        num += values_[i] * p;
        den += p * p;
      }
      tail = Extrap::power(den > 0 ? num / den : 0.0, expo);
      break;
    }
    case Extrap::Kind::const_plus_power: {
      auto [c0, c1] =
          lsq2(nodes_, values_, i0, nodes_.size(),
               [](double) { return 1.0; },
               [expo](double x) { return std::pow(x, expo); });
      tail = Extrap::const_plus_power(c0, c1, expo);
      break;
    }
    case Extrap::Kind::const_plus_log: {
      auto [c0, c1] = lsq2(nodes_, values_, i0, nodes_.size(),
                           [](double) { return 1.0; },
                           [](double x) { return std::log(x); });
      tail = Extrap::const_plus_log(c0, c1);
      break;
    }
  }
}

void GridFunction::fit_origin(Extrap::Kind kind, double expo) {
  const double cut = nodes_.front() * 10.0;
  std::size_t i1 = 0;
  while (i1 < nodes_.size() && nodes_[i1] <= cut) ++i1;
  i1 = std::max<std::size_t>(i1, std::min<std::size_t>(2, nodes_.size()));
  switch (kind) {
    case Extrap::Kind::zero:
      origin = Extrap::zero();
      break;
    case Extrap::Kind::power: {
      double num = 0, den = 0;
      for (std::size_t i = 0; i < i1; ++i) {
        const double p = std::pow(nodes_[i], expo);
        num += values_[i] * p;
        den += p * p;
      }
      origin = Extrap::power(den > 0 ? num / den : 0.0, expo);
      break;
    }
    case Extrap::Kind::const_plus_power: {
      auto [c0, c1] = lsq2(nodes_, values_, 0, i1,
                           [](double) { return 1.0; },
                           [expo](double x) { return std::pow(x, expo); });
      origin = Extrap::const_plus_power(c0, c1, expo);
      break;
    }
    case Extrap::Kind::const_plus_log: {
      auto [c0, c1] = lsq2(nodes_, values_, 0, i1,
                           [](double) { return 1.0; },
                           [](double x) { return std::log(x); });
      origin = Extrap::const_plus_log(c0, c1);
      break;
    }
  }
}

double GridFunction::ModelMap::basis1(double ax) const {
  switch (kind) {
    case Extrap::Kind::zero:
      return 0.0;
    case Extrap::Kind::power:
    case Extrap::Kind::const_plus_power:
      return std::pow(ax, expo);
    case Extrap::Kind::const_plus_log:
      return std::log(ax);
  }
  return 0.0;
}

namespace {

GridFunction::ModelMap model_map_for(const std::vector<double>& nodes,
                                     std::size_t i0, std::size_t i1,
                                     Extrap::Kind kind, double expo) {
  GridFunction::ModelMap mm;
  mm.kind = kind;
  mm.expo = expo;
  mm.i0 = i0;
  const std::size_t n = i1 - i0;
  mm.g0.assign(n, 0.0);
  mm.g1.assign(n, 0.0);
  if (kind == Extrap::Kind::zero || n == 0) return mm;
  if (kind == Extrap::Kind::power) {
    double den = 0.0;
    for (std::size_t i = i0; i < i1; ++i)
      den += std::pow(nodes[i], expo) * std::pow(nodes[i], expo);
    if (den > 0.0)
      for (std::size_t j = 0; j < n; ++j)
        mm.g1[j] = std::pow(nodes[i0 + j], expo) / den;
    return mm;
  }
  auto B1 = [kind, expo](double x) {
    return kind == Extrap::Kind::const_plus_log ? std::log(x)
                                                : std::pow(x, expo);
  };
  double a00 = 0, a01 = 0, a11 = 0;
  for (std::size_t i = i0; i < i1; ++i) {
    const double f1 = B1(nodes[i]);
    a00 += 1.0;
    a01 += f1;
    a11 += f1 * f1;
  }
  const double det = a00 * a11 - a01 * a01;
  if (det == 0.0) return mm;
  for (std::size_t j = 0; j < n; ++j) {
    const double f1 = B1(nodes[i0 + j]);
    // (c0, c1) = N^{-1} (1, f1)^T contribution of node j
    mm.g0[j] = (a11 * 1.0 - a01 * f1) / det;
    mm.g1[j] = (a00 * f1 - a01 * 1.0) / det;
  }
  return mm;
}

}  // namespace

GridFunction::ModelMap GridFunction::tail_map() const {
  const double cut = nodes_.back() * 0.1;
  std::size_t i0 = 0;
  while (i0 < nodes_.size() && nodes_[i0] < cut) ++i0;
  if (i0 + 2 > nodes_.size()) i0 = nodes_.size() >= 2 ? nodes_.size() - 2 : 0;
  return model_map_for(nodes_, i0, nodes_.size(), tail.kind, tail.expo);
}

GridFunction::ModelMap GridFunction::origin_map() const {
  const double cut = nodes_.front() * 10.0;
  std::size_t i1 = 0;
  while (i1 < nodes_.size() && nodes_[i1] <= cut) ++i1;
  i1 = std::max<std::size_t>(i1, std::min<std::size_t>(2, nodes_.size()));
  return model_map_for(nodes_, 0, i1, origin.kind, origin.expo);
}

double GridFunction::refit_decay_exponent() {
  const double cut = nodes_.back() * 0.1;
  std::size_t i0 = 0;
  while (i0 < nodes_.size() && nodes_[i0] < cut) ++i0;
  if (i0 + 2 > nodes_.size()) i0 = nodes_.size() - 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t c = 0;
  for (std::size_t i = i0; i < nodes_.size(); ++i) {
    if (!(values_[i] > 0.0) && !(values_[i] < 0.0)) continue;
    const double lx = std::log(nodes_[i]);
    const double ly = std::log(std::abs(values_[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++c;
  }
  if (c < 2) return decay_exponent;
  const double n = static_cast<double>(c);
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double d = -slope;
  if (std::isfinite(d) && d > 0.01 && d < 16.0) decay_exponent = d;
  return decay_exponent;
}

GridFunction GridFunction::with_values(std::vector<double> v) const {
  GridFunction g = *this;
  if (v.size() != nodes_.size())
    throw DomainError("with_values: size mismatch");
  g.values_ = std::move(v);
  if (!g.even_) g.neg_values_ = g.values_;
  return g;
}

GridFunction GridFunction::map(
    const std::function<double(double, double)>& fxv) const {
  GridFunction g = *this;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    g.values_[i] = fxv(nodes_[i], values_[i]);
  if (!even_)
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      g.neg_values_[i] = fxv(-nodes_[i], neg_values_[i]);
  return g;
}

}  // namespace ckn
