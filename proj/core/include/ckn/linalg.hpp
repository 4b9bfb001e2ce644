#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ckn/errors.hpp"

namespace ckn {

// Dense LU with partial pivoting; solves in place.  Sized for the few-hundred
// node systems the solver produces.
class LuSolver {
 public:
  LuSolver(std::vector<double> a, std::size_t n) : a_(std::move(a)), n_(n) {
    if (a_.size() != n * n) throw DomainError("LuSolver: bad dimensions");
    piv_.resize(n);
    factor();
  }

  std::vector<double> solve(std::vector<double> b) const {
    if (b.size() != n_) throw DomainError("LuSolver: bad rhs");
    for (std::size_t i = 0; i < n_; ++i) {
      if (piv_[i] != i) std::swap(b[i], b[piv_[i]]);
    }
    for (std::size_t i = 1; i < n_; ++i) {
      double s = b[i];
      for (std::size_t j = 0; j < i; ++j) s -= a_[i * n_ + j] * b[j];
      b[i] = s;
    }
    for (std::size_t ii = n_; ii-- > 0;) {
      double s = b[ii];
      for (std::size_t j = ii + 1; j < n_; ++j) s -= a_[ii * n_ + j] * b[j];
      b[ii] = s / a_[ii * n_ + ii];
    }
    return b;
  }

 private:
  void factor() {
    for (std::size_t k = 0; k < n_; ++k) {
      std::size_t p = k;
      double best = std::abs(a_[k * n_ + k]);
      for (std::size_t i = k + 1; i < n_; ++i) {
        const double v = std::abs(a_[i * n_ + k]);
        if (v > best) {
          best = v;
          p = i;
        }
      }
      if (best == 0.0) throw DomainError("LuSolver: singular matrix");
      piv_[k] = p;
      if (p != k)
        for (std::size_t j = 0; j < n_; ++j)
          std::swap(a_[k * n_ + j], a_[p * n_ + j]);
      const double d = a_[k * n_ + k];
      for (std::size_t i = k + 1; i < n_; ++i) {
        const double m = a_[i * n_ + k] / d;
        a_[i * n_ + k] = m;
        for (std::size_t j = k + 1; j < n_; ++j)
          a_[i * n_ + j] -= m * a_[k * n_ + j];
      }
    }
  }

  std::vector<double> a_;
  std::size_t n_;
  std::vector<std::size_t> piv_;
};

inline std::vector<double> matvec(const std::vector<double>& a,
                                  const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    const double* row = a.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

}  // namespace ckn
