#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "metashock/error.hpp"
#include "metashock/numerics/tridiagonal.hpp"

namespace metashock::numerics {

struct EigenPair {
  double value;
  std::vector<double> vector;  // Euclidean unit norm
  int inverse_iterations;
};

/// Eigenpairs of a real symmetric tridiagonal matrix (diagonal d, off-diagonal e)
/// by Sturm-sequence bisection and inverse iteration.
class SymmetricTridiagonalEigen {
 public:
  SymmetricTridiagonalEigen(std::vector<double> diag, std::vector<double> offdiag)
      : d_(std::move(diag)), e_(std::move(offdiag)) {
    if (d_.empty() || e_.size() + 1 != d_.size())
      throw Error(ErrorKind::InvalidArgument, "tridiagonal band sizes do not match");
    lo_ = std::numeric_limits<double>::max();
    hi_ = std::numeric_limits<double>::lowest();
    for (std::size_t i = 0; i < d_.size(); ++i) {
      double r = 0.0;
      if (i > 0) r += std::abs(e_[i - 1]);
      if (i + 1 < d_.size()) r += std::abs(e_[i]);
      lo_ = std::min(lo_, d_[i] - r);
      hi_ = std::max(hi_, d_[i] + r);
    }
    norm_ = std::max(std::abs(lo_), std::abs(hi_));
  }

  std::size_t size() const { return d_.size(); }

  /// Number of eigenvalues strictly smaller than x.
  int count_below(double x) const {
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    int count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < d_.size(); ++i) {
      q = d_[i] - x - (i > 0 ? e_[i - 1] * e_[i - 1] / q : 0.0);
      if (std::abs(q) < tiny) q = -tiny;
      if (q < 0.0) ++count;
    }
    return count;
  }

  /// k-th largest eigenvalue (k = 1 is the largest), bisected to floating-point resolution.
  double eigenvalue_descending(int k) const {
    const int n = static_cast<int>(d_.size());
    const int below = n - k;  // eigenvalue is the (below+1)-th smallest
    double a = lo_ - 1e-12 * (1.0 + norm_), b = hi_ + 1e-12 * (1.0 + norm_);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (count_below(mid) > below)
        b = mid;
      else
        a = mid;
    }
    return 0.5 * (a + b);
  }

  /// Inverse iteration for the eigenvector of `value`, orthogonalized against `previous`.
  EigenPair eigenpair(double value, const std::vector<std::vector<double>>& previous,
                      int max_sweeps = 50) const {
    const std::size_t n = d_.size();
    Tridiagonal shifted(n);
    const double perturb = std::numeric_limits<double>::epsilon() * (1.0 + norm_);
    for (std::size_t i = 0; i < n; ++i) {
      shifted.diag[i] = d_[i] - value + perturb;
      if (i > 0) shifted.lower[i] = e_[i - 1];
      if (i + 1 < n) shifted.upper[i] = e_[i];
    }
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::sin(0.7 * static_cast<double>(i) + 0.3);
    normalize(v);
    int sweeps = 0;
    double change = 1.0;
    for (; sweeps < max_sweeps; ++sweeps) {
      auto w = solve(shifted, v);
      for (const auto& p : previous) orthogonalize(w, p);
      normalize(w);
      double dot = std::inner_product(w.begin(), w.end(), v.begin(), 0.0);
      if (dot < 0.0)
        for (auto& x : w) x = -x;
      change = 1.0 - std::abs(dot);
      v = std::move(w);
      if (change < 1e-14 && sweeps >= 2) break;
    }
    if (change > 1e-10) {
      std::ostringstream msg;
      msg << "inverse iteration stalled for eigenvalue " << value << " after " << sweeps
          << " sweeps (last change " << change << ")";
      throw Error(ErrorKind::ConvergenceFailure, msg.str());
    }
    return {value, std::move(v), sweeps + 1};
  }

  std::vector<EigenPair> largest(int k) const {
    std::vector<EigenPair> out;
    std::vector<std::vector<double>> basis;
    for (int j = 1; j <= k; ++j) {
      auto pair = eigenpair(eigenvalue_descending(j), basis);
      basis.push_back(pair.vector);
      out.push_back(std::move(pair));
    }
    return out;
  }

  double norm() const { return norm_; }

 private:
  static void normalize(std::vector<double>& v) {
    const double s = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    for (auto& x : v) x /= s;
  }
  static void orthogonalize(std::vector<double>& v, const std::vector<double>& p) {
    const double c = std::inner_product(v.begin(), v.end(), p.begin(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * p[i];
  }

  std::vector<double> d_, e_;
  double lo_, hi_, norm_;
};

}  // namespace metashock::numerics
