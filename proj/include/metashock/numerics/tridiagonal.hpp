#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "metashock/error.hpp"

namespace metashock::numerics {

/// Tridiagonal matrix in band storage: row i holds (lower[i], diag[i], upper[i]);
/// lower[0] and upper[n-1] are ignored.
struct Tridiagonal {
  std::vector<double> lower, diag, upper;

  explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
  std::size_t size() const { return diag.size(); }

  std::vector<double> apply(std::span<const double> x) const {
    const std::size_t n = size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += lower[i] * x[i - 1];
      if (i + 1 < n) s += upper[i] * x[i + 1];
      y[i] = s;
    }
    return y;
  }
};

/// Gaussian elimination with partial pivoting (the dgtsv scheme). Stable for the
/// nearly singular shifted systems of inverse iteration as well as Newton Jacobians.
inline std::vector<double> solve(const Tridiagonal& m, std::span<const double> rhs) {
  const std::size_t n = m.size();
  if (n == 0) return {};
  std::vector<double> dl(m.lower.begin() + 1, m.lower.end());
  std::vector<double> d = m.diag;
  std::vector<double> du(m.upper.begin(), m.upper.end() - 1);
  std::vector<double> du2(n > 2 ? n - 2 : 0, 0.0);
  std::vector<double> b(rhs.begin(), rhs.end());

  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) throw Error(ErrorKind::ConvergenceFailure, "singular tridiagonal system");
      const double factor = dl[i] / d[i];
      d[i + 1] -= factor * du[i];
      b[i + 1] -= factor * b[i];
      if (i + 2 < n) du2[i] = 0.0;
    } else {
      const double factor = d[i] / dl[i];
      d[i] = dl[i];
      const double temp = d[i + 1];
      d[i + 1] = du[i] - factor * temp;
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -factor * du2[i];
      }
      du[i] = temp;
      std::swap(b[i], b[i + 1]);
      b[i + 1] -= factor * b[i];
    }
  }
  if (d[n - 1] == 0.0) throw Error(ErrorKind::ConvergenceFailure, "singular tridiagonal system");

  std::vector<double> x(n);
  x[n - 1] = b[n - 1] / d[n - 1];
  if (n > 1) x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
  for (std::size_t k = n - 2; k-- > 0;) {
    x[k] = (b[k] - du[k] * x[k + 1] - du2[k] * x[k + 2]) / d[k];
  }
  return x;
}

}  // namespace metashock::numerics
