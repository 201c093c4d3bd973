#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "metashock/error.hpp"

namespace metashock::numerics {

/// Piecewise cubic Hermite interpolant with Fritsch-Carlson slopes: monotone data
/// stays monotone between the knots.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw Error(ErrorKind::InvalidArgument, "MonotoneCubic needs >= 2 knots");
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (!(x_[i + 1] > x_[i])) throw Error(ErrorKind::InvalidArgument, "knots must be strictly increasing");
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    m_.assign(n, 0.0);
    if (n == 2) {
      m_[0] = m_[1] = delta[0];
      return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) continue;
      const double w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
      m_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
    m_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    m_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }

  double operator()(double x) const {
    const std::size_t n = x_.size();
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin()) - 1;
    const std::size_t j = std::min(i, n - 2);
    const double h = x_[j + 1] - x_[j];
    const double t = (x - x_[j]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[j] + (t3 - 2 * t2 + t) * h * m_[j] +
           (-2 * t3 + 3 * t2) * y_[j + 1] + (t3 - t2) * h * m_[j + 1];
  }

 private:
  static double end_slope(double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(m) > std::abs(3.0 * d0)) return 3.0 * d0;
    return m;
  }

  std::vector<double> x_, y_, m_;
};

}  // namespace metashock::numerics
