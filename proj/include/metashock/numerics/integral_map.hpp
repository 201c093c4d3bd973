#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "metashock/error.hpp"
#include "metashock/numerics/interpolation.hpp"
#include "metashock/numerics/quadrature.hpp"

namespace metashock::numerics {

/// The monotone map x(u) = x_start + \int_{u_start}^{u} g(s) ds for a sign-definite
/// integrand g, tabulated on a uniform u-mesh and inverted pointwise.
///
/// Inversion starts from a monotone cubic interpolation of the (x, u) table and is
/// polished by safeguarded Newton on the exact integral, so flat stretches of u(x)
/// (where g is large) are resolved to quadrature accuracy.
class IntegralMap {
 public:
  IntegralMap(std::function<double(double)> g, double u_start, double u_end, double x_start,
              int panels = 1024, QuadratureOptions quad = {1e-14, 1e-13, 2000})
      : g_(std::move(g)), quad_(quad) {
    if (panels < 2) throw Error(ErrorKind::InvalidArgument, "IntegralMap needs >= 2 panels");
    u_.resize(panels + 1);
    x_.resize(panels + 1);
    for (int j = 0; j <= panels; ++j)
      u_[j] = u_start + (u_end - u_start) * static_cast<double>(j) / panels;
    u_[panels] = u_end;
    x_[0] = x_start;
    for (int j = 0; j < panels; ++j) x_[j + 1] = x_[j] + integrate(g_, u_[j], u_[j + 1], quad_).value;
    increasing_x_ = x_.back() > x_.front();
    std::vector<double> xs = x_, us = u_;
    if (!increasing_x_) {
      std::reverse(xs.begin(), xs.end());
      std::reverse(us.begin(), us.end());
    }
    // Deduplicate knots that collapse in floating point (g tiny over a panel).
    std::vector<double> kx, ku;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!kx.empty() && !(xs[i] > kx.back())) continue;
      kx.push_back(xs[i]);
      ku.push_back(us[i]);
    }
    guess_ = std::make_unique<MonotoneCubic>(std::move(kx), std::move(ku));
  }

  IntegralMap(IntegralMap&&) = default;
  IntegralMap& operator=(IntegralMap&&) = default;

  double x_front() const { return x_.front(); }
  double x_back() const { return x_.back(); }
  double u_front() const { return u_.front(); }
  double u_back() const { return u_.back(); }

  double x_of(double u) const {
    const auto j = panel_of_u(u);
    return x_[j] + integrate(g_, u_[j], u, quad_).value;
  }

  /// Solves x(u) = x for u; targets outside the tabulated x-range clamp to the ends.
  double u_of(double x) const {
    const double xmin = std::min(x_.front(), x_.back()), xmax = std::max(x_.front(), x_.back());
    if (x <= xmin) return increasing_x_ ? u_.front() : u_.back();
    if (x >= xmax) return increasing_x_ ? u_.back() : u_.front();

    // Panel j with x between x_[j] and x_[j+1].
    std::size_t j = 0;
    if (increasing_x_) {
      j = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
      j = j == 0 ? 0 : j - 1;
    } else {
      j = static_cast<std::size_t>(
          std::upper_bound(x_.begin(), x_.end(), x, std::greater<>()) - x_.begin());
      j = j == 0 ? 0 : j - 1;
    }
    j = std::min(j, u_.size() - 2);

    // F(u) = x(u) - x is monotone on the panel; `neg` and `pos` bracket its root.
    const double xa = x_[j];
    auto residual = [&](double u) { return xa + integrate(g_, u_[j], u, quad_).value - x; };
    double neg = increasing_x_ ? u_[j] : u_[j + 1];
    double pos = increasing_x_ ? u_[j + 1] : u_[j];
    double u = std::clamp((*guess_)(x), std::min(neg, pos), std::max(neg, pos));
    for (int it = 0; it < 100; ++it) {
      const double r = residual(u);
      if (r == 0.0) return u;
      (r < 0.0 ? neg : pos) = u;
      double next = u - r / g_(u);
      const double bmin = std::min(neg, pos), bmax = std::max(neg, pos);
      if (!(next > bmin && next < bmax) || !std::isfinite(next)) next = 0.5 * (neg + pos);
      if (std::abs(next - u) <= 1e-15 * std::max(1.0, std::abs(u)) || bmax - bmin <= 1e-16)
        return next;
      u = next;
    }
    return u;
  }

 private:
  std::size_t panel_of_u(double u) const {
    const double t = (u - u_.front()) / (u_.back() - u_.front());
    auto j = static_cast<long>(std::floor(t * static_cast<double>(u_.size() - 1)));
    j = std::clamp(j, 0L, static_cast<long>(u_.size()) - 2);
    return static_cast<std::size_t>(j);
  }

  std::function<double(double)> g_;
  QuadratureOptions quad_;
  std::vector<double> u_, x_;
  bool increasing_x_ = true;
  std::unique_ptr<MonotoneCubic> guess_;
};

}  // namespace metashock::numerics
