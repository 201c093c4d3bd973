#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "metashock/core.hpp"
#include "metashock/numerics/integral_map.hpp"
#include "metashock/numerics/quadrature.hpp"
#include "metashock/numerics/roots.hpp"

namespace metashock::family {

inline constexpr numerics::QuadratureOptions kQuadrature{1e-15, 1e-13, 4000};

namespace detail {

inline void require_decreasing(const ProblemSpec& spec) {
  if (spec.natural_direction() != Direction::decreasing)
    throw Error(ErrorKind::DirectionMismatch, "the family connects decreasing data u- > 0 > u+");
  if (!(spec.u_minus > 0.0 && spec.u_plus < 0.0))
    throw Error(ErrorKind::InvalidArgument, "the family needs u- > 0 > u+");
}

/// Integrand sqrt(eps^2 - D^2) / D with D = kappa - f(s) passed in directly.
inline double kernel(double eps, double d) {
  return std::sqrt(std::max(0.0, (eps - d) * (eps + d))) / d;
}

}  // namespace detail

/// Psi(kappa, u) = \int_0^u sqrt(eps^2 - (f(s) - kappa)^2) / (kappa - f(s)) ds with
/// kappa = f(u_ref) + delta. Splitting kappa this way keeps kappa - f(s) accurate when delta
/// is far below the resolution of f(u_ref) (delta is exponentially small in the metastable
/// regime). The half of the path next to u_target is integrated in tau = log|s - u_target|,
/// which resolves the near-singular layer of width ~delta/|f'| at the end of the path.
inline double psi_offset(double u_ref, double delta, double u_target, const ProblemSpec& spec) {
  if (u_target == 0.0) return 0.0;
  const double eps = spec.epsilon;
  const auto& f = spec.flux;
  // kappa - f(u_ref + h)
  auto denom_h = [&](double h) { return delta - f.increment(u_ref, h); };
  auto denom = [&](double s) { return denom_h(s - u_ref); };
  const int checks = 256;
  for (int i = 0; i <= checks; ++i) {
    const double s = u_target * i / checks;
    if (!(denom(s) > 0.0)) {
      std::ostringstream msg;
      msg << "kappa - f(s) vanishes on the path from 0 to " << u_target << " (s = " << s << ")";
      throw Error(ErrorKind::SingularPath, msg.str());
    }
  }
  auto g = [&](double s) { return detail::kernel(eps, denom(s)); };
  const double half = 0.5 * u_target;
  double total = numerics::integrate(g, 0.0, half, kQuadrature).value;
  // Near end: s = u_target - sign * e^tau, with the offset from u_ref formed before rounding.
  const double sign = u_target > 0.0 ? 1.0 : -1.0;
  const double w = std::abs(half);
  const double h_end = u_target - u_ref;
  const double d_end = denom_h(h_end);
  const double slope = std::max(std::abs(f.deriv(u_target)), 1e-300);
  const double t_min = std::min(1e-3 * w, 1e-14 * d_end / std::max(slope, eps));
  auto gt = [&](double tau) {
    const double t = std::exp(tau);
    return detail::kernel(eps, denom_h(h_end - sign * t)) * t;
  };
  total += sign * numerics::integrate(gt, std::log(t_min), std::log(w), kQuadrature).value;
  total += sign * t_min * detail::kernel(eps, d_end);
  return total;
}

inline double psi_integral(double kappa, double u_target, const ProblemSpec& spec) {
  return psi_offset(u_target, kappa - spec.f(u_target), u_target, spec);
}

/// Limits c_pm = lim_{kappa -> eps} Psi(kappa, u_pm).
struct XiRange {
  double c_minus, c_plus;
  double lo, hi;  // (-ell + c_minus, ell + c_plus), shrunk by 1e-6
};

inline XiRange admissible_xi_range(const ProblemSpec& spec) {
  detail::require_decreasing(spec);
  const double eps = spec.epsilon;
  const double fm = spec.f(spec.u_minus), fp = spec.f(spec.u_plus);
  if (!(fm < eps && fp < eps))
    throw Error(ErrorKind::GapViolation, "f(u-) and f(u+) must lie below epsilon");
  XiRange r;
  r.c_minus = psi_offset(spec.u_minus, eps - fm, spec.u_minus, spec);
  r.c_plus = psi_offset(spec.u_plus, eps - fp, spec.u_plus, spec);
  r.lo = -spec.ell + r.c_minus + 1e-6;
  r.hi = spec.ell + r.c_plus - 1e-6;
  return r;
}

/// kappa_pm = f(u_pm) + delta_pm with both offsets kept for precision.
struct Kappas {
  double kappa_minus, kappa_plus;
  double delta_minus, delta_plus;
  double omega;  // kappa_minus - kappa_plus
};

namespace detail {

/// Solves Psi(f(u) + delta, u) = target for delta in (0, eps - f(u)) by root finding in
/// log(delta).
inline double solve_delta(double u, double target, const ProblemSpec& spec) {
  const double eps = spec.epsilon;
  const double base = spec.f(u);
  auto residual = [&](double log_delta) {
    return psi_offset(u, std::exp(log_delta), u, spec) - target;
  };
  const double hi = std::log(eps - base) - 1e-12;
  double lo = std::log(std::max(1e-290, 1e-16 * (eps - base)));
  const double r_hi = residual(hi);
  double r_lo = residual(lo);
  // Psi(., u) is monotone in kappa; walk the lower end down if the target is extreme.
  while (std::signbit(r_lo) == std::signbit(r_hi) && lo > -660.0) {
    lo -= 40.0;
    r_lo = residual(lo);
  }
  if (std::signbit(r_lo) == std::signbit(r_hi)) {
    std::ostringstream msg;
    msg << "no kappa with Psi(kappa, " << u << ") = " << target;
    throw Error(ErrorKind::NoRoot, msg.str());
  }
  return std::exp(numerics::find_root(residual, lo, hi, {1e-15, 0.0, 400}));
}

}  // namespace detail

/// kappa_+ in (f(u+), eps) with Psi(kappa_+, u+) = xi - ell and kappa_- in (f(u-), eps) with
/// Psi(kappa_-, u-) = xi + ell.
inline Kappas solve_kappas(double xi, const ProblemSpec& spec, const XiRange* range = nullptr) {
  const XiRange r = range ? *range : admissible_xi_range(spec);
  if (!(xi > r.lo - 1e-6 && xi < r.hi + 1e-6)) {
    std::ostringstream msg;
    msg << "xi = " << xi << " outside (" << r.lo << ", " << r.hi << ")";
    throw Error(ErrorKind::XiOutOfRange, msg.str());
  }
  Kappas k;
  k.delta_plus = detail::solve_delta(spec.u_plus, xi - spec.ell, spec);
  k.delta_minus = detail::solve_delta(spec.u_minus, xi + spec.ell, spec);
  const double fm = spec.f(spec.u_minus), fp = spec.f(spec.u_plus);
  k.kappa_plus = fp + k.delta_plus;
  k.kappa_minus = fm + k.delta_minus;
  k.omega = (fm - fp) + (k.delta_minus - k.delta_plus);
  return k;
}

/// Two-sided bounds on kappa_pm - f(u_pm) from the convexity of f.
struct KappaBounds {
  double plus_lo, plus_hi, minus_lo, minus_hi;
};

inline KappaBounds kappa_bounds(double xi, const ProblemSpec& spec) {
  const double eps = spec.epsilon, ell = spec.ell;
  const double up = spec.u_plus, um = spec.u_minus;
  const double fp = spec.f(up), fm = spec.f(um);
  const double dp = spec.flux.deriv(up), dm = spec.flux.deriv(um);
  KappaBounds b;
  b.plus_lo = up * dp / std::expm1(dp * (xi - ell + up) / eps);
  b.plus_hi = fp / std::expm1(fp * (xi - ell) / (eps * up));
  b.minus_lo = um * dm / std::expm1(dm * (xi + ell + um) / eps);
  b.minus_hi = fm / std::expm1(fm * (xi + ell) / (eps * um));
  return b;
}

inline double omega_error(double xi, const ProblemSpec& spec) { return solve_kappas(xi, spec).omega; }

/// Unique root of g(xi) = kappa_-(xi) - kappa_+(xi), a decreasing function, by bisection.
inline double equilibrium_xi(const ProblemSpec& spec) {
  const XiRange r = admissible_xi_range(spec);
  auto g = [&](double xi) { return solve_kappas(xi, spec, &r).omega; };
  double a = r.lo, b = r.hi;
  double ga = g(a), gb = g(b);
  if (!(ga > 0.0 && gb < 0.0)) {
    std::ostringstream msg;
    msg << "g has no sign change on the admissible range: g(" << a << ") = " << ga << ", g(" << b
        << ") = " << gb;
    throw Error(ErrorKind::NoSignChange, msg.str());
  }
  for (int it = 0; it < 200; ++it) {
    const double c = 0.5 * (a + b);
    if (c <= a || c >= b) break;
    const double gc = g(c);
    if (gc == 0.0) return c;
    if (gc > 0.0)
      a = c;
    else
      b = c;
  }
  return 0.5 * (a + b);
}

/// Approximate steady state U(x; xi): the exact stationary branches on (-ell, xi) and
/// (xi, ell) glued at U(xi) = 0 and blended with a C^1 smoothstep over smoothing_width.
struct FamilyElement {
  double xi;
  double kappa_minus, kappa_plus;
  double delta_minus, delta_plus;
  double omega;
  double smoothing_width;
  GridField profile;
  GridField slope;      // d_x U
  GridField curvature;  // d_x^2 U
};

namespace detail {

/// One stationary branch: Psi(kappa, U) = xi - x with kappa = f(u_end) + delta, sampled as
/// an inverse integral map from (xi, 0) towards (boundary, u_end), optionally extended past
/// xi to U = -sign(u_end) * eta. The main map runs in sigma = log(delta + a |U - u_end|),
/// a = |f'(u_end)|, where dx/dsigma stays bounded through the boundary layer.
class Branch {
 public:
  Branch(const ProblemSpec& spec, double xi, double u_end, double delta, double extend)
      : spec_(spec), delta_(delta), u_end_(u_end), a_(std::abs(spec.flux.deriv(u_end))),
        dir_(u_end > 0.0 ? 1.0 : -1.0) {
    const double eps = spec.epsilon;
    auto dxdu = [this, eps](double u) { return -kernel(eps, denom(u)); };
    if (a_ > 0.0) {
      auto dxds = [this, eps](double sigma) {
        const double e = std::exp(sigma);
        const double h = -dir_ * (e - delta_) / a_;
        return kernel(eps, delta_ - spec_.flux.increment(u_end_, h)) * dir_ * e / a_;
      };
      const double s0 = std::log(delta_ + a_ * std::abs(u_end_));
      main_ = std::make_unique<numerics::IntegralMap>(dxds, s0, std::log(delta_), xi, 2048, kQuadrature);
    } else {
      main_ = std::make_unique<numerics::IntegralMap>(dxdu, 0.0, u_end, xi, 2048, kQuadrature);
    }
    if (extend > 0.0) {
      const double d0 = denom(0.0);
      const double slope0 = d0 / std::sqrt((eps - d0) * (eps + d0));
      double eta = 2.0 * extend * slope0 + 1e-300;
      for (int k = 0; k < 60; ++k) {
        ext_ = std::make_unique<numerics::IntegralMap>(dxdu, 0.0, -dir_ * eta, xi, 64, kQuadrature);
        if (std::abs(ext_->x_back() - xi) >= extend) break;
        eta *= 2.0;
      }
    }
  }

  double denom(double u) const { return delta_ - spec_.flux.increment(u_end_, u - u_end_); }

  double value(double x) const {
    const double xi = main_->x_front();
    const bool on_main = u_end_ > 0.0 ? x <= xi : x >= xi;
    if (!on_main && ext_) return ext_->u_of(x);
    const double v = main_->u_of(x);
    if (!(a_ > 0.0)) return v;
    if (x == xi) return 0.0;
    return u_end_ - dir_ * (std::exp(v) - delta_) / a_;
  }
  double slope(double u) const {
    const double eps = spec_.epsilon, d = denom(u);
    return -d / std::sqrt((eps - d) * (eps + d));
  }
  double curvature(double u) const {
    const double eps = spec_.epsilon, d = denom(u);
    const double q = (eps - d) * (eps + d);
    return eps * eps * spec_.flux.deriv(u) * slope(u) / (q * std::sqrt(q));
  }

 private:
  const ProblemSpec& spec_;
  double delta_, u_end_, a_, dir_;
  std::unique_ptr<numerics::IntegralMap> main_, ext_;
};

}  // namespace detail

inline FamilyElement build_element(double xi, const ProblemSpec& spec, const Grid& grid,
                                   double smoothing_width) {
  if (smoothing_width < 0.0) throw Error(ErrorKind::InvalidArgument, "negative smoothing width");
  const Kappas k = solve_kappas(xi, spec);
  const double w = smoothing_width;
  detail::Branch left(spec, xi, spec.u_minus, k.delta_minus, 0.5 * w);
  detail::Branch right(spec, xi, spec.u_plus, k.delta_plus, 0.5 * w);
  const std::size_t n = grid.size();
  std::vector<double> u(n), s(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid.x(i);
    if (w > 0.0 && std::abs(x - xi) < 0.5 * w) {
      const double t = (x - (xi - 0.5 * w)) / w;
      const double S = t * t * (3.0 - 2.0 * t);
      const double S1 = 6.0 * t * (1.0 - t) / w;
      const double S2 = (6.0 - 12.0 * t) / (w * w);
      const double ul = left.value(x), ur = right.value(x);
      const double sl = left.slope(ul), sr = right.slope(ur);
      const double cl = left.curvature(ul), cr = right.curvature(ur);
      u[i] = (1.0 - S) * ul + S * ur;
      s[i] = (1.0 - S) * sl + S * sr + S1 * (ur - ul);
      c[i] = (1.0 - S) * cl + S * cr + 2.0 * S1 * (sr - sl) + S2 * (ur - ul);
    } else {
      const auto& b = x < xi ? left : right;
      u[i] = x == xi ? 0.0 : b.value(x);
      s[i] = b.slope(u[i]);
      c[i] = b.curvature(u[i]);
    }
  }
  u.front() = spec.u_minus;
  u.back() = spec.u_plus;
  s.front() = left.slope(spec.u_minus);
  s.back() = right.slope(spec.u_plus);
  c.front() = left.curvature(spec.u_minus);
  c.back() = right.curvature(spec.u_plus);
  return {xi,
          k.kappa_minus,
          k.kappa_plus,
          k.delta_minus,
          k.delta_plus,
          k.omega,
          w,
          GridField(grid, std::move(u)),
          GridField(grid, std::move(s)),
          GridField(grid, std::move(c))};
}

inline FamilyElement build_element(double xi, const ProblemSpec& spec, const Grid& grid) {
  return build_element(xi, spec, grid, 2.0 * grid.spacing());
}

}  // namespace metashock::family
