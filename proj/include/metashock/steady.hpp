#pragma once

#include <cmath>
#include <limits>
#include <sstream>

#include "metashock/core.hpp"
#include "metashock/numerics/integral_map.hpp"
#include "metashock/numerics/quadrature.hpp"
#include "metashock/numerics/roots.hpp"

namespace metashock {

/// Existence conditions for a monotone smooth steady state.
struct ExistenceReport {
  double m = 0.0;
  double M = 0.0;
  bool gap_ok = false;                                       // M - m < epsilon
  double c_threshold = std::numeric_limits<double>::quiet_NaN();  // c_I or c_D
  bool length_ok = false;                                    // 2 ell > c_threshold
  Direction direction = Direction::increasing;

  bool exists() const { return gap_ok && length_ok; }
};

namespace steady {

inline constexpr numerics::QuadratureOptions kQuadrature{1e-13, 1e-13, 4000};

inline void require_direction(const ProblemSpec& spec, Direction d) {
  if (spec.natural_direction() != d) {
    std::ostringstream msg;
    msg << "a " << to_string(d) << " steady state cannot connect u- = " << spec.u_minus
        << " to u+ = " << spec.u_plus;
    throw Error(ErrorKind::DirectionMismatch, msg.str());
  }
}

/// Open interval of integration constants C for which eps*h(u') = f(u) + C admits a
/// monotone solution in the spec's natural direction.
struct AdmissibleInterval {
  double lo, hi;
};

inline AdmissibleInterval admissible_interval(const ProblemSpec& spec) {
  const auto [m, M] = flux_extrema(spec);
  const double eps = spec.epsilon;
  if (spec.natural_direction() == Direction::increasing) return {-m, eps - M};
  return {-eps - m, -M};
}

/// Length of the interval swept by the steady profile with integration constant C:
/// \int_{u-}^{u+} sqrt(eps^2 - (f+C)^2) / (f+C) du.
inline double phi(double c_const, const ProblemSpec& spec) {
  const auto [lo, hi] = admissible_interval(spec);
  if (!(c_const > lo && c_const < hi)) {
    std::ostringstream msg;
    msg << "C = " << c_const << " outside the admissible interval (" << lo << ", " << hi << ")";
    throw Error(ErrorKind::OutOfRange, msg.str());
  }
  const double eps = spec.epsilon;
  auto integrand = [&](double u) {
    const double y = spec.f(u) + c_const;
    return std::sqrt(std::max(0.0, (eps - y) * (eps + y))) / y;
  };
  return numerics::integrate(integrand, spec.u_minus, spec.u_plus, kQuadrature).value;
}

/// Minimal length c_I (increasing) or c_D (decreasing): 2*ell must exceed it.
inline double threshold(const ProblemSpec& spec, Direction d) {
  require_direction(spec, d);
  const auto [m, M] = flux_extrema(spec);
  const double eps = spec.epsilon;
  if (!(M - m < eps)) {
    std::ostringstream msg;
    msg << "M - m = " << M - m << " >= epsilon = " << eps;
    throw Error(ErrorKind::GapViolation, msg.str());
  }
  if (d == Direction::increasing) {
    auto integrand = [&](double u) {
      const double fu = spec.f(u);
      return std::sqrt(std::max(0.0, (M - fu) * (fu + 2.0 * eps - M))) / (fu + eps - M);
    };
    return numerics::integrate(integrand, spec.u_minus, spec.u_plus, kQuadrature).value;
  }
  auto integrand = [&](double u) {
    const double fu = spec.f(u);
    return std::sqrt(std::max(0.0, (fu - m) * (2.0 * eps + m - fu))) / (m + eps - fu);
  };
  return numerics::integrate(integrand, spec.u_plus, spec.u_minus, kQuadrature).value;
}

/// Rankine-Hugoniot-type speed of the traveling front connecting u- and u+.
inline double admissible_speed(const ProblemSpec& spec) {
  return (spec.f(spec.u_minus) - spec.f(spec.u_plus)) / (spec.u_plus - spec.u_minus);
}

}  // namespace steady

inline ExistenceReport check_existence(const ProblemSpec& spec, Direction d) {
  steady::require_direction(spec, d);
  ExistenceReport r;
  const auto [m, M] = flux_extrema(spec);
  r.m = m;
  r.M = M;
  r.direction = d;
  r.gap_ok = M - m < spec.epsilon;
  if (r.gap_ok) {
    r.c_threshold = steady::threshold(spec, d);
    r.length_ok = 2.0 * spec.ell > r.c_threshold;
  }
  return r;
}

namespace steady {

/// Monotone steady state: profile u and slope u' on a grid.
struct SteadyState {
  ProblemSpec spec;
  Direction direction;
  double c_const;
  GridField profile;
  GridField slope;
};

/// The unique C with phi(C) = 2*ell. Bisection/secant inside the open admissible
/// interval; phi is never evaluated closer than 1e-14 (relative) to its ends.
inline double solve_integration_constant(const ProblemSpec& spec, Direction d) {
  const auto report = check_existence(spec, d);
  if (!report.exists()) {
    std::ostringstream msg;
    msg << "no " << to_string(d) << " steady state: M - m = " << report.M - report.m
        << ", epsilon = " << spec.epsilon << ", threshold = " << report.c_threshold
        << ", 2 ell = " << 2.0 * spec.ell;
    throw Error(ErrorKind::NoRoot, msg.str());
  }
  const auto [lo, hi] = admissible_interval(spec);
  const double target = 2.0 * spec.ell;
  auto residual = [&](double c) { return phi(c, spec) - target; };
  auto bracket = numerics::bracket_open_interval(residual, lo, hi, 1e-14);
  if (!bracket) throw Error(ErrorKind::NoRoot, "phi(C) - 2 ell has no sign change");
  return numerics::find_root(residual, bracket->lo, bracket->hi);
}

/// Samples the steady state with integration constant C on the grid by inverting
/// x(u) = -ell + \int_{u-}^{u} sqrt(eps^2-(f+C)^2)/(f+C) ds.
inline SteadyState reconstruct(const ProblemSpec& spec, double c_const, const Grid& grid) {
  const auto [lo, hi] = admissible_interval(spec);
  if (!(c_const > lo && c_const < hi))
    throw Error(ErrorKind::OutOfRange, "integration constant outside the admissible interval");
  const double eps = spec.epsilon;
  auto dxdu = [&spec, eps, c_const](double u) {
    const double y = spec.f(u) + c_const;
    return std::sqrt(std::max(0.0, (eps - y) * (eps + y))) / y;
  };
  numerics::IntegralMap map(dxdu, spec.u_minus, spec.u_plus, -spec.ell, 2048);
  std::vector<double> u(grid.size()), s(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) u[i] = map.u_of(grid.x(i));
  u.front() = spec.u_minus;
  u.back() = spec.u_plus;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double y = spec.f(u[i]) + c_const;
    s[i] = y / std::sqrt((eps - y) * (eps + y));
  }
  return {spec, spec.natural_direction(), c_const, GridField(grid, std::move(u)),
          GridField(grid, std::move(s))};
}

inline SteadyState steady_state(const ProblemSpec& spec, const Grid& grid) {
  const auto d = spec.natural_direction();
  return reconstruct(spec, solve_integration_constant(spec, d), grid);
}

}  // namespace steady
}  // namespace metashock
