#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "metashock/core.hpp"
#include "metashock/family.hpp"
#include "metashock/spectral.hpp"

namespace metashock::reduced {

enum class ThetaMode { hyperbolic_closed_form, discrete_adjoint };

inline const char* to_string(ThetaMode m) {
  return m == ThetaMode::hyperbolic_closed_form ? "hyperbolic" : "discrete_adjoint";
}

/// theta(xi) = psi_1(xi) * (kappa_-(xi) - kappa_+(xi)) together with the projection
/// <psi_1, -d_x U> of the translation mode, in one gauge of psi_1.
struct ThetaValue {
  double theta;
  double psi1_at_xi;
  double omega;
  double translation_overlap;  // <psi_1, -d_x U>
  double speed() const { return theta / translation_overlap; }
};

struct ThetaOptions {
  int grid_cells = 800;  // discrete_adjoint only
};

inline ThetaValue theta_value(double xi, const ProblemSpec& spec, ThetaMode mode,
                              const family::XiRange* range = nullptr, ThetaOptions opts = {}) {
  const auto k = family::solve_kappas(xi, spec, range);
  const double psi0 = spectral::hyperbolic_eigenfunction(xi, xi, spec, spectral::Eigenfunction::psi1);
  if (mode == ThetaMode::hyperbolic_closed_form) {
    // psi_1^0 is 1 across the layer up to exponentially small terms, so <psi_1^0, -U'> is u- - u+.
    return {psi0 * k.omega, psi0, k.omega, spec.u_minus - spec.u_plus};
  }
  // Adjoint eigenfunction psi_1 = rho phi_1, scaled to agree with psi_1^0 at xi.
  const Grid grid(opts.grid_cells, spec.ell);
  const auto element = family::build_element(xi, spec, grid);
  const auto coeffs = spectral::assemble(element, spec);
  const auto rep = spectral::eigenpairs(coeffs, 1);
  const auto& phi = rep.eigenfunctions.front();
  const std::size_t n = grid.size();
  std::vector<double> psi(n);
  for (std::size_t i = 0; i < n; ++i) psi[i] = coeffs.rho[i] * phi[i];
  const double dx = grid.spacing();
  const std::size_t j = std::min(n - 2, static_cast<std::size_t>(std::floor((xi + spec.ell) / dx)));
  const double t = (xi - grid.x(j)) / dx;
  const double at_xi = (1.0 - t) * psi[j] + t * psi[j + 1];
  const double scale = psi0 / at_xi;
  double overlap = 0.0;
  for (std::size_t i = 0; i < n; ++i) overlap -= psi[i] * scale * element.slope[i];
  overlap *= dx;
  return {psi0 * k.omega, psi0, k.omega, overlap};
}

inline double theta(double xi, const ProblemSpec& spec,
                    ThetaMode mode = ThetaMode::hyperbolic_closed_form) {
  return theta_value(xi, spec, mode).theta;
}

/// d xi / dt: theta divided by the projection of the translation mode onto psi_1, which
/// makes the speed independent of how psi_1 is normalized.
inline double interface_speed(double xi, const ProblemSpec& spec,
                              ThetaMode mode = ThetaMode::hyperbolic_closed_form,
                              const family::XiRange* range = nullptr) {
  return theta_value(xi, spec, mode, range).speed();
}

struct ReducedTrajectory {
  std::vector<double> times;
  std::vector<double> xi_values;
  double equilibrium = std::numeric_limits<double>::quiet_NaN();
  int steps = 0;
  int rejected = 0;
};

struct ReducedOptions {
  double t_start = 0.0;
  double rtol = 1e-8;
  double atol = 1e-12;
  ThetaMode mode = ThetaMode::hyperbolic_closed_form;
  int max_steps = 1000000;
};

/// Integrates d xi / dt = interface_speed(xi) by RK4 with step doubling.
inline ReducedTrajectory reduced_ode_solve(double xi0, const ProblemSpec& spec,
                                           const std::vector<double>& output_times,
                                           ReducedOptions opts = {}) {
  if (!std::is_sorted(output_times.begin(), output_times.end()))
    throw Error(ErrorKind::InvalidArgument, "output times must be increasing");
  if (!output_times.empty() && output_times.front() < opts.t_start)
    throw Error(ErrorKind::InvalidArgument, "output times precede the start time");
  const auto range = family::admissible_xi_range(spec);
  if (!(xi0 > range.lo && xi0 < range.hi)) {
    std::ostringstream msg;
    msg << "xi0 = " << xi0 << " outside (" << range.lo << ", " << range.hi << ")";
    throw Error(ErrorKind::XiOutOfRange, msg.str());
  }
  auto rhs = [&](double xi) {
    return interface_speed(std::clamp(xi, range.lo, range.hi), spec, opts.mode, &range);
  };
  auto rk4 = [&](double xi, double h, double k1) {
    const double k2 = rhs(xi + 0.5 * h * k1);
    const double k3 = rhs(xi + 0.5 * h * k2);
    const double k4 = rhs(xi + h * k3);
    return xi + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
  };

  ReducedTrajectory out;
  out.equilibrium = family::equilibrium_xi(spec);
  double t = opts.t_start, xi = xi0;
  double f0 = rhs(xi);
  double h = f0 != 0.0 ? std::min(1.0, 1e-3 / std::abs(f0)) : 1.0;
  for (double target : output_times) {
    while (t < target) {
      if (++out.steps > opts.max_steps)
        throw Error(ErrorKind::ConvergenceFailure, "reduced ODE exceeded its step budget");
      if (f0 == 0.0) {
        t = target;
        break;
      }
      const bool last = t + h >= target;
      const double step = last ? target - t : h;
      const double full = rk4(xi, step, f0);
      const double mid = rk4(xi, 0.5 * step, f0);
      const double two = rk4(mid, 0.5 * step, rhs(mid));
      const double err = std::abs(two - full) / 15.0;
      const double tol = opts.atol + opts.rtol * std::abs(two);
      if (err <= tol) {
        xi = two + (two - full) / 15.0;
        t = last ? target : t + step;
        f0 = rhs(xi);
      } else {
        ++out.rejected;
      }
      const double factor = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 4.0;
      h = step * std::clamp(factor, 0.2, 4.0);
      if (!(h > 0.0) || !std::isfinite(h))
        throw Error(ErrorKind::ConvergenceFailure, "reduced ODE step size collapsed");
    }
    out.times.push_back(target);
    out.xi_values.push_back(xi);
  }
  return out;
}

/// Average interface speed dx/dt between t_start and the first time t_F >= t_start with
/// |xi(t_F)| <= stop_threshold; xi(t_start) is interpolated linearly in t.
inline double average_speed(const std::vector<std::pair<double, double>>& track, double t_start,
                            double stop_threshold) {
  if (track.empty()) throw Error(ErrorKind::InvalidArgument, "empty interface track");
  if (t_start < track.front().first || t_start > track.back().first) {
    std::ostringstream msg;
    msg << "t_start = " << t_start << " outside the track [" << track.front().first << ", "
        << track.back().first << "]";
    throw Error(ErrorKind::InvalidArgument, msg.str());
  }
  double xi_start = track.front().second;
  for (std::size_t i = 1; i < track.size(); ++i) {
    if (track[i].first >= t_start) {
      const auto [t0, x0] = track[i - 1];
      const auto [t1, x1] = track[i];
      xi_start = t1 > t0 ? x0 + (x1 - x0) * (t_start - t0) / (t1 - t0) : x1;
      break;
    }
  }
  for (const auto& [t, x] : track) {
    if (t < t_start || std::abs(x) > stop_threshold) continue;
    if (t == t_start) return 0.0;
    return (x - xi_start) / (t - t_start);
  }
  std::ostringstream msg;
  msg << "|xi| never drops to " << stop_threshold << " after t = " << t_start;
  throw Error(ErrorKind::ThresholdNeverReached, msg.str());
}

}  // namespace metashock::reduced
