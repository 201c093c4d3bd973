#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <iomanip>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "metashock/core.hpp"
#include "metashock/numerics/tridiagonal.hpp"
#include "metashock/steady.hpp"

namespace metashock {

/// Saturating diffusion flux h(s) = s / sqrt(1 + s^2) and its inverse on (-1, 1).
inline double h(double s) { return s / std::sqrt(1.0 + s * s); }
inline double h_prime(double s) { return 1.0 / std::pow(1.0 + s * s, 1.5); }
inline double h_inverse(double y) { return y / std::sqrt(1.0 - y * y); }

enum class Diffusion { mean_curvature, linear };
enum class Scheme { explicit_rk4, implicit_bdf1 };

inline const char* to_string(Diffusion d) {
  return d == Diffusion::mean_curvature ? "mean_curvature" : "linear";
}
inline const char* to_string(Scheme s) {
  return s == Scheme::explicit_rk4 ? "explicit_rk4" : "implicit_bdf1";
}

/// Discrete flux F_{i+1/2} = eps*h(s) - fhat(u_i, u_{i+1}) with s the one-sided difference.
/// fhat is the centered flux average plus a numerical viscosity that switches on only when
/// the local cell Peclet number exceeds one: nu = max(0, a*dx/2 - D(s)/s), a = max|f'| over
/// the pair. Smooth layers are therefore discretized by the central (second-order) scheme
/// and steep ones by a Rusanov-like monotone flux.
class FluxDiscretization {
 public:
  FluxDiscretization(const ProblemSpec& spec, double dx, Diffusion diffusion)
      : spec_(spec), dx_(dx), diffusion_(diffusion) {}

  struct Face {
    double flux;
    double d_left;   // dF/du_i
    double d_right;  // dF/du_{i+1}
  };

  Face face(double ul, double ur) const {
    const double eps = spec_.epsilon;
    const double s = (ur - ul) / dx_;
    double diff, diff_ds, diffusivity, diffusivity_ds;
    if (diffusion_ == Diffusion::mean_curvature) {
      const double q = 1.0 + s * s;
      diff = eps * s / std::sqrt(q);
      diff_ds = eps / (q * std::sqrt(q));
      diffusivity = eps / std::sqrt(q);
      diffusivity_ds = -eps * s / (q * std::sqrt(q));
    } else {
      diff = eps * s;
      diff_ds = eps;
      diffusivity = eps;
      diffusivity_ds = 0.0;
    }
    const auto& f = spec_.flux;
    const double fl = f.eval(ul), fr = f.eval(ur);
    const double dl = f.deriv(ul), dr = f.deriv(ur);
    double conv = 0.5 * (fl + fr);
    double conv_dl = 0.5 * dl, conv_dr = 0.5 * dr;
    const double a = std::max(std::abs(dl), std::abs(dr));
    const double nu = 0.5 * a * dx_ - diffusivity;
    if (nu > 0.0) {
      double a_l = 0.0, a_r = 0.0;
      if (std::abs(dr) >= std::abs(dl))
        a_r = std::copysign(1.0, dr) * f.second_deriv(ur);
      else
        a_l = std::copysign(1.0, dl) * f.second_deriv(ul);
      const double nu_r = 0.5 * dx_ * a_r - diffusivity_ds / dx_;
      const double nu_l = 0.5 * dx_ * a_l + diffusivity_ds / dx_;
      conv -= nu * s;
      conv_dr -= nu_r * s + nu / dx_;
      conv_dl -= nu_l * s - nu / dx_;
    }
    return {diff - conv, -diff_ds / dx_ - conv_dl, diff_ds / dx_ - conv_dr};
  }

  double dx() const { return dx_; }
  Diffusion diffusion() const { return diffusion_; }

 private:
  const ProblemSpec& spec_;
  double dx_;
  Diffusion diffusion_;
};

namespace detail {

inline void require_boundary(const GridField& u, const ProblemSpec& spec) {
  if (u.values.front() != spec.u_minus || u.values.back() != spec.u_plus) {
    std::ostringstream msg;
    msg << "field boundary values (" << std::setprecision(17) << u.values.front() << ", " << u.values.back()
        << ") differ from (u-, u+) = (" << spec.u_minus << ", " << spec.u_plus << ")";
    throw Error(ErrorKind::InvalidArgument, msg.str());
  }
}

inline std::vector<double> face_fluxes(const std::vector<double>& u, const FluxDiscretization& d) {
  std::vector<double> F(u.size() - 1);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) F[i] = d.face(u[i], u[i + 1]).flux;
  return F;
}

/// Interior rows of the operator G(u) = (F_{i+1/2} - F_{i-1/2}) / dx and, optionally, its
/// tridiagonal Jacobian (boundary rows are zero).
inline std::vector<double> apply_operator(const std::vector<double>& u, const FluxDiscretization& d,
                                          numerics::Tridiagonal* jac = nullptr) {
  const std::size_t n = u.size();
  std::vector<double> g(n, 0.0);
  std::vector<FluxDiscretization::Face> faces(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) faces[i] = d.face(u[i], u[i + 1]);
  const double inv = 1.0 / d.dx();
  if (jac) *jac = numerics::Tridiagonal(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    g[i] = (faces[i].flux - faces[i - 1].flux) * inv;
    if (jac) {
      jac->upper[i] = faces[i].d_right * inv;
      jac->diag[i] = (faces[i].d_left - faces[i - 1].d_right) * inv;
      jac->lower[i] = -faces[i - 1].d_left * inv;
    }
  }
  return g;
}

}  // namespace detail

/// Discrete right-hand side eps*d_x(h(d_x u)) - d_x f(u) in conservative form. Boundary
/// nodes carry zero.
inline GridField spatial_operator(const GridField& field, const ProblemSpec& spec,
                                  Diffusion diffusion = Diffusion::mean_curvature) {
  FluxDiscretization d(spec, field.grid.spacing(), diffusion);
  return GridField(field.grid, detail::apply_operator(field.values, d), field.time);
}

/// ||z||_inf for z = eps*h(u_x) - f(u), evaluated on cell faces with the numerical flux of
/// the scheme (so z is exactly constant at a discrete steady state).
inline double z_monitor(const GridField& field, const ProblemSpec& spec,
                        Diffusion diffusion = Diffusion::mean_curvature) {
  FluxDiscretization d(spec, field.grid.spacing(), diffusion);
  double s = 0.0;
  for (double F : detail::face_fluxes(field.values, d)) s = std::max(s, std::abs(F));
  return s;
}

struct SmallnessReport {
  double lhs = 0.0;          // eps*||h(u0')|| + 2*||f(u0)||
  double alpha_ratio = 0.0;  // lhs / eps
  bool passes = false;       // lhs < eps
  double c0_bound = std::numeric_limits<double>::quiet_NaN();  // h^{-1}(alpha_ratio)
};

inline SmallnessReport check_smallness(const GridField& u0, const ProblemSpec& spec) {
  const double dx = u0.grid.spacing();
  double hs = 0.0, fs = 0.0;
  for (std::size_t i = 0; i < u0.size(); ++i) {
    fs = std::max(fs, std::abs(spec.f(u0[i])));
    if (i + 1 < u0.size()) hs = std::max(hs, std::abs(h((u0[i + 1] - u0[i]) / dx)));
  }
  SmallnessReport r;
  r.lhs = spec.epsilon * hs + 2.0 * fs;
  r.alpha_ratio = r.lhs / spec.epsilon;
  r.passes = r.lhs < spec.epsilon;
  if (r.passes) r.c0_bound = h_inverse(r.alpha_ratio);
  return r;
}

/// C0 = h^{-1}(3/4), the default slope bound under the smallness condition.
inline double default_c0() { return h_inverse(0.75); }

struct StabilityRateReport {
  double a_const = 0.0;
  double b_const = 0.0;
  double sup_fprime = 0.0;
  double k_rate = 0.0;
  bool positive = false;
};

/// A = max{sqrt(1+C0^2), sqrt(1+||u_I'||^2)}, B = A^3, K = eps/B - (2 ell/pi)^2 sup|f'|.
/// The flux term is dropped for linear fluxes.
inline StabilityRateReport stability_rate(const ProblemSpec& spec, const steady::SteadyState& st,
                                          double c0 = default_c0()) {
  StabilityRateReport r;
  const double slope = st.slope.sup_norm();
  r.a_const = std::max(std::sqrt(1.0 + c0 * c0), std::sqrt(1.0 + slope * slope));
  r.b_const = r.a_const * r.a_const * r.a_const;
  const int samples = 4096;
  for (int i = 0; i < samples; ++i) {
    const double u = spec.u_lo() + (spec.u_hi() - spec.u_lo()) * i / (samples - 1);
    r.sup_fprime = std::max(r.sup_fprime, std::abs(spec.flux.deriv(u)));
  }
  const double poincare = 2.0 * spec.ell / M_PI;
  r.k_rate = spec.epsilon / r.b_const;
  if (!spec.flux.linear) r.k_rate -= poincare * poincare * r.sup_fprime;
  r.positive = r.k_rate > 0.0;
  return r;
}

/// Largest stable explicit step: 0.4 * min(dx^2/eps, dx/max|f'|).
inline double explicit_step_cap(const ProblemSpec& spec, double dx) {
  double a = 0.0;
  const int samples = 1024;
  for (int i = 0; i < samples; ++i) {
    const double u = spec.u_lo() + (spec.u_hi() - spec.u_lo()) * i / (samples - 1);
    a = std::max(a, std::abs(spec.flux.deriv(u)));
  }
  double cap = dx * dx / spec.epsilon;
  if (a > 0.0) cap = std::min(cap, dx / a);
  return 0.4 * cap;
}

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 60;
};

/// One time step. The implicit scheme solves v - u - dt*G(v) = 0 by damped Newton.
inline GridField advance(const GridField& state, double dt, Scheme scheme, const ProblemSpec& spec,
                         Diffusion diffusion = Diffusion::mean_curvature, NewtonOptions newton = {}) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "time step must be positive");
  detail::require_boundary(state, spec);
  FluxDiscretization d(spec, state.grid.spacing(), diffusion);
  const std::size_t n = state.size();
  const auto& u = state.values;

  if (scheme == Scheme::explicit_rk4) {
    const double cap = explicit_step_cap(spec, state.grid.spacing());
    if (dt > cap * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "dt = " << dt << " exceeds the explicit cap " << cap;
      throw Error(ErrorKind::ExplicitCFLViolation, msg.str());
    }
    auto axpy = [&](const std::vector<double>& k, double c) {
      std::vector<double> w(u);
      for (std::size_t i = 1; i + 1 < n; ++i) w[i] += c * k[i];
      return w;
    };
    const auto k1 = detail::apply_operator(u, d);
    const auto k2 = detail::apply_operator(axpy(k1, 0.5 * dt), d);
    const auto k3 = detail::apply_operator(axpy(k2, 0.5 * dt), d);
    const auto k4 = detail::apply_operator(axpy(k3, dt), d);
    std::vector<double> out(u);
    for (std::size_t i = 1; i + 1 < n; ++i)
      out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return GridField(state.grid, std::move(out), state.time + dt);
  }

  auto residual = [&](const std::vector<double>& v, numerics::Tridiagonal* jac) {
    auto g = detail::apply_operator(v, d, jac);
    double norm = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      g[i] = v[i] - u[i] - dt * g[i];
      norm = std::max(norm, std::abs(g[i]));
    }
    g.front() = g.back() = 0.0;
    return std::pair{std::move(g), norm};
  };

  std::vector<double> v(u);
  numerics::Tridiagonal jac;
  auto [r, rnorm] = residual(v, &jac);
  const double round = 8.0 * std::numeric_limits<double>::epsilon();
  for (int it = 0; it < newton.max_iter; ++it) {
    if (rnorm <= newton.tol) return GridField(state.grid, std::move(v), state.time + dt);
    for (std::size_t i = 0; i < n; ++i) {
      jac.lower[i] *= -dt;
      jac.upper[i] *= -dt;
      jac.diag[i] = 1.0 - dt * jac.diag[i];
    }
    jac.diag.front() = jac.diag.back() = 1.0;
    jac.upper.front() = jac.lower.back() = 0.0;
    for (auto& x : r) x = -x;
    const auto delta = numerics::solve(jac, r);
    double dnorm = 0.0, vnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dnorm = std::max(dnorm, std::abs(delta[i]));
      vnorm = std::max(vnorm, std::abs(v[i]));
    }
    double lambda = 1.0;
    bool accepted = false;
    std::vector<double> trial(v);
    for (int ls = 0; ls < 30; ++ls) {
      for (std::size_t i = 1; i + 1 < n; ++i) trial[i] = v[i] + lambda * delta[i];
      auto [rt, rtn] = residual(trial, nullptr);
      if (rtn < (1.0 - 1e-4 * lambda) * rnorm || rtn <= newton.tol) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      // Residual at the rounding floor: the last full step is as good as it gets.
      if (dnorm <= round * std::max(1.0, vnorm))
        return GridField(state.grid, std::move(v), state.time + dt);
      std::ostringstream msg;
      msg << "line search failed at Newton iteration " << it << " with residual " << rnorm
          << " (dt = " << dt << ")";
      throw NewtonDivergence(msg.str(), rnorm);
    }
    v = std::move(trial);
    std::tie(r, rnorm) = residual(v, &jac);
    if (lambda == 1.0 && dnorm <= round * std::max(1.0, vnorm))
      return GridField(state.grid, std::move(v), state.time + dt);
  }
  if (rnorm <= newton.tol) return GridField(state.grid, std::move(v), state.time + dt);
  std::ostringstream msg;
  msg << "Newton did not converge in " << newton.max_iter << " iterations, residual " << rnorm;
  throw NewtonDivergence(msg.str(), rnorm);
}

/// Exact fixed point of the discrete operator: G(u) = 0 with Dirichlet data, by damped
/// Newton started from the continuous steady state (or the linear interpolant when no
/// smooth steady state exists).
inline GridField discrete_steady_state(const ProblemSpec& spec, const Grid& grid,
                                       Diffusion diffusion = Diffusion::mean_curvature) {
  std::vector<double> v;
  try {
    if (diffusion == Diffusion::mean_curvature) v = steady::steady_state(spec, grid).profile.values;
  } catch (const Error&) {
  }
  if (v.empty()) {
    v.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      v[i] = spec.u_minus + (spec.u_plus - spec.u_minus) * (grid.x(i) + grid.ell()) / (2 * grid.ell());
  }
  v.front() = spec.u_minus;
  v.back() = spec.u_plus;
  FluxDiscretization d(spec, grid.spacing(), diffusion);
  const std::size_t n = v.size();
  auto norm_of = [](const std::vector<double>& g) {
    double s = 0.0;
    for (double x : g) s = std::max(s, std::abs(x));
    return s;
  };
  numerics::Tridiagonal jac;
  auto g = detail::apply_operator(v, d, &jac);
  double gnorm = norm_of(g);
  for (int it = 0; it < 100; ++it) {
    jac.diag.front() = jac.diag.back() = 1.0;
    jac.upper.front() = jac.lower.back() = 0.0;
    for (auto& x : g) x = -x;
    const auto delta = numerics::solve(jac, g);
    double lambda = 1.0;
    std::vector<double> trial(v);
    double tnorm = gnorm;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t i = 1; i + 1 < n; ++i) trial[i] = v[i] + lambda * delta[i];
      tnorm = norm_of(detail::apply_operator(trial, d));
      if (tnorm < (1.0 - 1e-4 * lambda) * gnorm) break;
      lambda *= 0.5;
    }
    const double step = lambda * norm_of(delta);
    if (tnorm >= gnorm) break;  // stagnated at rounding level
    v = std::move(trial);
    g = detail::apply_operator(v, d, &jac);
    gnorm = norm_of(g);
    if (step <= 1e-15 * std::max(1.0, norm_of(v))) break;
  }
  if (!(gnorm < 1e-6)) {
    std::ostringstream msg;
    msg << "discrete steady state not found, residual " << gnorm;
    throw Error(ErrorKind::ConvergenceFailure, msg.str());
  }
  return GridField(grid, std::move(v));
}

enum class CrossingPolicy { unique, steepest };

/// Zero crossing of a sampled field by linear interpolation between bracketing nodes.
inline double interface_position(const GridField& field,
                                 CrossingPolicy policy = CrossingPolicy::unique) {
  const auto& u = field.values;
  const auto& g = field.grid;
  std::vector<std::pair<double, double>> crossings;  // (position, |slope|)
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double slope = std::abs(u[i + 1] - u[i]) / g.spacing();
    if (u[i] == 0.0) {
      if (i > 0) crossings.emplace_back(g.x(i), slope);
      continue;
    }
    if (u[i + 1] != 0.0 && std::signbit(u[i]) != std::signbit(u[i + 1])) {
      const double t = u[i] / (u[i] - u[i + 1]);
      crossings.emplace_back(g.x(i) + t * g.spacing(), slope);
    }
  }
  if (crossings.empty()) throw CrossingError(ErrorKind::NoCrossing, "field has no sign change", 0);
  if (crossings.size() > 1 && policy == CrossingPolicy::unique) {
    std::ostringstream msg;
    msg << "field has " << crossings.size() << " sign changes";
    throw CrossingError(ErrorKind::MultipleCrossings, msg.str(), static_cast<int>(crossings.size()));
  }
  return std::max_element(crossings.begin(), crossings.end(),
                          [](const auto& a, const auto& b) { return a.second < b.second; })
      ->first;
}

/// Sign of the discrete slope: -1 when non-increasing, +1 when non-decreasing, 0 otherwise.
inline int slope_sign(const GridField& field) {
  bool up = false, down = false;
  for (std::size_t i = 0; i + 1 < field.size(); ++i) {
    if (field[i + 1] > field[i]) up = true;
    if (field[i + 1] < field[i]) down = true;
  }
  return up == down ? 0 : (down ? -1 : 1);
}

struct Diagnostic {
  double time;
  double sup_u;
  double sup_z;
  double l2_dist;  // to the discrete steady state, NaN when none exists
  int slope_sign;
  double dt;
};

struct Trajectory {
  ProblemSpec spec;
  std::vector<GridField> snapshots;
  std::vector<std::pair<double, double>> interface_track;  // (t, xi)
  std::vector<Diagnostic> diagnostics;
};

struct EvolveOptions {
  Diffusion diffusion = Diffusion::mean_curvature;
  int warmup_steps = 20;
  double growth = 1.2;
  double dt_max = 0.0;  // 0 selects t_end / 500
  int max_retries = 40;
  bool track_distance = true;
  NewtonOptions newton;
};

/// Failure during evolve: carries the trajectory computed up to the failing step.
class EvolveFailure : public Error {
 public:
  EvolveFailure(const Error& cause, Trajectory partial)
      : Error(cause.kind(), std::string("evolve stopped: ") + cause.what()),
        partial_(std::make_shared<Trajectory>(std::move(partial))) {}
  const Trajectory& partial() const { return *partial_; }

 private:
  std::shared_ptr<Trajectory> partial_;
};

/// Integrates from u0 to t_end: a short explicit RK4 warm-up, then backward Euler with
/// geometrically growing steps. Records snapshots at output_times (clipping steps to hit
/// them) and diagnostics after every step.
inline Trajectory evolve(const ProblemSpec& spec, const GridField& u0, double t_end,
                         std::vector<double> output_times, const EvolveOptions& opts = {}) {
  detail::require_boundary(u0, spec);
  std::sort(output_times.begin(), output_times.end());
  output_times.erase(std::unique(output_times.begin(), output_times.end()), output_times.end());
  output_times.erase(std::remove_if(output_times.begin(), output_times.end(),
                                    [&](double t) { return t < u0.time || t > t_end; }),
                     output_times.end());

  Trajectory traj{spec, {}, {}, {}};
  const Grid& grid = u0.grid;
  std::optional<GridField> reference;
  if (opts.track_distance) {
    try {
      reference = discrete_steady_state(spec, grid, opts.diffusion);
    } catch (const Error&) {
    }
  }
  auto record = [&](const GridField& u, double dt) {
    Diagnostic dg{u.time, u.sup_norm(), z_monitor(u, spec, opts.diffusion),
                  reference ? l2_distance(u, *reference) : std::numeric_limits<double>::quiet_NaN(),
                  slope_sign(u), dt};
    traj.diagnostics.push_back(dg);
    try {
      traj.interface_track.emplace_back(u.time, interface_position(u, CrossingPolicy::steepest));
    } catch (const CrossingError&) {
    }
  };

  GridField u = u0;
  std::size_t next_out = 0;
  auto emit = [&](const GridField& v) {
    while (next_out < output_times.size() && output_times[next_out] <= v.time * (1 + 1e-12) + 1e-300) {
      GridField snap = v;
      snap.time = output_times[next_out];
      traj.snapshots.push_back(std::move(snap));
      ++next_out;
    }
  };
  record(u, 0.0);
  emit(u);

  const double dt_max = opts.dt_max > 0.0 ? opts.dt_max : t_end / 500.0;
  double dt = explicit_step_cap(spec, grid.spacing());
  auto clip = [&](double step) {
    step = std::min(step, t_end - u.time);
    if (next_out < output_times.size()) step = std::min(step, output_times[next_out] - u.time);
    return step;
  };
  try {
    for (int k = 0; k < opts.warmup_steps && u.time < t_end; ++k) {
      const double step = clip(dt);
      if (step <= 0.0) break;
      u = advance(u, step, Scheme::explicit_rk4, spec, opts.diffusion);
      record(u, step);
      emit(u);
    }
    while (u.time < t_end * (1.0 - 1e-14)) {
      const double step = clip(std::min(dt, dt_max));
      GridField next = u;
      double tried = step;
      int retries = 0;
      while (true) {
        try {
          next = advance(u, tried, Scheme::implicit_bdf1, spec, opts.diffusion, opts.newton);
          break;
        } catch (const NewtonDivergence&) {
          if (++retries > opts.max_retries) throw;
          tried *= 0.5;
        }
      }
      if (tried == step && step >= t_end - u.time) next.time = t_end;
      u = std::move(next);
      record(u, tried);
      emit(u);
      dt = retries ? tried : std::min(opts.growth * std::max(dt, tried), dt_max);
    }
  } catch (const Error& e) {
    throw EvolveFailure(e, std::move(traj));
  }
  emit(u);
  return traj;
}

}  // namespace metashock
