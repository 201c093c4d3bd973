#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <vector>

#include "metashock/core.hpp"
#include "metashock/family.hpp"
#include "metashock/numerics/symmetric_tridiagonal_eigen.hpp"

namespace metashock::spectral {

/// Coefficients of L v = p v'' + q v' + r v, the linearization of
/// eps (h(u_x))_x - f(u)_x around a profile U, and the weight rho with (rho p)' = rho q.
struct LinearizedCoefficients {
  double epsilon;
  GridField profile;
  GridField slope;
  GridField p;        // eps / (1 + U'^2)^{3/2}
  GridField q;        // p' - f'(U)
  GridField r;        // -(f'(U))'
  GridField log_rho;  // log rho, anchored at x = 0
  GridField rho;
  GridField a_field;  // f'(U) (1 + U'^2)^{3/2}
};

namespace detail {

/// Trapezoid antiderivative of a on the grid, shifted so it vanishes at x = 0 (linear
/// interpolation between the nodes that bracket 0).
inline std::vector<double> anchored_integral(const Grid& grid, const std::vector<double>& a) {
  const std::size_t n = grid.size();
  const double dx = grid.spacing();
  std::vector<double> I(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) I[i] = I[i - 1] + 0.5 * dx * (a[i - 1] + a[i]);
  std::size_t j = 0;
  while (j + 2 < n && grid.x(j + 1) <= 0.0) ++j;
  const double t = (0.0 - grid.x(j)) / dx;
  const double at0 = a[j] + t * (a[j + 1] - a[j]);
  const double shift = I[j] + 0.5 * t * dx * (a[j] + at0);
  for (auto& v : I) v -= shift;
  return I;
}

}  // namespace detail

/// Assembles the coefficients from a profile with its analytic first and second derivatives.
inline LinearizedCoefficients assemble(const GridField& profile, const GridField& slope,
                                       const GridField& curvature, const ProblemSpec& spec) {
  const Grid& grid = profile.grid;
  const std::size_t n = grid.size();
  if (slope.size() != n || curvature.size() != n)
    throw Error(ErrorKind::InvalidArgument, "profile derivatives do not match the grid");
  const double eps = spec.epsilon;
  const auto& f = spec.flux;
  std::vector<double> p(n), q(n), r(n), a(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = slope[i], c = curvature[i], U = profile[i];
    const double w = 1.0 + s * s;
    p[i] = eps / (w * std::sqrt(w));
    q[i] = -3.0 * eps * c * s / (w * w * std::sqrt(w)) - f.deriv(U);
    r[i] = -f.second_deriv(U) * s;
    a[i] = f.deriv(U) * w * std::sqrt(w);
  }
  auto I = detail::anchored_integral(grid, a);
  std::vector<double> log_rho(n), rho(n);
  for (std::size_t i = 0; i < n; ++i) {
    log_rho[i] = -I[i] / eps;
    rho[i] = std::exp(log_rho[i]);
  }
  return {eps,
          profile,
          slope,
          GridField(grid, std::move(p)),
          GridField(grid, std::move(q)),
          GridField(grid, std::move(r)),
          GridField(grid, std::move(log_rho)),
          GridField(grid, std::move(rho)),
          GridField(grid, std::move(a))};
}

/// Assembles around a smoothed family element.
inline LinearizedCoefficients assemble(const family::FamilyElement& element, const ProblemSpec& spec) {
  if (!(element.smoothing_width > 0.0))
    throw Error(ErrorKind::NonSmoothProfile,
                "the family element has a slope jump at xi; build it with a positive smoothing width");
  return assemble(element.profile, element.slope, element.curvature, spec);
}

/// Symmetric tridiagonal form of the Dirichlet problem (rho p v')' + rho r v = lambda rho v
/// in the variable y = sqrt(rho) v on the interior nodes.
struct SymmetricForm {
  std::vector<double> diag;      // interior nodes 1..N-1
  std::vector<double> offdiag;
  std::vector<double> face_offdiag;  // all n-1 faces, including the two boundary faces
};

inline SymmetricForm symmetric_form(const LinearizedCoefficients& c) {
  const std::size_t n = c.p.size();
  const double dx = c.p.grid.spacing();
  const double inv = 1.0 / (dx * dx);
  const auto& p = c.p.values;
  const auto& lr = c.log_rho.values;
  // Each face couples nodes i, i+1 through the harmonic mean of rho p. The factors below
  // are that coefficient divided by sqrt(rho_i rho_{i+1}), rho_i and rho_{i+1} respectively,
  // written with d = log rho_{i+1} - log rho_i so rho never appears unscaled.
  std::vector<double> off(n - 1), to_left(n - 1), to_right(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = lr[i + 1] - lr[i];
    const double pp = 2.0 * p[i] * p[i + 1];
    off[i] = pp / (p[i] * std::exp(-0.5 * d) + p[i + 1] * std::exp(0.5 * d)) * inv;
    to_left[i] = pp / (p[i] * std::exp(-d) + p[i + 1]) * inv;
    to_right[i] = pp / (p[i] + p[i + 1] * std::exp(d)) * inv;
  }
  SymmetricForm form;
  form.diag.resize(n - 2);
  form.offdiag.resize(n - 3);
  // Zeroth-order term balanced so that the discrete operator annihilates 1/rho, as the
  // continuous one does.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double right = to_left[i];      // face i+1/2 seen from node i
    const double left = to_right[i - 1];  // face i-1/2 seen from node i
    const double e_r = std::exp(-(lr[i + 1] - lr[i]));
    const double e_l = std::exp(-(lr[i - 1] - lr[i]));
    const double balanced_r = -(right * (e_r - 1.0) - left * (1.0 - e_l));
    form.diag[i - 1] = -(left + right) + balanced_r;
  }
  for (std::size_t i = 1; i + 2 < n; ++i) form.offdiag[i - 1] = off[i];
  form.face_offdiag = std::move(off);
  return form;
}

struct SpectralReport {
  double xi = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> eigenvalues;     // lambda_1 > lambda_2 > ...
  std::vector<GridField> eigenfunctions;  // rho-orthonormal, zero at both ends
  double lambda1_predicted = std::numeric_limits<double>::quiet_NaN();
  double lambda2_bound = std::numeric_limits<double>::quiet_NaN();
  bool all_negative = false;
  std::vector<int> inverse_iterations;
};

/// Discrete rho-weighted inner product (trapezoid; the boundary values vanish here).
inline double rho_inner(const GridField& a, const GridField& b, const GridField& rho) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i] * rho[i];
  return s * a.grid.spacing();
}

/// The k largest eigenpairs. lambda_1 is recomputed from the discrete Green identity with
/// w = 1/rho, which returns it without the absolute rounding floor of bisection (lambda_1
/// is exponentially small next to the matrix norm).
inline SpectralReport eigenpairs(const LinearizedCoefficients& c, int k = 6) {
  const Grid& grid = c.p.grid;
  const std::size_t n = grid.size();
  if (k < 1 || k > grid.n_cells() / 4) {
    std::ostringstream msg;
    msg << "k = " << k << " must lie in [1, n_cells/4 = " << grid.n_cells() / 4 << "]";
    throw Error(ErrorKind::InvalidArgument, msg.str());
  }
  const SymmetricForm form = symmetric_form(c);
  numerics::SymmetricTridiagonalEigen solver(form.diag, form.offdiag);
  auto pairs = solver.largest(k);
  const double dx = grid.spacing();
  const auto& lr = c.log_rho.values;

  SpectralReport rep;
  for (auto& pr : pairs) {
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i)
      v[i] = pr.vector[i - 1] * std::exp(-0.5 * lr[i]) / std::sqrt(dx);
    // Orientation: positive rho-mass for the ground state, positive first lobe otherwise.
    double orient = 0.0;
    if (rep.eigenvalues.empty()) {
      for (std::size_t i = 0; i < n; ++i) orient += v[i] * std::exp(lr[i]);
    } else {
      const double peak = *std::max_element(v.begin(), v.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
      });
      for (std::size_t i = 1; i + 1 < n && orient == 0.0; ++i)
        if (std::abs(v[i]) > 1e-3 * std::abs(peak)) orient = v[i];
    }
    if (orient < 0.0)
      for (auto& x : v) x = -x;
    rep.eigenvalues.push_back(pr.value);
    rep.eigenfunctions.emplace_back(grid, std::move(v));
    rep.inverse_iterations.push_back(pr.inverse_iterations);
  }

  // lambda_1 sum_i phi_i = -[K_{1/2} phi_1 / rho_0 + K_{N-1/2} phi_{N-1} / rho_N] with
  // K = (rho p)_face / dx^2 and phi = y / sqrt(rho); K / sqrt(rho_i rho_{i+1}) is the
  // off-diagonal entry of the symmetric form.
  const auto& y = pairs.front().vector;
  double mass = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) mass += y[i - 1] * std::exp(-0.5 * lr[i]);
  const double flux_out = form.face_offdiag.front() * std::exp(-0.5 * lr[0]) * y.front() +
                          form.face_offdiag.back() * std::exp(-0.5 * lr[n - 1]) * y.back();
  if (mass != 0.0) {
    const double refined = -flux_out / mass;
    if (std::isfinite(refined)) rep.eigenvalues.front() = refined;
  }
  rep.all_negative = std::all_of(rep.eigenvalues.begin(), rep.eigenvalues.end(),
                                 [](double l) { return l < 0.0; });
  return rep;
}

namespace detail {

inline double symmetric_burgers_ustar(const ProblemSpec& spec) {
  if (spec.flux.label != "burgers" || spec.u_minus != -spec.u_plus || !(spec.u_minus > 0.0))
    throw Error(ErrorKind::UnsupportedConfiguration,
                "closed form needs f = u^2/2 with u- = -u+ = u* > 0");
  return spec.u_minus;
}

}  // namespace detail

/// lambda_1 ~ -u*^3 / eps * exp(-u* (ell - |xi|) / eps).
inline double lambda1_asymptotic(double xi, const ProblemSpec& spec) {
  const double us = detail::symmetric_burgers_ustar(spec);
  const double eps = spec.epsilon;
  return -us * us * us / eps * std::exp(-us * (spec.ell - std::abs(xi)) / eps);
}

/// lambda_2 <= -u*^2 / (4 eps).
inline double lambda2_bound(const ProblemSpec& spec) {
  const double us = detail::symmetric_burgers_ustar(spec);
  return -us * us / (4.0 * spec.epsilon);
}

enum class Eigenfunction { psi1, psi2 };

/// Eigenfunctions of the adjoint of the operator linearized around the step
/// u- chi(-ell, xi) + u+ chi(xi, ell). psi1 uses a- = f'(u-) and a+ = -f'(u+) (both u* for
/// symmetric Burgers); psi2 needs symmetric Burgers and lambda_2.
inline double hyperbolic_eigenfunction(double x, double xi, const ProblemSpec& spec, Eigenfunction which,
                                       std::optional<double> lambda2 = std::nullopt) {
  const double eps = spec.epsilon, ell = spec.ell;
  if (which == Eigenfunction::psi1) {
    const double am = spec.flux.deriv(spec.u_minus), ap = -spec.flux.deriv(spec.u_plus);
    if (!(am > 0.0 && ap > 0.0))
      throw Error(ErrorKind::UnsupportedConfiguration, "psi1 closed form needs f'(u-) > 0 > f'(u+)");
    if (x <= xi) return -std::expm1(-ap * (ell - xi) / eps) * -std::expm1(-am * (ell + x) / eps);
    return -std::expm1(-am * (ell + xi) / eps) * -std::expm1(-ap * (ell - x) / eps);
  }
  const double us = detail::symmetric_burgers_ustar(spec);
  if (!lambda2) throw Error(ErrorKind::InvalidArgument, "psi2 needs lambda_2");
  const double disc = -4.0 * eps * *lambda2 - us * us;
  if (disc < 0.0) {
    std::ostringstream msg;
    msg << "psi2 undefined: -4 eps lambda_2 - u*^2 = " << disc << " < 0";
    throw Error(ErrorKind::DomainError, msg.str());
  }
  const double k = std::sqrt(disc) / (2.0 * eps);
  auto branch = [&](double y, double sign) {
    return std::exp(sign * us * y / (2.0 * eps)) * std::sin(k * y);
  };
  // The coefficient of each side is the other side's branch at xi, which makes psi2 continuous.
  if (x <= xi) return branch(xi - ell, 1.0) * branch(x + ell, -1.0);
  return branch(xi + ell, -1.0) * branch(x - ell, 1.0);
}

/// First eigenvalue of the linear-diffusion problem eps u_xx - f(u)_x around a step.
inline double linear_reference_lambda1(double xi, const ProblemSpec& spec) {
  const double eps = spec.epsilon, ell = spec.ell;
  const double dm = spec.flux.deriv(spec.u_minus), dp = spec.flux.deriv(spec.u_plus);
  const double inv = 1.0 / (1.0 / dm - 1.0 / dp);
  return -(1.0 / eps) * inv *
         (-dp * std::exp(dp * (ell - xi) / eps) + dm * std::exp(-dm * (ell + xi) / eps));
}

/// Full report for a family element: eigenpairs plus the closed-form predictors when they apply.
inline SpectralReport analyze(const family::FamilyElement& element, const ProblemSpec& spec, int k = 6) {
  auto rep = eigenpairs(assemble(element, spec), k);
  rep.xi = element.xi;
  try {
    rep.lambda1_predicted = lambda1_asymptotic(element.xi, spec);
    rep.lambda2_bound = lambda2_bound(spec);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnsupportedConfiguration) throw;
  }
  return rep;
}

}  // namespace metashock::spectral
