#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace metashock::numerics {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-13;
  int max_intervals = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) quadrature. The worst panel is bisected
/// until the summed error estimate meets max(abs_tol, rel_tol*|I|). Endpoints are
/// never evaluated, so integrable endpoint singularities are tolerated. b < a is allowed.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opts = {}) {
  QuadratureResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  const double sign = b > a ? 1.0 : -1.0;
  if (b < a) std::swap(a, b);

  std::priority_queue<detail::Panel> panels;
  auto first = detail::gauss_kronrod15(f, a, b);
  double total = first.value;
  double error = first.error;
  panels.push(first);
  out.evaluations = 15;

  while (error > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
    if (static_cast<int>(panels.size()) >= opts.max_intervals) break;
    auto worst = panels.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted in floating point
    panels.pop();
    auto left = detail::gauss_kronrod15(f, worst.a, mid);
    auto right = detail::gauss_kronrod15(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }

  // Re-sum to shed the cancellation accumulated by incremental updates.
  total = 0.0;
  error = 0.0;
  while (!panels.empty()) {
    total += panels.top().value;
    error += panels.top().error;
    panels.pop();
  }
  out.value = sign * total;
  out.error = error;
  out.converged = error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
  return out;
}

}  // namespace metashock::numerics
