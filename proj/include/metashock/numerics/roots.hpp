#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>

#include "metashock/error.hpp"

namespace metashock::numerics {

struct RootOptions {
  double x_tol = 0.0;  // absolute bracket width; 0 means "down to floating-point resolution"
  double f_tol = 0.0;  // accept as soon as |f| <= f_tol
  int max_iter = 300;
};

struct Bracket {
  double lo, hi, f_lo, f_hi;
};

/// Bracketed root of a continuous function: bisection keeps the bracket, secant
/// (Illinois-weighted regula falsi) accelerates it. Throws NoRoot without a sign change.
template <class F>
double find_root(F&& f, double lo, double hi, const RootOptions& opts = {}) {
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (std::signbit(fa) == std::signbit(fb) || std::isnan(fa) || std::isnan(fb)) {
    std::ostringstream msg;
    msg << "root not bracketed: f(" << a << ")=" << fa << ", f(" << b << ")=" << fb;
    throw Error(ErrorKind::NoRoot, msg.str());
  }
  int side = 0;
  for (int it = 0; it < opts.max_iter; ++it) {
    const double width = std::abs(b - a);
    const double resolution =
        std::max(opts.x_tol, 4.0 * std::numeric_limits<double>::epsilon() *
                                 std::max(std::abs(a), std::abs(b)));
    if (width <= resolution) break;

    double c = (a * fb - b * fa) / (fb - fa);
    // Fall back to bisection when the secant point degenerates or every third step.
    if (!(c > std::min(a, b) && c < std::max(a, b)) || it % 3 == 2) c = 0.5 * (a + b);
    const double fc = f(c);
    if (fc == 0.0 || std::abs(fc) <= opts.f_tol) return c;
    if (std::signbit(fc) == std::signbit(fb)) {
      b = c;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = c;
      fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
  }
  return std::abs(fa) < std::abs(fb) ? a : b;
}

/// Searches the open interval (lo, hi) for a sign change of f by probing points that
/// approach each endpoint geometrically, never closer than `margin` (relative to the
/// interval length). Useful when f blows up at an endpoint.
template <class F>
std::optional<Bracket> bracket_open_interval(F&& f, double lo, double hi, double margin = 1e-14,
                                             int probes = 60) {
  const double len = hi - lo;
  const double mid = lo + 0.5 * len;
  const double f_mid = f(mid);
  double prev_left = mid, f_prev_left = f_mid;
  double prev_right = mid, f_prev_right = f_mid;
  for (int k = 2; k <= probes; ++k) {
    const double t = std::max(std::ldexp(1.0, -k), margin);
    const double xl = lo + t * len;
    const double fl = f(xl);
    if (!std::isnan(fl) && std::signbit(fl) != std::signbit(f_prev_left))
      return Bracket{xl, prev_left, fl, f_prev_left};
    prev_left = xl;
    f_prev_left = fl;
    const double xr = hi - t * len;
    const double fr = f(xr);
    if (!std::isnan(fr) && std::signbit(fr) != std::signbit(f_prev_right))
      return Bracket{prev_right, xr, f_prev_right, fr};
    prev_right = xr;
    f_prev_right = fr;
    if (t == margin) break;
  }
  return std::nullopt;
}

}  // namespace metashock::numerics
