#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "metashock/error.hpp"

namespace metashock {

/// Convective flux f with its first two derivatives. Normalized so that f(0) = 0.
struct Flux {
  std::function<double(double)> eval;
  std::function<double(double)> deriv;
  std::function<double(double)> second_deriv;
  std::optional<double> convexity_floor;  // c0 with f'' >= c0 > 0, when known
  std::string label;
  bool linear = false;  // f'' == 0 identically
  // f(u + h) - f(u) without cancellation, when a closed form is known.
  std::function<double(double, double)> increment_fn;

  double operator()(double u) const { return eval(u); }

  double increment(double u, double h) const {
    return increment_fn ? increment_fn(u, h) : eval(u + h) - eval(u);
  }

  /// Checks f(0) = 0 and, when a convexity floor is declared, f'' >= c0 on a dense
  /// sample of [lo, hi].
  void validate(double lo, double hi, int samples = 2001) const {
    if (!eval || !deriv || !second_deriv) throw Error(ErrorKind::InvalidArgument, "flux is incomplete");
    if (std::abs(eval(0.0)) > 1e-14) {
      std::ostringstream msg;
      msg << "flux '" << label << "' is not normalized: f(0) = " << eval(0.0);
      throw Error(ErrorKind::InvalidArgument, msg.str());
    }
    if (!convexity_floor) return;
    if (lo > hi) std::swap(lo, hi);
    for (int i = 0; i < samples; ++i) {
      const double u = lo + (hi - lo) * i / (samples - 1);
      if (second_deriv(u) < *convexity_floor - 1e-14) {
        std::ostringstream msg;
        msg << "flux '" << label << "' violates f'' >= " << *convexity_floor << " at u = " << u;
        throw Error(ErrorKind::InvalidArgument, msg.str());
      }
    }
  }
};

namespace fluxes {

inline Flux burgers() {
  return {[](double u) { return 0.5 * u * u; }, [](double u) { return u; },
          [](double) { return 1.0; }, 1.0, "burgers", false,
          [](double u, double h) { return h * (u + 0.5 * h); }};
}

inline Flux zero() {
  return {[](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; },
          std::nullopt, "zero", true, [](double, double) { return 0.0; }};
}

inline Flux linear(double slope) {
  return {[slope](double u) { return slope * u; }, [slope](double) { return slope; },
          [](double) { return 0.0; }, std::nullopt, "linear", true,
          [slope](double, double h) { return slope * h; }};
}

/// f(u) = u^3 - u.
inline Flux cubic() {
  return {[](double u) { return u * u * u - u; }, [](double u) { return 3.0 * u * u - 1.0; },
          [](double u) { return 6.0 * u; }, std::nullopt, "cubic", false,
          [](double u, double h) { return h * (3.0 * u * u + 3.0 * u * h + h * h - 1.0); }};
}

/// (u + shift)^2 / 2 with the constant dropped so that f(0) = 0: u^2/2 + shift*u.
inline Flux shifted_burgers(double shift) {
  return {[shift](double u) { return 0.5 * u * u + shift * u; },
          [shift](double u) { return u + shift; }, [](double) { return 1.0; }, 1.0,
          "shifted_burgers", false,
          [shift](double u, double h) { return h * (u + 0.5 * h + shift); }};
}

}  // namespace fluxes

enum class Direction { increasing, decreasing };

inline const char* to_string(Direction d) {
  return d == Direction::increasing ? "increasing" : "decreasing";
}

/// Parameters of the Dirichlet problem on (-ell, ell) with diffusion scale epsilon.
struct ProblemSpec {
  double epsilon;
  double ell;
  double u_minus;
  double u_plus;
  Flux flux;

  ProblemSpec(double epsilon_, double ell_, double u_minus_, double u_plus_, Flux flux_)
      : epsilon(epsilon_), ell(ell_), u_minus(u_minus_), u_plus(u_plus_), flux(std::move(flux_)) {
    if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
    if (!(ell > 0.0)) throw Error(ErrorKind::InvalidArgument, "ell must be positive");
    if (u_minus == u_plus) throw Error(ErrorKind::InvalidArgument, "u_minus must differ from u_plus");
    flux.validate(u_minus, u_plus);
  }

  /// Symmetric data u(-ell) = u_star, u(ell) = -u_star (decreasing transition).
  static ProblemSpec symmetric(double epsilon, double ell, double u_star, Flux flux,
                               Direction d = Direction::decreasing) {
    return d == Direction::decreasing ? ProblemSpec(epsilon, ell, u_star, -u_star, std::move(flux))
                                      : ProblemSpec(epsilon, ell, -u_star, u_star, std::move(flux));
  }

  Direction natural_direction() const {
    return u_minus < u_plus ? Direction::increasing : Direction::decreasing;
  }
  double f(double u) const { return flux.eval(u); }
  double u_lo() const { return std::min(u_minus, u_plus); }
  double u_hi() const { return std::max(u_minus, u_plus); }
};

/// Uniform grid on [-ell, ell] with n_cells cells (n_cells + 1 nodes).
class Grid {
 public:
  Grid(int n_cells, double ell) : n_cells_(n_cells), ell_(ell) {
    if (n_cells < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 cells");
    if (!(ell > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid half-length must be positive");
    spacing_ = 2.0 * ell / n_cells;
    nodes_.resize(n_cells + 1);
    for (int i = 0; i <= n_cells; ++i) nodes_[i] = -ell + spacing_ * i;
    nodes_.front() = -ell;
    nodes_.back() = ell;
  }

  static constexpr int kDefaultCells = 400;

  int n_cells() const { return n_cells_; }
  std::size_t size() const { return nodes_.size(); }
  double ell() const { return ell_; }
  double spacing() const { return spacing_; }
  double x(std::size_t i) const { return nodes_[i]; }
  const std::vector<double>& nodes() const { return nodes_; }

  bool operator==(const Grid& o) const { return n_cells_ == o.n_cells_ && ell_ == o.ell_; }

 private:
  int n_cells_;
  double ell_;
  double spacing_;
  std::vector<double> nodes_;
};

/// A function sampled on the nodes of a grid at a time stamp.
struct GridField {
  Grid grid;
  std::vector<double> values;
  double time = 0.0;

  GridField(Grid g, std::vector<double> v, double t = 0.0)
      : grid(std::move(g)), values(std::move(v)), time(t) {
    if (values.size() != grid.size())
      throw Error(ErrorKind::InvalidArgument, "field length does not match grid");
  }

  template <class F>
  static GridField sample(const Grid& g, F&& fn, double t = 0.0) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = fn(g.x(i));
    return GridField(g, std::move(v), t);
  }

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  double sup_norm() const {
    double s = 0.0;
    for (double v : values) s = std::max(s, std::abs(v));
    return s;
  }
};

inline double sup_distance(const GridField& a, const GridField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

/// Trapezoidal L2 distance between two fields on the same grid.
inline double l2_distance(const GridField& a, const GridField& b) {
  const double h = a.grid.spacing();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    const double w = (i == 0 || i + 1 == a.size()) ? 0.5 : 1.0;
    s += w * d * d;
  }
  return std::sqrt(s * h);
}

struct FluxExtrema {
  double m;  // min of f over the boundary-value interval
  double M;  // max
};

/// Min and max of f over the closed interval between u_minus and u_plus: a 4096-point
/// scan plus bisection of every sign change of f' to 1e-12.
inline FluxExtrema flux_extrema(const ProblemSpec& spec, int samples = 4096) {
  const double lo = spec.u_lo(), hi = spec.u_hi();
  const auto& f = spec.flux;
  double m = std::min(f.eval(lo), f.eval(hi));
  double M = std::max(f.eval(lo), f.eval(hi));
  double prev_u = lo, prev_d = f.deriv(lo);
  for (int i = 1; i < samples; ++i) {
    const double u = lo + (hi - lo) * i / (samples - 1);
    const double fu = f.eval(u);
    m = std::min(m, fu);
    M = std::max(M, fu);
    const double d = f.deriv(u);
    if (prev_d == 0.0 || std::signbit(prev_d) != std::signbit(d)) {
      double a = prev_u, b = u, da = prev_d;
      while (b - a > 1e-12) {
        const double c = 0.5 * (a + b);
        const double dc = f.deriv(c);
        if (dc == 0.0) {
          a = b = c;
          break;
        }
        if (std::signbit(dc) == std::signbit(da)) {
          a = c;
          da = dc;
        } else {
          b = c;
        }
      }
      const double fc = f.eval(0.5 * (a + b));
      m = std::min(m, fc);
      M = std::max(M, fc);
    }
    prev_u = u;
    prev_d = d;
  }
  return {m, M};
}

}  // namespace metashock
