#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "metashock/core.hpp"
#include "metashock/evolve.hpp"
#include "metashock/reduced.hpp"

namespace metashock::experiments {

/// Named initial data connecting u(-ell) = u- to u(ell) = u+. With y = x/ell, mid and half
/// the midpoint and half-difference of the boundary values, and d = |u+ - u-|:
///   linear         mid + half y
///   quadratic      mid + half y + d/4 (y^2 - 1)
///   positive_zero  mid + half y - d/4 (y^2 - 1)
///   bump           quadratic + 1.5 max|u+-| sin(pi (y + 1))
///   cosine         mid - half cos(3 pi (y + 1) / 2) + d/4 (y^2 - 1)
///   step:X         u- on (-ell, X), u+ on (X, ell)
/// The boundary nodes always carry u+- exactly.
inline GridField initial_profile(const std::string& name, const ProblemSpec& spec, const Grid& grid) {
  const double mid = 0.5 * (spec.u_minus + spec.u_plus);
  const double half = 0.5 * (spec.u_plus - spec.u_minus);
  const double d = std::abs(spec.u_plus - spec.u_minus);
  const double amp = std::max(std::abs(spec.u_minus), std::abs(spec.u_plus));
  const double ell = spec.ell;
  const double pi = std::numbers::pi;
  auto quadratic = [&](double y) { return mid + half * y + 0.25 * d * (y * y - 1.0); };
  std::function<double(double)> fn;
  if (name == "linear") {
    fn = [&](double x) { return mid + half * x / ell; };
  } else if (name == "quadratic") {
    fn = [&](double x) { return quadratic(x / ell); };
  } else if (name == "positive_zero") {
    fn = [&](double x) {
      const double y = x / ell;
      return mid + half * y - 0.25 * d * (y * y - 1.0);
    };
  } else if (name == "bump") {
    fn = [&](double x) {
      const double y = x / ell;
      return quadratic(y) + 1.5 * amp * std::sin(pi * (y + 1.0));
    };
  } else if (name == "cosine") {
    fn = [&](double x) {
      const double y = x / ell;
      return mid - half * std::cos(1.5 * pi * (y + 1.0)) + 0.25 * d * (y * y - 1.0);
    };
  } else if (name.rfind("step:", 0) == 0) {
    double at = 0.0;
    try {
      std::size_t used = 0;
      at = std::stod(name.substr(5), &used);
      if (used != name.size() - 5) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "bad step position in '" + name + "'");
    }
    if (!(at > -ell && at < ell)) throw Error(ErrorKind::InvalidArgument, "step position outside the interval");
    fn = [&, at](double x) { return x < at ? spec.u_minus : spec.u_plus; };
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown initial profile '" + name + "'");
  }
  auto u0 = GridField::sample(grid, fn);
  u0.values.front() = spec.u_minus;
  u0.values.back() = spec.u_plus;
  return u0;
}

inline const std::vector<double>& table_times() {
  static const std::vector<double> times{10, 1e2, 1e3, 5e3, 1e4, 5e4, 1e5, 1e6};
  return times;
}

inline const std::vector<double>& table_epsilons() {
  static const std::vector<double> eps{0.03, 0.01, 0.005};
  return eps;
}

/// Burgers flux, ell = 1, u+- = -+sqrt(eps).
inline ProblemSpec table_spec(double epsilon) {
  return ProblemSpec::symmetric(epsilon, 1.0, std::sqrt(epsilon), fluxes::burgers());
}

struct TableRun {
  double epsilon;
  Diffusion diffusion;
  std::vector<double> times;
  std::vector<double> xi;
  Trajectory trajectory;
};

/// The interface location at the table times, starting from the quadratic datum.
inline TableRun table_run(double epsilon, Diffusion diffusion, int cells = Grid::kDefaultCells) {
  const auto spec = table_spec(epsilon);
  const Grid grid(cells, spec.ell);
  EvolveOptions opts;
  opts.diffusion = diffusion;
  const auto& times = table_times();
  auto traj = evolve(spec, initial_profile("quadratic", spec, grid), times.back(), times, opts);
  TableRun run{epsilon, diffusion, {}, {}, std::move(traj)};
  for (const auto& s : run.trajectory.snapshots) {
    run.times.push_back(s.time);
    run.xi.push_back(interface_position(s, CrossingPolicy::steepest));
  }
  return run;
}

inline double speed_predictor(double epsilon) {
  const double r = std::sqrt(epsilon);
  return r * std::exp(-1.0 / r);
}

struct SpeedRow {
  double epsilon;
  double t_initial, t_final;
  double xi_initial, xi_final;
  double measured;   // |xi_final - xi_initial| / (t_final - t_initial)
  double predicted;  // sqrt(eps) exp(-1/sqrt(eps))
};

/// Average speed of the sampled interface between t_initial and the first sample time with
/// |xi| <= threshold.
inline SpeedRow speed_row(const TableRun& run, double t_initial = 100.0, double threshold = 0.05) {
  std::vector<std::pair<double, double>> track;
  for (std::size_t i = 0; i < run.times.size(); ++i) track.emplace_back(run.times[i], run.xi[i]);
  SpeedRow row{run.epsilon, t_initial, 0.0, 0.0, 0.0, 0.0, speed_predictor(run.epsilon)};
  const double v = reduced::average_speed(track, t_initial, threshold);
  for (const auto& [t, x] : track) {
    if (t == t_initial) row.xi_initial = x;
    if (t >= t_initial && std::abs(x) <= threshold) {
      row.t_final = t;
      row.xi_final = x;
      break;
    }
  }
  row.measured = std::abs(v);
  return row;
}

/// One evolve run of a figure.
struct FigureRun {
  std::string name;
  ProblemSpec spec;
  std::string initial;
  Diffusion diffusion;
  std::vector<double> times;  // snapshot times; the last one is the horizon
  int cells;
};

inline const std::vector<int>& figure_ids() {
  static const std::vector<int> ids{3, 4, 5, 6, 7, 8};
  return ids;
}

/// Run definitions for the figure ids 3..8 (see the README for the numbering).
inline std::vector<FigureRun> figure_runs(int id, int cells = Grid::kDefaultCells) {
  const auto mc = Diffusion::mean_curvature;
  auto sym = [&](double eps, double us, Direction d = Direction::decreasing, Flux f = fluxes::burgers()) {
    return ProblemSpec::symmetric(eps, 1.0, us, std::move(f), d);
  };
  const std::vector<double> long_times{0, 1, 10, 50, 100, 1e3, 1e4, 5e4, 1e5, 1e6};
  switch (id) {
    case 3: {
      const double eps = 0.005, us = std::sqrt(eps);
      return {{"increasing", sym(eps, us, Direction::increasing), "quadratic", mc, {0, 1, 5, 10, 50, 100}, cells},
              {"decreasing", sym(eps, us), "quadratic", mc, {0, 1, 5, 10, 50, 100}, cells}};
    }
    case 4: {
      const double eps = 0.005, us = std::sqrt(eps);
      return {{"bump", sym(eps, us), "bump", mc, long_times, cells},
              {"cosine", sym(eps, us), "cosine", mc, long_times, cells}};
    }
    case 5: {
      return {{"positive_zero", sym(0.005, std::sqrt(0.005)), "positive_zero", mc, long_times, cells},
              {"eps_0.01", sym(0.01, 0.1), "quadratic", mc, long_times, cells},
              {"eps_0.005", sym(0.005, std::sqrt(0.005)), "quadratic", mc, long_times, cells}};
    }
    case 6: {
      const double eps = 0.005, us = std::sqrt(eps);
      const std::vector<double> times{0, 1, 10, 100, 500, 1e3};
      return {{"a_0.25", sym(eps, us, Direction::decreasing, fluxes::shifted_burgers(0.25 * us)), "quadratic", mc,
               times, cells},
              {"a_0.1", sym(eps, us, Direction::decreasing, fluxes::shifted_burgers(0.1 * us)), "quadratic", mc,
               times, cells}};
    }
    case 7: {
      const double eps = 0.001, us = std::sqrt(eps);
      const std::vector<double> times{0, 1, 10, 100, 1e3, 1e4, 1e5};
      const int fine = std::max(cells, 800);
      return {{"smooth", sym(eps, us), "quadratic", mc, times, fine},
              {"step", sym(eps, us), "step:-0.5", mc, times, fine},
              {"small_data", sym(0.005, 0.0025), "quadratic", mc, {0, 1, 10, 100, 1e3}, cells}};
    }
    case 8: {
      const double eps = 0.01, us = 1.8 * std::sqrt(eps);
      return {{"large_data", sym(eps, us), "quadratic", mc, {0, 1, 10, 100, 1e3, 1e4, 1e5}, cells}};
    }
    default: {
      std::ostringstream msg;
      msg << "unknown figure id " << id << " (expected 3..8)";
      throw Error(ErrorKind::InvalidArgument, msg.str());
    }
  }
}

inline Trajectory run_figure(const FigureRun& run) {
  const Grid grid(run.cells, run.spec.ell);
  EvolveOptions opts;
  opts.diffusion = run.diffusion;
  return evolve(run.spec, initial_profile(run.initial, run.spec, grid), run.times.back(), run.times, opts);
}

/// Largest one-sided difference quotient of a field.
inline double max_slope(const GridField& u) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) s = std::max(s, std::abs(u[i + 1] - u[i]) / u.grid.spacing());
  return s;
}

}  // namespace metashock::experiments
