// metashock command-line driver: steady states, evolutions, family sweeps, spectra, the
// reduced interface ODE, and the table/figure experiment recipes.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "metashock/config.hpp"
#include "metashock/evolve.hpp"
#include "metashock/experiments.hpp"
#include "metashock/family.hpp"
#include "metashock/io.hpp"
#include "metashock/reduced.hpp"
#include "metashock/spectral.hpp"
#include "metashock/steady.hpp"

namespace {

using namespace metashock;
using nlohmann::json;

enum ExitCode { kOk = 0, kConfigError = 2, kNumericalFailure = 3, kGateRejected = 4 };

/// Existence-gate rejection: the requested steady state provably does not exist.
class GateRejected : public Error {
 public:
  GateRejected(ErrorKind kind, const std::string& what) : Error(kind, what) {}
  explicit GateRejected(const Error& e) : Error(e.kind(), strip_kind(e.what())) {}

 private:
  static std::string strip_kind(const std::string& what) {
    const auto colon = what.find(": ");
    return colon == std::string::npos ? what : what.substr(colon + 2);
  }
};

struct Options {
  std::string config_path;
  std::string out = "out";
  int grid = 0;  // 0 keeps the config value
  int workers = 1;
  int table = 0;
  int figure = 0;
};

constexpr const char* kDeterminism =
    "deterministic: no random numbers are drawn; identical inputs give bit-identical CSV bodies";

/// Runs job(i) for i in [0, count) on up to `workers` threads. The first exception is
/// rethrown after every thread has joined.
void parallel_for(int count, int workers, const std::function<void(int)>& job) {
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (int i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min(workers, count));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Config load_config(const Options& o, bool required) {
  if (o.config_path.empty()) {
    if (required) throw Error(ErrorKind::ConfigParse, "this command needs --config");
    return Config{};
  }
  return Config::load(o.config_path);
}

int grid_cells(const Options& o, const Config& cfg) {
  cfg.require_known("grid", {"cells"});
  const int n = o.grid > 0 ? o.grid : cfg.integer("grid", "cells", Grid::kDefaultCells);
  if (n < 8) throw Error(ErrorKind::ConfigParse, "grid needs at least 8 cells");
  return n;
}

Diffusion diffusion_from(const std::string& s) {
  if (s == "mean_curvature") return Diffusion::mean_curvature;
  if (s == "linear") return Diffusion::linear;
  throw Error(ErrorKind::ConfigParse, "diffusion must be 'mean_curvature' or 'linear'");
}

reduced::ThetaMode theta_mode_from(const std::string& s) {
  if (s == "hyperbolic") return reduced::ThetaMode::hyperbolic_closed_form;
  if (s == "discrete_adjoint") return reduced::ThetaMode::discrete_adjoint;
  throw Error(ErrorKind::ConfigParse, "theta_mode must be 'hyperbolic' or 'discrete_adjoint'");
}

std::string time_tag(double t) { return "t" + io::format_label(t); }

void describe_run(io::OutputDir& out, const ProblemSpec& spec, const Grid& grid, const std::string& scheme) {
  out.meta()["spec"] = io::spec_json(spec);
  out.meta()["grid"] = io::grid_json(grid);
  out.meta()["scheme"] = scheme;
  out.meta()["determinism"] = kDeterminism;
}

std::string evolve_scheme(Diffusion d) {
  return std::string("conservative finite volumes, ") + to_string(d) +
         " diffusion, Peclet-switched central/upwind convection, RK4 warm-up then BDF1 with Newton";
}

// ---------------------------------------------------------------- steady

void cmd_steady(const Options& o, io::OutputDir& out) {
  const auto cfg = load_config(o, true);
  const auto spec = problem_from_config(cfg);
  const Grid grid(grid_cells(o, cfg), spec.ell);
  const auto d = spec.natural_direction();
  ExistenceReport report;
  try {
    report = check_existence(spec, d);
  } catch (const Error& e) {
    throw GateRejected(e);
  }
  if (!report.gap_ok)
    throw GateRejected(ErrorKind::GapViolation, "M - m >= epsilon: no monotone steady state");
  if (!report.length_ok)
    throw GateRejected(ErrorKind::NoRoot,
                       "2 ell does not exceed the minimal length " + io::format_label(report.c_threshold));
  const auto st = steady::steady_state(spec, grid);
  io::Table t({"x", "u", "slope"});
  for (std::size_t i = 0; i < grid.size(); ++i) t.add({grid.x(i), st.profile[i], st.slope[i]});
  out.write_csv("steady.csv", t);
  out.write_json("steady.json", {{"epsilon", spec.epsilon},
                                 {"ell", spec.ell},
                                 {"C", st.c_const},
                                 {"direction", to_string(d)},
                                 {"c_threshold", report.c_threshold}});
  describe_run(out, spec, grid, "first-integral quadrature and inverse map");
}

// ---------------------------------------------------------------- evolve

struct EvolveSetup {
  std::string initial;
  Diffusion diffusion;
  double t_end;
  std::vector<double> times;
};

EvolveSetup evolve_setup(const Config& cfg) {
  cfg.require_known("evolve", {"initial", "diffusion", "t_end", "times"});
  EvolveSetup s;
  s.initial = cfg.text("evolve", "initial", "quadratic");
  s.diffusion = diffusion_from(cfg.text("evolve", "diffusion", "mean_curvature"));
  s.times = cfg.numbers("evolve", "times", experiments::table_times());
  s.t_end = cfg.number("evolve", "t_end", s.times.empty() ? 1e3 : *std::max_element(s.times.begin(), s.times.end()));
  if (!(s.t_end > 0.0)) throw Error(ErrorKind::ConfigParse, "[evolve] t_end must be positive");
  return s;
}

io::Table trajectory_table(const Trajectory& tr) {
  std::map<double, double> xi(tr.interface_track.begin(), tr.interface_track.end());
  io::Table t({"t", "xi", "sup_u", "sup_z", "l2_dist", "dt"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& d : tr.diagnostics) {
    auto it = xi.find(d.time);
    t.add({d.time, it == xi.end() ? nan : it->second, d.sup_u, d.sup_z, d.l2_dist, d.dt});
  }
  return t;
}

void write_trajectory(io::OutputDir& out, const std::string& prefix, const Trajectory& tr) {
  out.write_csv(prefix + "trajectory.csv", trajectory_table(tr));
  for (const auto& s : tr.snapshots) {
    io::Table t({"x", "u"});
    for (std::size_t i = 0; i < s.size(); ++i) t.add({s.grid.x(i), s[i]});
    out.write_csv(prefix + "snapshots/" + time_tag(s.time) + ".csv", t);
  }
}

void cmd_evolve(const Options& o, io::OutputDir& out) {
  const auto cfg = load_config(o, true);
  const auto spec = problem_from_config(cfg);
  const Grid grid(grid_cells(o, cfg), spec.ell);
  const auto setup = evolve_setup(cfg);
  EvolveOptions opts;
  opts.diffusion = setup.diffusion;
  const auto u0 = experiments::initial_profile(setup.initial, spec, grid);
  describe_run(out, spec, grid, evolve_scheme(setup.diffusion));
  out.meta()["initial"] = setup.initial;
  const auto small = check_smallness(u0, spec);
  out.meta()["smallness"] = {{"lhs", small.lhs}, {"passes", small.passes}};
  try {
    write_trajectory(out, "", evolve(spec, u0, setup.t_end, setup.times, opts));
  } catch (const EvolveFailure& e) {
    write_trajectory(out, "partial_", e.partial());
    throw;
  }
}

// ---------------------------------------------------------------- family

void cmd_family(const Options& o, io::OutputDir& out) {
  const auto cfg = load_config(o, true);
  cfg.require_known("family", {"xi_min", "xi_max", "samples", "theta_mode"});
  const auto spec = problem_from_config(cfg);
  const auto range = family::admissible_xi_range(spec);
  const double lo = std::max(range.lo, cfg.number("family", "xi_min", range.lo));
  const double hi = std::min(range.hi, cfg.number("family", "xi_max", range.hi));
  const int samples = cfg.integer("family", "samples", 41);
  const auto mode = theta_mode_from(cfg.text("family", "theta_mode", "hyperbolic"));
  if (samples < 2 || !(hi > lo)) throw Error(ErrorKind::ConfigParse, "[family] needs samples >= 2 and xi_max > xi_min");
  std::vector<std::vector<double>> rows(samples);
  parallel_for(samples, o.workers, [&](int i) {
    const double xi = lo + (hi - lo) * i / (samples - 1);
    const auto k = family::solve_kappas(xi, spec, &range);
    const auto th = reduced::theta_value(xi, spec, mode, &range);
    rows[i] = {xi, k.kappa_minus, k.kappa_plus, k.omega, th.theta};
  });
  io::Table t({"xi", "kappa_minus", "kappa_plus", "omega", "theta"});
  for (const auto& r : rows) t.add(r);
  out.write_csv("family.csv", t);
  out.write_json("family.json", {{"epsilon", spec.epsilon},
                                 {"xi_range", {range.lo, range.hi}},
                                 {"equilibrium_xi", family::equilibrium_xi(spec)},
                                 {"theta_mode", reduced::to_string(mode)}});
  out.meta()["spec"] = io::spec_json(spec);
  out.meta()["scheme"] = "adaptive Gauss-Kronrod quadrature, root finding in log(delta)";
  out.meta()["determinism"] = kDeterminism;
}

// ---------------------------------------------------------------- spectrum

void cmd_spectrum(const Options& o, io::OutputDir& out) {
  const auto cfg = load_config(o, true);
  cfg.require_known("spectrum", {"profile", "xi", "count"});
  const auto spec = problem_from_config(cfg);
  const Grid grid(grid_cells(o, cfg), spec.ell);
  const std::string profile = cfg.text("spectrum", "profile", "family");
  const int count = cfg.integer("spectrum", "count", 6);
  spectral::SpectralReport rep;
  if (profile == "family") {
    const double xi = cfg.number("spectrum", "xi", family::equilibrium_xi(spec));
    rep = spectral::analyze(family::build_element(xi, spec, grid), spec, count);
  } else if (profile == "steady" || profile == "zero") {
    std::vector<double> u(grid.size(), 0.0), s(grid.size(), 0.0), c(grid.size(), 0.0);
    if (profile == "steady") {
      const auto st = steady::steady_state(spec, grid);
      u = st.profile.values;
      s = st.slope.values;
      // eps h(U') = f(U) + C differentiated once.
      for (std::size_t i = 0; i < grid.size(); ++i)
        c[i] = spec.flux.deriv(u[i]) * s[i] * std::pow(1.0 + s[i] * s[i], 1.5) / spec.epsilon;
    }
    rep = spectral::eigenpairs(
        spectral::assemble(GridField(grid, u), GridField(grid, s), GridField(grid, c), spec), count);
  } else {
    throw Error(ErrorKind::ConfigParse, "[spectrum] profile must be 'family', 'steady' or 'zero'");
  }
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  out.write_json("spectrum.json", {{"xi", num(rep.xi)},
                                   {"epsilon", spec.epsilon},
                                   {"profile", profile},
                                   {"eigenvalues", rep.eigenvalues},
                                   {"lambda1_predicted", num(rep.lambda1_predicted)},
                                   {"lambda2_bound", num(rep.lambda2_bound)},
                                   {"all_negative", rep.all_negative}});
  std::vector<std::string> header{"x"};
  for (std::size_t k = 0; k < rep.eigenfunctions.size(); ++k) header.push_back("phi" + std::to_string(k + 1));
  io::Table t(header);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{grid.x(i)};
    for (const auto& phi : rep.eigenfunctions) row.push_back(phi[i]);
    t.add(row);
  }
  out.write_csv("eigenfunctions.csv", t);
  describe_run(out, spec, grid, "symmetrized tridiagonal, Sturm bisection and inverse iteration");
}

// ---------------------------------------------------------------- reduce

void cmd_reduce(const Options& o, io::OutputDir& out) {
  const auto cfg = load_config(o, true);
  cfg.require_known("reduce", {"xi0", "t_start", "times", "theta_mode"});
  const auto spec = problem_from_config(cfg);
  const double t_start = cfg.number("reduce", "t_start", 10.0);
  std::vector<double> times = cfg.numbers("reduce", "times", experiments::table_times());
  std::erase_if(times, [&](double t) { return t < t_start; });
  const std::string xi0_text = cfg.text("reduce", "xi0", "auto");
  double xi0 = 0.0;
  if (xi0_text == "auto") {
    // Interface of the full evolution at t_start, from the [evolve] initial datum.
    const Grid grid(grid_cells(o, cfg), spec.ell);
    auto setup = evolve_setup(cfg);
    EvolveOptions opts;
    opts.diffusion = setup.diffusion;
    opts.track_distance = false;
    const auto tr = evolve(spec, experiments::initial_profile(setup.initial, spec, grid), t_start, {t_start}, opts);
    xi0 = interface_position(tr.snapshots.back(), CrossingPolicy::steepest);
    out.meta()["grid"] = io::grid_json(grid);
  } else {
    xi0 = cfg.number("reduce", "xi0");
  }
  reduced::ReducedOptions ro;
  ro.t_start = t_start;
  ro.mode = theta_mode_from(cfg.text("reduce", "theta_mode", "hyperbolic"));
  const auto traj = reduced::reduced_ode_solve(xi0, spec, times, ro);
  io::Table t({"t", "xi"});
  t.add({t_start, xi0});
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    if (traj.times[i] > t_start) t.add({traj.times[i], traj.xi_values[i]});
  out.write_csv("reduced.csv", t);
  out.write_json("reduced.json", {{"xi0", xi0},
                                  {"t_start", t_start},
                                  {"equilibrium_xi", traj.equilibrium},
                                  {"steps", traj.steps},
                                  {"rejected", traj.rejected},
                                  {"theta_mode", reduced::to_string(ro.mode)}});
  out.meta()["spec"] = io::spec_json(spec);
  out.meta()["scheme"] = "RK4 with step doubling on d xi/dt = theta / <psi_1, -U'>";
  out.meta()["determinism"] = kDeterminism;
}

// ---------------------------------------------------------------- tables

void cmd_tables(const Options& o, io::OutputDir& out) {
  const auto cfg = load_config(o, false);
  cfg.require_known("tables", {"table", "epsilons"});
  const int table = o.table ? o.table : cfg.integer("tables", "table", 1);
  if (table < 1 || table > 3) throw Error(ErrorKind::ConfigParse, "table must be 1, 2 or 3");
  const auto eps = cfg.numbers("tables", "epsilons", experiments::table_epsilons());
  const int cells = grid_cells(o, cfg);
  const auto diffusion = table == 3 ? Diffusion::linear : Diffusion::mean_curvature;
  std::vector<std::optional<experiments::TableRun>> runs(eps.size());
  parallel_for(static_cast<int>(eps.size()), o.workers,
               [&](int i) { runs[i] = experiments::table_run(eps[i], diffusion, cells); });

  const std::string name = "table" + std::to_string(table);
  if (table == 2) {
    io::Table t({"epsilon", "t_initial", "t_final", "xi_initial", "xi_final", "measured", "predicted", "ratio"});
    for (const auto& r : runs) {
      const auto row = experiments::speed_row(*r);
      t.add({row.epsilon, row.t_initial, row.t_final, row.xi_initial, row.xi_final, row.measured, row.predicted,
             row.measured / row.predicted});
    }
    out.write_csv(name + ".csv", t);
  } else {
    io::Table t({"epsilon", "t", "xi"});
    for (const auto& r : runs)
      for (std::size_t k = 0; k < r->times.size(); ++k) t.add({r->epsilon, r->times[k], r->xi[k]});
    out.write_csv(name + ".csv", t);
  }
  for (const auto& r : runs) {
    io::Table track({"t", "xi"});
    for (const auto& [t, x] : r->trajectory.interface_track) track.add({t, x});
    out.write_csv(name + "/eps_" + io::format_label(r->epsilon) + "/track.csv", track);
  }
  out.meta()["table"] = table;
  out.meta()["grid"] = {{"n_cells", cells}, {"ell", 1.0}};
  out.meta()["scheme"] = evolve_scheme(diffusion);
  out.meta()["determinism"] = kDeterminism;
}

// ---------------------------------------------------------------- figures

void cmd_figures(const Options& o, io::OutputDir& out) {
  const auto cfg = load_config(o, false);
  cfg.require_known("figures", {"figure"});
  const int id = o.figure ? o.figure : cfg.integer("figures", "figure", 0);
  const auto& ids = experiments::figure_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end())
    throw Error(ErrorKind::ConfigParse, "figure must be one of 3, 4, 5, 6, 7, 8");
  const auto runs = experiments::figure_runs(id, grid_cells(o, cfg));
  json described = json::array();
  for (const auto& r : runs)
    described.push_back({{"name", r.name},
                         {"spec", io::spec_json(r.spec)},
                         {"initial", r.initial},
                         {"n_cells", r.cells},
                         {"times", r.times}});
  out.meta()["figure"] = id;
  out.meta()["runs"] = described;
  out.meta()["scheme"] = evolve_scheme(Diffusion::mean_curvature);
  out.meta()["determinism"] = kDeterminism;
  parallel_for(static_cast<int>(runs.size()), o.workers, [&](int i) {
    const auto& r = runs[i];
    const std::string dir = "fig" + std::to_string(id) + "/" + r.name + "/";
    const auto tr = experiments::run_figure(r);
    out.write_csv(dir + "snapshots.csv", io::snapshot_table(tr.snapshots));
    io::Table t({"t", "xi", "sup_u", "max_slope"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& s : tr.snapshots) {
      double xi = nan;
      try {
        xi = interface_position(s, CrossingPolicy::steepest);
      } catch (const CrossingError&) {
      }
      t.add({s.time, xi, s.sup_norm(), experiments::max_slope(s)});
    }
    out.write_csv(dir + "summary.csv", t);
  });
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::ConfigParse:
    case ErrorKind::InvalidArgument:
      return kConfigError;
    case ErrorKind::GapViolation:
    case ErrorKind::DirectionMismatch:
      return kGateRejected;
    default:
      return dynamic_cast<const GateRejected*>(&e) ? kGateRejected : kNumericalFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metashock: metastable shock layers in a saturating-diffusion conservation law"};
  app.require_subcommand(1);
  app.set_version_flag("--version", METASHOCK_VERSION);
  Options o;
  app.add_option("--config", o.config_path, "configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "output directory (METASHOCK_OUT overrides)");
  app.add_option("--grid", o.grid, "number of grid cells")->check(CLI::PositiveNumber);
  app.add_option("--workers", o.workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--table", o.table, "table id for 'tables'")->check(CLI::Range(1, 3));
  app.add_option("--figure", o.figure, "figure id for 'figures'")->check(CLI::Range(3, 8));
  app.fallthrough();

  const std::vector<std::pair<std::string, std::pair<std::string, void (*)(const Options&, io::OutputDir&)>>>
      commands{{"steady", {"monotone steady state", cmd_steady}},
               {"evolve", {"time evolution from an initial datum", cmd_evolve}},
               {"family", {"approximate steady states over a xi sweep", cmd_family}},
               {"spectrum", {"eigenvalues of the linearized operator", cmd_spectrum}},
               {"reduce", {"reduced ODE for the interface position", cmd_reduce}},
               {"tables", {"interface tables (--table 1, 2 or 3)", cmd_tables}},
               {"figures", {"snapshot data for a figure (--figure 3..8)", cmd_figures}}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands) subs[name] = app.add_subcommand(name, entry.first);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }
  if (const char* env = std::getenv("METASHOCK_OUT"); env && *env) o.out = env;

  for (const auto& [name, entry] : commands) {
    if (!subs[name]->parsed()) continue;
    try {
      io::OutputDir out(o.out, name);
      if (!o.config_path.empty()) out.meta()["config"] = o.config_path;
      try {
        entry.second(o, out);
      } catch (...) {
        out.finish();
        throw;
      }
      out.finish();
      return kOk;
    } catch (const Error& e) {
      std::cerr << "metashock " << name << ": " << e.what() << "\n";
      return exit_code_for(e);
    } catch (const std::filesystem::filesystem_error& e) {
      std::cerr << "metashock " << name << ": " << e.what() << "\n";
      return kConfigError;
    }
  }
  return kOk;
}
