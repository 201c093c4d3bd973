#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "metashock/evolve.hpp"
#include "metashock/steady.hpp"
#include "oracles.hpp"

using namespace metashock;

namespace {

GridField linear_between(const ProblemSpec& spec, const Grid& g) {
  auto u = GridField::sample(g, [&](double x) {
    return spec.u_minus + (spec.u_plus - spec.u_minus) * (x + spec.ell) / (2 * spec.ell);
  });
  u.values.front() = spec.u_minus;
  u.values.back() = spec.u_plus;
  return u;
}

GridField quadratic_datum(const ProblemSpec& spec, const Grid& g) {
  const double us = spec.u_minus;
  auto u = GridField::sample(g, [&](double x) { return us * (x * x / 2 - x - 0.5); });
  u.values.front() = spec.u_minus;
  u.values.back() = spec.u_plus;
  return u;
}

}  // namespace

TEST(SaturatingFlux, InverseAndDerivative) {
  for (double s : {-30.0, -1.0, 0.0, 0.3, 5.0}) {
    EXPECT_NEAR(h_inverse(h(s)), s, 1e-9 * (1 + std::abs(s)));
    EXPECT_NEAR(h_prime(s), (h(s + 1e-6) - h(s - 1e-6)) / 2e-6, 1e-8);
  }
}

TEST(SpatialOperator, LinearProfileIsStationaryForZeroFlux) {
  const ProblemSpec spec(0.1, 1.0, -0.2, 0.3, fluxes::zero());
  const Grid g(64, 1.0);
  for (auto d : {Diffusion::mean_curvature, Diffusion::linear}) {
    const auto G = spatial_operator(linear_between(spec, g), spec, d);
    EXPECT_LT(G.sup_norm(), 1e-13);
  }
}

TEST(SpatialOperator, ResidualOfExactSteadyStateIsSecondOrder) {
  const double eps = 0.05;
  const auto spec = ProblemSpec::symmetric(eps, 1.0, 0.8 * std::sqrt(eps), fluxes::burgers());
  std::vector<double> h, r;
  for (int n : {50, 100, 200, 400}) {
    const Grid g(n, 1.0);
    const auto st = steady::steady_state(spec, g);
    h.push_back(std::log(g.spacing()));
    r.push_back(std::log(spatial_operator(st.profile, spec).sup_norm()));
  }
  const auto fit = oracle::fit_line(h, r);
  EXPECT_NEAR(fit.slope, 2.0, 0.25);
}

TEST(DiscreteSteadyState, LinearDiffusionMatchesTanhProfile) {
  // eps u' = u^2/2 + C gives u = -a tanh(a x / (2 eps)) with a tanh(a / (2 eps)) = u*.
  const double eps = 0.1, us = 0.3;
  const auto spec = ProblemSpec::symmetric(eps, 1.0, us, fluxes::burgers());
  const double a = oracle::bisect([&](double a) { return a * std::tanh(a / (2 * eps)) - us; }, 1e-6, 1.0);
  const Grid g(400, 1.0);
  const auto v = discrete_steady_state(spec, g, Diffusion::linear);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    err = std::max(err, std::abs(v[i] + a * std::tanh(a * g.x(i) / (2 * eps))));
  EXPECT_LT(err, 1e-4);
}

TEST(DiscreteSteadyState, IsFixedPointOfImplicitStep) {
  const auto spec = ProblemSpec::symmetric(0.03, 1.0, std::sqrt(0.03), fluxes::burgers());
  const Grid g(200, 1.0);
  const auto v = discrete_steady_state(spec, g);
  for (double dt : {1e-3, 1.0, 1e4}) {
    const auto next = advance(v, dt, Scheme::implicit_bdf1, spec);
    EXPECT_LT(sup_distance(next, v), 1e-8) << "dt = " << dt;
  }
}

TEST(DiscreteSteadyState, ZMonitorIsConstantOnFaces) {
  const auto spec = ProblemSpec::symmetric(0.03, 1.0, std::sqrt(0.03), fluxes::burgers());
  const Grid g(200, 1.0);
  const auto v = discrete_steady_state(spec, g);
  const auto st = steady::steady_state(spec, g);
  // |z| equals |C| at the continuous steady state.
  EXPECT_NEAR(z_monitor(v, spec), std::abs(st.c_const), 5e-4);
}

TEST(Evolve, HeatEquationMatchesSeparableSolution) {
  // f = 0, linear diffusion: the sine mode decays like exp(-eps (pi/2)^2 t).
  const double eps = 0.2, amp = 0.1, t_end = 2.0;
  const ProblemSpec spec(eps, 1.0, 0.0, 0.0 + 1e-3, fluxes::zero());
  const Grid g(200, 1.0);
  auto exact = [&](double x, double t) {
    const double base = spec.u_minus + (spec.u_plus - spec.u_minus) * (x + 1) / 2;
    return base + amp * std::sin(std::numbers::pi * (x + 1) / 2) *
                      std::exp(-eps * std::numbers::pi * std::numbers::pi / 4 * t);
  };
  auto u0 = GridField::sample(g, [&](double x) { return exact(x, 0.0); });
  u0.values.front() = spec.u_minus;
  u0.values.back() = spec.u_plus;
  EvolveOptions o;
  o.diffusion = Diffusion::linear;
  o.dt_max = 1e-3;
  o.track_distance = false;
  const auto tr = evolve(spec, u0, t_end, {t_end}, o);
  const auto& u = tr.snapshots.back();
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(u[i] - exact(g.x(i), t_end)));
  // Backward Euler with dt = 1e-3: error O(dt) on a mode of size ~0.07.
  EXPECT_LT(err, 5e-5);
}

TEST(Evolve, ImplicitAgreesWithExplicitOracle) {
  // Forward Euler with tiny steps on the same semi-discretization, written independently.
  const double eps = 0.1;
  const auto spec = ProblemSpec::symmetric(eps, 1.0, 0.2, fluxes::burgers());
  const Grid g(80, 1.0);
  const double dx = g.spacing(), t_end = 0.5;
  auto u0 = quadratic_datum(spec, g);
  std::vector<double> u = u0.values;
  const double dt = 0.05 * dx * dx / eps;
  const int steps = static_cast<int>(std::ceil(t_end / dt));
  const double k = t_end / steps;
  for (int s = 0; s < steps; ++s) {
    std::vector<double> F(u.size() - 1);
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
      const double sl = (u[i + 1] - u[i]) / dx;
      // cell Peclet number is below one here, so the convective flux is the plain average
      F[i] = eps * sl / std::sqrt(1 + sl * sl) - 0.25 * (u[i] * u[i] + u[i + 1] * u[i + 1]);
    }
    for (std::size_t i = 1; i + 1 < u.size(); ++i) u[i] += k * (F[i] - F[i - 1]) / dx;
  }
  EvolveOptions o;
  o.dt_max = 1e-4;
  o.track_distance = false;
  const auto tr = evolve(spec, u0, t_end, {t_end}, o);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(tr.snapshots.back()[i] - u[i]));
  EXPECT_LT(err, 2e-5);
}

TEST(Evolve, MonotoneSupBoundedAndZNonIncreasing) {
  const double eps = 0.03;
  const auto spec = ProblemSpec::symmetric(eps, 1.0, std::sqrt(eps), fluxes::burgers());
  const Grid g(200, 1.0);
  const auto u0 = quadratic_datum(spec, g);
  const auto tr = evolve(spec, u0, 1e4, {10, 100, 1e3, 1e4});
  double z_prev = tr.diagnostics.front().sup_z;
  for (const auto& d : tr.diagnostics) {
    EXPECT_EQ(d.slope_sign, -1) << "t = " << d.time;
    EXPECT_LE(d.sup_u, u0.sup_norm() + 1e-8);
    EXPECT_LE(d.sup_z, z_prev + 1e-6) << "t = " << d.time;
    z_prev = d.sup_z;
  }
  EXPECT_EQ(tr.snapshots.size(), 4u);
  EXPECT_LT(tr.diagnostics.back().l2_dist, 1e-6);
}

TEST(Evolve, SnapshotsHitRequestedTimes) {
  const auto spec = ProblemSpec::symmetric(0.05, 1.0, 0.1, fluxes::burgers());
  const Grid g(64, 1.0);
  const auto tr = evolve(spec, quadratic_datum(spec, g), 5.0, {0.0, 0.5, 2.0, 5.0, 7.0});
  ASSERT_EQ(tr.snapshots.size(), 4u);
  EXPECT_DOUBLE_EQ(tr.snapshots[1].time, 0.5);
  EXPECT_DOUBLE_EQ(tr.snapshots.back().time, 5.0);
  EXPECT_DOUBLE_EQ(tr.diagnostics.back().time, 5.0);
}

TEST(Evolve, RejectsWrongBoundaryValues) {
  const auto spec = ProblemSpec::symmetric(0.05, 1.0, 0.1, fluxes::burgers());
  const Grid g(16, 1.0);
  auto u0 = quadratic_datum(spec, g);
  u0.values.front() = 0.0;
  EXPECT_THROW(evolve(spec, u0, 1.0, {1.0}), Error);
}

TEST(Advance, ExplicitStepAboveCapIsRejected) {
  const auto spec = ProblemSpec::symmetric(0.05, 1.0, 0.1, fluxes::burgers());
  const Grid g(100, 1.0);
  const auto u0 = quadratic_datum(spec, g);
  const double cap = explicit_step_cap(spec, g.spacing());
  EXPECT_NO_THROW(advance(u0, cap, Scheme::explicit_rk4, spec));
  try {
    advance(u0, 2 * cap, Scheme::explicit_rk4, spec);
    FAIL() << "expected ExplicitCFLViolation";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ExplicitCFLViolation);
  }
}

TEST(InterfacePosition, LinearInterpolation) {
  const Grid g(4, 1.0);  // nodes -1, -0.5, 0, 0.5, 1
  const GridField u(g, {1.0, 0.5, 0.25, -0.25, -1.0});
  EXPECT_DOUBLE_EQ(interface_position(u), 0.25);
}

TEST(InterfacePosition, MultipleCrossingsAndSteepestPolicy) {
  const Grid g(4, 1.0);
  const GridField u(g, {0.5, -0.1, 0.1, -1.0, -1.0});
  try {
    interface_position(u);
    FAIL() << "expected MultipleCrossings";
  } catch (const CrossingError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MultipleCrossings);
    EXPECT_EQ(e.count(), 3);
  }
  // Steepest crossing is the (0.1, -1.0) pair between x = 0 and x = 0.5.
  EXPECT_NEAR(interface_position(u, CrossingPolicy::steepest), 0.5 * 0.1 / 1.1, 1e-15);
  const GridField positive(g, {1, 1, 1, 1, 1});
  EXPECT_THROW(interface_position(positive), CrossingError);
}

TEST(Smallness, SmallDataPassesLargeDataFails) {
  const double eps = 0.1;
  const Grid g(200, 1.0);
  const auto small = ProblemSpec::symmetric(eps, 1.0, eps / 8, fluxes::burgers());
  const auto r1 = check_smallness(linear_between(small, g), small);
  EXPECT_TRUE(r1.passes);
  EXPECT_GT(r1.c0_bound, 0.0);
  const auto big = ProblemSpec::symmetric(eps, 1.0, std::sqrt(eps), fluxes::burgers());
  EXPECT_FALSE(check_smallness(quadratic_datum(big, g), big).passes);
}

TEST(StabilityRate, MatchesClosedForm) {
  const double eps = 0.1;
  const Grid g(200, 1.0);
  const auto spec = ProblemSpec::symmetric(eps, 1.0, eps / 2, fluxes::burgers());
  const auto st = steady::steady_state(spec, g);
  const auto r = stability_rate(spec, st);
  EXPECT_NEAR(r.sup_fprime, eps / 2, 1e-12);
  EXPECT_NEAR(r.k_rate, eps / r.b_const - 4 / (std::numbers::pi * std::numbers::pi) * eps / 2, 1e-12);
}

TEST(StabilityRegime, SmallDataConvergesExponentially) {
  const double eps = 0.1;
  const auto spec = ProblemSpec::symmetric(eps, 1.0, eps / 2, fluxes::burgers());
  const Grid g(200, 1.0);
  const auto tr = evolve(spec, quadratic_datum(spec, g), 1e3, {1e3});
  std::vector<double> t, logd;
  double reached = -1;
  for (const auto& d : tr.diagnostics) {
    if (d.time > 5 && d.l2_dist > 1e-12) {
      t.push_back(d.time);
      logd.push_back(std::log(d.l2_dist));
    }
    if (reached < 0 && d.l2_dist <= 1e-6) reached = d.time;
  }
  ASSERT_GT(reached, 0.0);
  EXPECT_LE(reached, 1e3);
  EXPECT_LT(oracle::fit_line(t, logd).slope, 0.0);
}
