#include <gtest/gtest.h>

#include <cmath>

#include "metashock/steady.hpp"
#include "oracles.hpp"

using namespace metashock;

namespace {

double phi_oracle(const ProblemSpec& spec, double c) {
  const double eps = spec.epsilon;
  return oracle::simpson_graded(
      [&](double u) {
        const double y = spec.f(u) + c;
        return std::sqrt(eps * eps - y * y) / y;
      },
      spec.u_minus, spec.u_plus);
}

}  // namespace

TEST(Phi, ZeroFluxClosedForm) {
  // f = 0, u from 0 to 1, eps = 1: sqrt(1 - C^2)/C.
  auto spec = ProblemSpec(1.0, 1.0, 0.0, 1.0, fluxes::zero());
  for (double c : {0.1, 0.5, 1.0 / std::sqrt(2.0), 0.9})
    EXPECT_NEAR(steady::phi(c, spec), std::sqrt(1 - c * c) / c, 1e-13);
  EXPECT_NEAR(steady::phi(1.0 / std::sqrt(2.0), spec), 1.0, 1e-13);
}

TEST(Phi, BurgersIncreasingMatchesSimpson) {
  const double eps = 0.1, us = 0.9 * std::sqrt(eps);
  auto spec = ProblemSpec(eps, 1.0, -us, us, fluxes::burgers());
  const double M = 0.5 * us * us;
  const double c = 0.5 * (eps - M);
  EXPECT_NEAR(steady::phi(c, spec), phi_oracle(spec, c), 1e-8);
}

TEST(Phi, BurgersDecreasingMatchesSimpson) {
  const double eps = 0.1, us = 0.9 * std::sqrt(eps);
  auto spec = ProblemSpec(eps, 1.0, us, -us, fluxes::burgers());
  const double M = 0.5 * us * us;
  const double c = -M - 0.5 * (eps - M);
  EXPECT_NEAR(steady::phi(c, spec), phi_oracle(spec, c), 1e-8);
}

TEST(Phi, MonotoneOnAdmissibleInterval) {
  const double eps = 0.05;
  for (auto d : {Direction::increasing, Direction::decreasing}) {
    auto spec = ProblemSpec::symmetric(eps, 1.0, std::sqrt(eps), fluxes::burgers(), d);
    auto [lo, hi] = steady::admissible_interval(spec);
    double prev = 0.0;
    for (int k = 1; k < 40; ++k) {
      const double c = lo + (hi - lo) * k / 40.0;
      const double p = steady::phi(c, spec);
      if (k > 1) {
        if (d == Direction::increasing) EXPECT_LT(p, prev);
        else EXPECT_GT(p, prev);
      }
      prev = p;
    }
  }
}

TEST(Phi, RejectsOutOfRange) {
  auto spec = ProblemSpec(1.0, 1.0, 0.0, 1.0, fluxes::zero());
  try {
    steady::phi(1.5, spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfRange);
  }
}

TEST(Threshold, ZeroFluxVanishes) {
  auto spec = ProblemSpec(0.3, 1.0, -1.0, 2.0, fluxes::zero());
  EXPECT_NEAR(steady::threshold(spec, Direction::increasing), 0.0, 1e-15);
}

TEST(Threshold, BurgersMatchesOracleAndBound) {
  for (double eps : {0.1, 0.01, 0.005}) {
    const double us = std::sqrt(eps);
    auto spec = ProblemSpec::symmetric(eps, 1.0, us, fluxes::burgers());
    const double m = 0.0;
    const double cd = oracle::simpson(
        [&](double u) {
          const double f = 0.5 * u * u;
          return std::sqrt((f - m) * (2 * eps + m - f)) / (m + eps - f);
        },
        -us, us);
    const double c = steady::threshold(spec, Direction::decreasing);
    EXPECT_NEAR(c, cd, 1e-8 * std::max(1.0, cd));
    const double M = 0.5 * eps;
    EXPECT_GT(c, 0.0);
    EXPECT_LE(c, std::sqrt(2.0) * eps * 2 * us / (eps - (M - m)));
  }
}

TEST(Threshold, EqualsLimitOfPhi) {
  const double eps = 0.1, us = std::sqrt(eps);
  auto spec = ProblemSpec::symmetric(eps, 1.0, us, fluxes::burgers());
  auto [lo, hi] = steady::admissible_interval(spec);
  const double c = steady::threshold(spec, Direction::decreasing);
  EXPECT_NEAR(steady::phi(lo + 1e-10, spec), c, 1e-4);
}

TEST(Threshold, GapViolation) {
  auto spec = ProblemSpec::symmetric(0.01, 1.0, 0.2, fluxes::burgers());
  try {
    steady::threshold(spec, Direction::decreasing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GapViolation);
  }
}

TEST(IntegrationConstant, ZeroFluxClosedForm) {
  // phi(C) = sqrt(1-C^2)/C = 2 with eps = 1, u from 0 to 1: C = 1/sqrt(5).
  auto spec = ProblemSpec(1.0, 1.0, 0.0, 1.0, fluxes::zero());
  EXPECT_NEAR(steady::solve_integration_constant(spec, Direction::increasing), 1.0 / std::sqrt(5.0),
              1e-12);
}

TEST(IntegrationConstant, SatisfiesLengthCondition) {
  for (double eps : {0.1, 0.01, 0.005}) {
    auto spec = ProblemSpec::symmetric(eps, 1.0, std::sqrt(eps), fluxes::burgers());
    const double c = steady::solve_integration_constant(spec, Direction::decreasing);
    EXPECT_NEAR(phi_oracle(spec, c), 2.0, 1e-7);
  }
}

TEST(IntegrationConstant, RejectsWhenGateFails) {
  auto spec = ProblemSpec::symmetric(0.01, 1.0, std::sqrt(0.03), fluxes::burgers());
  try {
    steady::solve_integration_constant(spec, Direction::decreasing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoRoot);
  }
}

TEST(Reconstruct, ZeroFluxIsLinear) {
  auto spec = ProblemSpec(1.0, 1.0, 0.0, 1.0, fluxes::zero());
  Grid grid(200, 1.0);
  auto st = steady::steady_state(spec, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(st.profile[i], 0.5 * (grid.x(i) + 1.0), 1e-10);
    EXPECT_NEAR(st.slope[i], 0.5, 1e-10);
  }
}

TEST(Reconstruct, BurgersSymmetricIsOdd) {
  for (double eps : {0.1, 0.01}) {
    auto spec = ProblemSpec::symmetric(eps, 1.0, std::sqrt(eps), fluxes::burgers());
    Grid grid(400, 1.0);
    auto st = steady::steady_state(spec, grid);
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(st.profile[i], -st.profile[n - 1 - i], 1e-8);
    for (std::size_t i = 1; i < n; ++i) EXPECT_LT(st.profile[i], st.profile[i - 1]);
  }
}

TEST(Reconstruct, SatisfiesFirstIntegral) {
  const double eps = 0.01;
  auto spec = ProblemSpec::symmetric(eps, 1.0, std::sqrt(eps), fluxes::burgers());
  Grid grid(4000, 1.0);
  auto st = steady::steady_state(spec, grid);
  // eps h(u') - f(u) = C, with u' from centered differences of the profile.
  const double dx = grid.spacing();
  for (std::size_t i = 1; i + 1 < grid.size(); i += 37) {
    const double s = (st.profile[i + 1] - st.profile[i - 1]) / (2 * dx);
    const double z = eps * s / std::sqrt(1 + s * s) - spec.f(st.profile[i]);
    EXPECT_NEAR(z, st.c_const, 1e-6);
  }
}

TEST(AdmissibleSpeed, KnownValues) {
  EXPECT_EQ(steady::admissible_speed(ProblemSpec::symmetric(0.1, 1.0, 0.3, fluxes::burgers())), 0.0);
  EXPECT_NEAR(steady::admissible_speed(ProblemSpec(0.1, 1.0, 0.5, -0.2, fluxes::burgers())), -0.15,
              1e-15);
  EXPECT_NEAR(steady::admissible_speed(ProblemSpec(0.1, 1.0, 0.5, -0.2, fluxes::linear(1.0))), -1.0,
              1e-15);
}
