#include <gtest/gtest.h>

#include <cmath>

#include "metashock/family.hpp"
#include "oracles.hpp"

using namespace metashock;

namespace {

ProblemSpec table_spec(double eps) { return ProblemSpec::symmetric(eps, 1.0, std::sqrt(eps), fluxes::burgers()); }

double psi_oracle(double kappa, double u, const ProblemSpec& spec) {
  const double eps = spec.epsilon;
  return oracle::simpson_graded(
      [&](double s) {
        const double d = kappa - spec.f(s);
        return std::sqrt(eps * eps - d * d) / d;
      },
      0.0, u, 12, 4000);
}

}  // namespace

TEST(Psi, ZeroFluxClosedForm) {
  const ProblemSpec spec(0.1, 1.0, 0.3, -0.3, fluxes::zero());
  for (double kappa : {0.01, 0.05, 0.09})
    for (double u : {0.3, -0.3, 0.1})
      EXPECT_NEAR(family::psi_integral(kappa, u, spec), u * std::sqrt(0.01 - kappa * kappa) / kappa, 1e-12);
}

TEST(Psi, BurgersMatchesSimpson) {
  const auto spec = ProblemSpec::symmetric(0.1, 1.0, 0.2, fluxes::burgers());
  for (double delta : {1e-2, 1e-3, 1e-4})
    for (double u : {0.2, -0.2}) {
      const double kappa = spec.f(u) + delta;
      const double ref = psi_oracle(kappa, u, spec);
      EXPECT_NEAR(family::psi_integral(kappa, u, spec), ref, 1e-8 * std::abs(ref)) << delta << " " << u;
    }
}

TEST(Psi, SingularPathIsRejected) {
  const auto spec = ProblemSpec::symmetric(0.1, 1.0, 0.2, fluxes::burgers());
  try {
    family::psi_integral(0.01, 0.2, spec);  // kappa < f(0.2) = 0.02
    FAIL() << "expected SingularPath";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularPath);
  }
}

TEST(XiRange, MarginsMatchLimitIntegral) {
  const double eps = 0.01;
  const auto spec = table_spec(eps);
  const auto r = family::admissible_xi_range(spec);
  // kappa = eps: sqrt(f (2 eps - f)) / (eps - f)
  const double c = oracle::simpson_graded(
      [&](double s) {
        const double f = spec.f(s);
        return std::sqrt(f * (2 * eps - f)) / (eps - f);
      },
      0.0, spec.u_minus, 12, 4000);
  EXPECT_NEAR(r.c_minus, c, 1e-9);
  EXPECT_NEAR(r.c_plus, -c, 1e-9);
  EXPECT_NEAR(r.lo, -1 + c + 1e-6, 1e-9);
}

TEST(XiRange, RejectsIncreasingData) {
  const auto spec = ProblemSpec::symmetric(0.01, 1.0, 0.1, fluxes::burgers(), Direction::increasing);
  EXPECT_THROW(family::admissible_xi_range(spec), Error);
}

TEST(SolveKappas, SatisfyDefiningIntegrals) {
  const auto spec = ProblemSpec::symmetric(0.1, 1.0, 0.2, fluxes::burgers());
  for (double xi : {-0.4, 0.0, 0.3}) {
    const auto k = family::solve_kappas(xi, spec);
    EXPECT_NEAR(psi_oracle(k.kappa_plus, spec.u_plus, spec), xi - 1, 1e-7);
    EXPECT_NEAR(psi_oracle(k.kappa_minus, spec.u_minus, spec), xi + 1, 1e-7);
  }
}

TEST(SolveKappas, OutOfRange) {
  const auto spec = table_spec(0.01);
  try {
    family::solve_kappas(0.99, spec);
    FAIL() << "expected XiOutOfRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::XiOutOfRange);
  }
}

TEST(SolveKappas, InsideBandAndWithinBoundsAtTwentySamples) {
  for (double eps : {0.03, 0.01, 0.005}) {
    const auto spec = table_spec(eps);
    const auto r = family::admissible_xi_range(spec);
    for (int i = 0; i < 20; ++i) {
      const double xi = -0.8 + 1.6 * i / 19.0;
      const auto k = family::solve_kappas(xi, spec, &r);
      EXPECT_GT(k.delta_plus, 0.0);
      EXPECT_GT(k.delta_minus, 0.0);
      EXPECT_LT(k.kappa_plus, eps);
      EXPECT_LT(k.kappa_minus, eps);
      const auto b = family::kappa_bounds(xi, spec);
      EXPECT_GE(k.delta_plus, b.plus_lo * (1 - 1e-9)) << eps << " " << xi;
      EXPECT_LE(k.delta_plus, b.plus_hi * (1 + 1e-9)) << eps << " " << xi;
      EXPECT_GE(k.delta_minus, b.minus_lo * (1 - 1e-9)) << eps << " " << xi;
      EXPECT_LE(k.delta_minus, b.minus_hi * (1 + 1e-9)) << eps << " " << xi;
    }
  }
}

TEST(Omega, StrictlyDecreasingWithUniqueRoot) {
  const auto spec = table_spec(0.01);
  const auto r = family::admissible_xi_range(spec);
  double prev = std::numeric_limits<double>::infinity();
  int sign_changes = 0;
  for (int i = 0; i <= 40; ++i) {
    const double xi = r.lo + (r.hi - r.lo) * i / 40.0;
    const double g = family::solve_kappas(xi, spec, &r).omega;
    EXPECT_LT(g, prev);
    if (i > 0 && std::signbit(g) != std::signbit(prev)) ++sign_changes;
    prev = g;
  }
  EXPECT_EQ(sign_changes, 1);
}

TEST(Equilibrium, SymmetricBurgersAtZero) {
  for (double eps : {0.03, 0.01, 0.005}) EXPECT_NEAR(family::equilibrium_xi(table_spec(eps)), 0.0, 1e-10);
}

TEST(Equilibrium, ShiftedFluxMovesRoot) {
  const double eps = 0.01;
  const auto spec =
      ProblemSpec::symmetric(eps, 1.0, std::sqrt(eps), fluxes::shifted_burgers(0.1 * std::sqrt(eps)));
  const double xi = family::equilibrium_xi(spec);
  EXPECT_GT(std::abs(xi), 0.05);
  EXPECT_NEAR(family::omega_error(xi, spec), 0.0, 1e-12);
}

TEST(BuildElement, ProfileShapeAndFirstIntegral) {
  const double eps = 0.01, xi = -0.3;
  const auto spec = table_spec(eps);
  const Grid g(400, 1.0);
  const auto e = family::build_element(xi, spec, g);
  EXPECT_EQ(e.profile.values.front(), spec.u_minus);
  EXPECT_EQ(e.profile.values.back(), spec.u_plus);
  for (std::size_t i = 0; i + 1 < g.size(); ++i) EXPECT_GE(e.profile[i], e.profile[i + 1]);
  const double dx = g.spacing();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    if (std::abs(x - xi) < e.smoothing_width) continue;
    const double kappa = x < xi ? e.kappa_minus : e.kappa_plus;
    const double s = e.slope[i];
    // eps |h(U')| = kappa - f(U) on each branch
    EXPECT_NEAR(eps * std::abs(s) / std::sqrt(1 + s * s), kappa - spec.f(e.profile[i]), 1e-9) << x;
    if (i > 0 && i + 1 < g.size()) {
      const double fd = (e.profile[i + 1] - e.profile[i - 1]) / (2 * dx);
      EXPECT_NEAR(fd, s, 2e-3 * (1 + std::abs(s)) + 10 * dx * dx * std::abs(e.curvature[i])) << x;
    }
  }
  // The interface sits at xi.
  std::size_t j = 0;
  while (e.profile[j + 1] > 0) ++j;
  const double cross = g.x(j) + dx * e.profile[j] / (e.profile[j] - e.profile[j + 1]);
  EXPECT_NEAR(cross, xi, 1e-3);
}

TEST(BuildElement, NegativeWidthRejected) {
  const auto spec = table_spec(0.01);
  EXPECT_THROW(family::build_element(0.0, spec, Grid(100, 1.0), -0.1), Error);
}
