#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "metashock/numerics/integral_map.hpp"
#include "metashock/numerics/quadrature.hpp"
#include "metashock/numerics/roots.hpp"
#include "metashock/numerics/symmetric_tridiagonal_eigen.hpp"
#include "metashock/numerics/tridiagonal.hpp"
#include "oracles.hpp"

using namespace metashock;
using namespace metashock::numerics;

TEST(Quadrature, PolynomialIsExact) {
  auto r = integrate([](double x) { return x * x * x - 2 * x + 1; }, -1.0, 2.0);
  EXPECT_NEAR(r.value, 15.0 / 4.0 - 3.0 + 3.0, 1e-13);
  EXPECT_TRUE(r.converged);
}

TEST(Quadrature, ReversedLimitsFlipSign) {
  auto fwd = integrate([](double x) { return std::exp(x); }, 0.0, 1.0).value;
  auto bwd = integrate([](double x) { return std::exp(x); }, 1.0, 0.0).value;
  EXPECT_NEAR(fwd, std::numbers::e - 1.0, 1e-13);
  EXPECT_DOUBLE_EQ(fwd, -bwd);
}

TEST(Quadrature, SquareRootEndpointSingularity) {
  auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, {1e-12, 1e-12, 4000});
  EXPECT_NEAR(r.value, 2.0, 1e-9);
}

TEST(Quadrature, SharpPeakMatchesOracle) {
  const double d = 1e-6;
  auto f = [d](double x) { return 1.0 / (d + x * x); };
  const double exact = 2.0 * std::atan(1.0 / std::sqrt(d)) / std::sqrt(d);
  EXPECT_NEAR(integrate(f, -1.0, 1.0).value / exact, 1.0, 1e-11);
}

TEST(Roots, FindsBracketedRoot) {
  const double r = find_root([](double x) { return std::cos(x) - x; }, 0.0, 1.0);
  EXPECT_NEAR(r, 0.7390851332151607, 1e-15);
}

TEST(Roots, RejectsMissingSignChange) {
  try {
    find_root([](double x) { return x * x + 1.0; }, -1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoRoot);
  }
}

TEST(Roots, OpenIntervalBracketNearBlowUp) {
  // 1/x - 1e8 changes sign at x = 1e-8, very close to the singular end of (0, 1).
  auto f = [](double x) { return 1.0 / x - 1e8; };
  auto b = bracket_open_interval(f, 0.0, 1.0);
  ASSERT_TRUE(b.has_value());
  EXPECT_NEAR(find_root(f, b->lo, b->hi), 1e-8, 1e-20);
}

TEST(Tridiagonal, SolvesAgainstDenseProduct) {
  const std::size_t n = 9;
  Tridiagonal m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.diag[i] = (i % 3 == 0) ? 1e-3 : -2.0 + 0.1 * i;  // forces pivoting
    if (i > 0) m.lower[i] = 1.0 + 0.05 * i;
    if (i + 1 < n) m.upper[i] = 0.7 - 0.03 * i;
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(1.0 + i);
  auto b = m.apply(x);
  auto y = solve(m, b);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y[i], x[i], 1e-12);
}

TEST(SymmetricTridiagonalEigen, DirichletLaplacianSpectrum) {
  const int n = 50;
  std::vector<double> d(n, -2.0), e(n - 1, 1.0);
  SymmetricTridiagonalEigen solver(d, e);
  auto pairs = solver.largest(4);
  for (int k = 1; k <= 4; ++k) {
    const double exact = -4.0 * std::pow(std::sin(k * std::numbers::pi / (2.0 * (n + 1))), 2);
    EXPECT_NEAR(pairs[k - 1].value, exact, 1e-13);
    // eigenvector ~ sin(k pi i / (n+1)), up to sign
    double dot = 0, norm = 0;
    for (int i = 0; i < n; ++i) {
      const double s = std::sin(k * std::numbers::pi * (i + 1) / (n + 1));
      dot += s * pairs[k - 1].vector[i];
      norm += s * s;
    }
    EXPECT_NEAR(std::abs(dot) / std::sqrt(norm), 1.0, 1e-12);
  }
}

TEST(SymmetricTridiagonalEigen, SturmCountIsMonotone) {
  std::vector<double> d = {3, -1, 4, 1, -5, 9, 2}, e = {1, 2, -1, 0.5, 3, -2};
  SymmetricTridiagonalEigen solver(d, e);
  int prev = 0;
  for (double x = -20; x <= 20; x += 0.25) {
    const int c = solver.count_below(x);
    EXPECT_GE(c, prev);
    prev = c;
  }
  EXPECT_EQ(prev, 7);
}

TEST(IntegralMap, InvertsLogarithmicMap) {
  // x(u) = log(u) from u = 1 to u = e^3.
  IntegralMap map([](double u) { return 1.0 / u; }, 1.0, std::exp(3.0), 0.0, 64);
  for (double x : {0.0, 0.3, 1.7, 2.9999}) EXPECT_NEAR(map.u_of(x), std::exp(x), 1e-12 * std::exp(x));
  EXPECT_NEAR(map.x_of(2.0), std::log(2.0), 1e-14);
}

TEST(IntegralMap, DecreasingUWithSteepEnd) {
  // x(u) = -log(u) for u from 1 down to 1e-9: u(x) = exp(-x) becomes flat for large x.
  IntegralMap map([](double u) { return -1.0 / u; }, 1.0, 1e-9, 0.0, 128);
  for (double x : {0.5, 5.0, 15.0, 20.0}) EXPECT_NEAR(map.u_of(x) / std::exp(-x), 1.0, 1e-10);
}
