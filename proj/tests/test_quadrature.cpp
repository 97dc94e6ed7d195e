#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wanova/quadrature.hpp"

using namespace wanova;
using namespace wanova::quad;

namespace {
// odd double factorial (2k-1)!! for Hermite moments
double dfact_odd(int k) {
  double v = 1.0;
  for (int i = 2 * k - 1; i > 1; i -= 2) v *= i;
  return v;
}
}  // namespace

TEST_CASE("gauss-hermite weights sum to sqrt(pi) and nodes are symmetric") {
  for (int n : {4, 8, 16, 32, 48}) {
    const auto& gh = gauss_hermite(n);
    double sum = 0.0;
    for (double w : gh.w) sum += w;
    CHECK(std::abs(sum - std::sqrt(std::numbers::pi)) < 1e-12);
    for (int i = 0; i < n / 2; ++i) {
      CHECK(gh.x[i] == -gh.x[n - 1 - i]);
      CHECK(gh.w[i] == gh.w[n - 1 - i]);
    }
  }
}

TEST_CASE("gauss-hermite matches the known 4-point rule") {
  const auto& gh = gauss_hermite(4);
  CHECK(std::abs(gh.x[3] - 1.6506801238857846) < 1e-13);
  CHECK(std::abs(gh.x[2] - 0.5246476232752903) < 1e-13);
  CHECK(std::abs(gh.w[3] - 0.08131283544724518) < 1e-13);
  CHECK(std::abs(gh.w[2] - 0.8049140900055128) < 1e-13);
}

TEST_CASE("gauss-hermite integrates monomials of degree <= 2n-1 exactly") {
  for (int n : {4, 8, 16}) {
    const auto& gh = gauss_hermite(n);
    for (int k = 0; 2 * k <= 2 * n - 1; ++k) {
      double got = 0.0;
      for (int i = 0; i < n; ++i) got += gh.w[i] * std::pow(gh.x[i], 2 * k);
      double want = std::sqrt(std::numbers::pi) * dfact_odd(k) / std::pow(2.0, k);
      CHECK(std::abs(got - want) < 1e-12 * std::max(1.0, want));
    }
  }
}

TEST_CASE("interval rules hit the arctan fixture") {
  auto g = [](double x) { return 4.0 / (1.0 + x * x); };
  CHECK(std::abs(integrate_gl(g, 0.0, 1.0, 32) - std::numbers::pi) < 1e-13);
  CHECK(std::abs(integrate_adaptive(g, 0.0, 1.0, 1e-10) - std::numbers::pi) < 1e-9);
}

TEST_CASE("doubling the gauss order never hurts on smooth fixtures") {
  auto g = [](double x) { return std::exp(x) * std::cos(3.0 * x); };
  double exact = integrate_adaptive(g, -1.0, 2.0, 1e-13, 48);
  double prev_err = 1e300;
  for (int n : {4, 8, 16, 32}) {
    double err = std::abs(integrate_gl(g, -1.0, 2.0, n) - exact);
    CHECK(err <= prev_err + 1e-15);
    prev_err = err;
  }
}

TEST_CASE("real-line integration of the standard normal density") {
  auto rho = [](double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  };
  QuadratureSpec gh{GaussHermite{48}, RealLine{}};
  CHECK(std::abs(integrate(gh, rho) - 1.0) < 1e-12);
  QuadratureSpec as{AdaptiveSimpson{1e-11, 44}, RealLine{}};
  CHECK(std::abs(integrate(as, rho) - 1.0) < 1e-9);

  auto x2rho = [&](double x) { return x * x * rho(x); };
  CHECK(std::abs(integrate(gh, x2rho) - 1.0) < 1e-10);
}

TEST_CASE("semi-infinite domains via expanding blocks") {
  QuadratureSpec up{AdaptiveSimpson{1e-11, 44}, SemiInfinite{0.0, Direction::Up}};
  CHECK(std::abs(integrate(up, [](double x) { return std::exp(-x); }) - 1.0) < 1e-9);
  QuadratureSpec dn{AdaptiveSimpson{1e-11, 44}, SemiInfinite{1.0, Direction::Down}};
  CHECK(std::abs(integrate(dn, [](double x) { return std::exp(x - 1.0); }) - 1.0) < 1e-9);
}

TEST_CASE("quadrature error reporting") {
  CHECK_THROWS_AS(integrate_adaptive([](double x) { return std::sqrt(std::abs(x)); },
                                     -1.0, 1.0, 1e-14, 6),
                  MaxDepthExceeded);
  CHECK_THROWS_AS(integrate_adaptive([](double) { return std::nan(""); }, 0.0, 1.0, 1e-8),
                  NonFiniteSample);
}

TEST_CASE("tensor rules at small dimension") {
  auto rho_spec = QuadratureSpec{GaussHermite{32}, RealLine{}};
  auto rho = [](double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  };
  std::vector<QuadratureSpec> specs{rho_spec, rho_spec};

  double mass = tensor_integrate(specs, [&](std::span<const double> x) {
    return rho(x[0]) * rho(x[1]);
  });
  CHECK(std::abs(mass - 1.0) < 1e-10);

  double odd = tensor_integrate(specs, [&](std::span<const double> x) {
    return x[0] * x[1] * rho(x[0]) * rho(x[1]);
  });
  CHECK(std::abs(odd) < 1e-10);

  double second = tensor_integrate(specs, [&](std::span<const double> x) {
    return (x[0] * x[0] + x[1] * x[1]) * rho(x[0]) * rho(x[1]);
  });
  CHECK(std::abs(second - 2.0) < 1e-9);

  std::vector<QuadratureSpec> five(5, rho_spec);
  CHECK_THROWS_AS(tensor_integrate(five, [](std::span<const double>) { return 1.0; }),
                  DimensionTooLarge);
}
