#pragma once

#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "wanova/errors.hpp"

namespace wanova::quad {

using Fn1 = std::function<double(double)>;
using FnK = std::function<double(std::span<const double>)>;

/// Nodes and weights of a fixed rule. Gauss-Hermite tables are for the
/// weight exp(-x^2) on the real line, Gauss-Legendre for weight 1 on [-1,1].
struct Nodes {
  std::vector<double> x;
  std::vector<double> w;
};

// Tables are generated once per order by a Golub-Welsch symmetric
// tridiagonal eigensolve and cached; safe for concurrent use.
const Nodes& gauss_hermite(int n);
const Nodes& gauss_legendre(int n);

struct GaussHermite {
  int n = 32;
};
struct GaussLegendre {
  int n = 32;
};
struct AdaptiveSimpson {
  double tol = 1e-10;
  int max_depth = 40;
};

struct RealLine {};
struct Interval {
  double a;
  double b;
};
enum class Direction { Up, Down };  // Up: [a, +inf), Down: (-inf, a]
struct SemiInfinite {
  double a;
  Direction dir = Direction::Up;
};

struct QuadratureSpec {
  std::variant<GaussHermite, GaussLegendre, AdaptiveSimpson> rule;
  std::variant<RealLine, Interval, SemiInfinite> domain;
};

/// Integrate g over the spec's domain.
///
/// Supported combinations:
///   GaussHermite  x RealLine       sum_i w_i e^{x_i^2} g(x_i); g must decay
///                                  faster than e^{-x^2} (use `scale` to match
///                                  a wider Gaussian envelope)
///   GaussLegendre x Interval       mapped fixed rule
///   AdaptiveSimpson x Interval     recursive bisection to `tol`
///   AdaptiveSimpson x RealLine     expanding symmetric domain until the
///                                  shell contribution is negligible
///   AdaptiveSimpson x SemiInfinite expanding blocks away from `a`
double integrate(const QuadratureSpec& spec, const Fn1& g);

/// As above for GaussHermite/RealLine but with the substitution x = scale*t,
/// matching integrands with Gaussian envelope exp(-(x/scale)^2).
double integrate_hermite_scaled(const Fn1& g, int n, double scale);

double integrate_gl(const Fn1& g, double a, double b, int n);
double integrate_adaptive(const Fn1& g, double a, double b, double tol,
                          int max_depth = 40);

/// Full tensor-product rule over k coordinates, k <= 4. Adaptive rules are
/// not allowed inside a tensor product.
double tensor_integrate(std::span<const QuadratureSpec> specs, const FnK& g);

}  // namespace wanova::quad
