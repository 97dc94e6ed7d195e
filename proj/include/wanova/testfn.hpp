#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wanova/errors.hpp"

namespace wanova {

/// Sum of separable product terms: f(x) = sum_k c_k prod_j g_{k,j}(x_j),
/// with every 1-D factor supplied together with its derivative. Mixed first
/// partials follow by swapping factors for their derivatives, so all 2^d
/// partial evaluators come for free.
struct SeparableFunction {
  struct Factor {
    std::function<double(double)> g;
    std::function<double(double)> dg;
    // Gaussian envelope rate r: |g| <~ poly * exp(-r x^2). May be negative
    // for growing factors; used only to size quadrature grids.
    double gauss_rate = 0.0;
  };
  struct Term {
    double coeff = 1.0;
    std::vector<Factor> factors;  // one per coordinate
  };
  int d = 0;
  std::vector<Term> terms;

  double partial(std::uint32_t mask, std::span<const double> x) const;
};

/// A d-variate function together with analytic evaluators for every mixed
/// first-order partial. partials[mask] differentiates the coordinates set in
/// mask (bit j-1 <-> coordinate j); partials[0] is f itself.
struct SmoothTestFunction {
  int d = 0;
  std::string id;
  std::vector<std::function<double(std::span<const double>)>> partials;
  std::vector<double> gauss_rate;  // per-coordinate envelope rate of f
  std::shared_ptr<const SeparableFunction> separable;  // optional fast path

  double operator()(std::span<const double> x) const { return partials[0](x); }
  double partial(std::uint32_t mask, std::span<const double> x) const {
    return partials[mask](x);
  }
};

SmoothTestFunction from_separable(SeparableFunction fn, std::string id);

/// Checks each supplied partial against a central finite difference of its
/// parent (one fewer differentiated coordinate) at the probe points; throws
/// DomainError beyond `rel_tol` relative disagreement.
void check_partial_consistency(const SmoothTestFunction& f,
                               std::span<const std::vector<double>> probes,
                               double rel_tol = 1e-5);

// Factor builders.
SeparableFunction::Factor poly_gauss_factor(std::vector<double> poly_coeffs,
                                            double beta);  // p(x) e^{-x^2/beta}
SeparableFunction::Factor constant_factor(double value = 1.0);
SeparableFunction::Factor normal_cdf_factor();
SeparableFunction::Factor sin_factor(double freq);
SeparableFunction::Factor gauss_growth_factor(double scale,
                                              double rate);  // scale * e^{rate x^2}

/// Random member of the audit family: polynomial of degree <= 3 in each
/// term times prod_j exp(-x_j^2/beta_j) with beta_j >= 8. Deterministic in
/// the seed. Values are O(1)-scaled.
SmoothTestFunction random_poly_gauss(int d, std::uint64_t seed);

}  // namespace wanova
