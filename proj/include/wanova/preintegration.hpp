#pragma once

#include <functional>
#include <optional>
#include <span>

#include "wanova/errors.hpp"

namespace wanova {

/// A kinked integrand max(phi, 0) with phi strictly increasing in the first
/// coordinate. The section factory, when supplied, returns cheap 1-D
/// restrictions phi(., x_rest) for repeated evaluation along x_1.
struct KinkIntegrand {
  struct Section {
    std::function<double(double)> phi;
    std::function<double(double)> dphi;
  };

  int d = 0;
  std::function<double(std::span<const double>)> phi;
  std::function<double(std::span<const double>)> dphi_dx1;
  std::function<Section(std::span<const double>)> make_section;  // optional

  enum class Certificate { Asserted, Probed };
  Certificate certificate = Certificate::Probed;
  int probe_samples = 64;
};

enum class KinkKind { Root, AllPositive, AllNegative };

struct KinkLocation {
  KinkKind kind = KinkKind::Root;
  double x1 = 0.0;  // meaningful for Root only
};

struct PreintOptions {
  int inner_order = 64;    // Gauss-Legendre order of the inner rule
  double root_tol = 1e-12;  // |phi| tolerance at the located kink
};

/// Smoothing by integrating out x_1 against the standard normal density:
/// eval(x_rest) = integral over x_1 of max(phi, 0) rho(x_1).
/// Monotonicity in x_1 localizes the kink to a single root.
class PreintegratedFunction {
 public:
  PreintegratedFunction(KinkIntegrand integrand, PreintOptions opts = {});

  int rest_dimension() const { return integrand_.d - 1; }
  const PreintOptions& options() const { return opts_; }

  /// Locate the sign change of phi(., x_rest): bracket expansion from
  /// [-8, 8] with doubling until a sign change or |x1| > 40, then
  /// safeguarded Newton. Throws MonotonicityViolated on an impossible sign
  /// pattern and NoConvergence past 200 iterations.
  KinkLocation find_kink(std::span<const double> x_rest) const;

  double eval(std::span<const double> x_rest) const;

  /// Adapter: the (d-1)-dimensional integrand consumed by the lattice rule.
  std::function<double(std::span<const double>)> integrand() const;

 private:
  KinkIntegrand::Section section(std::span<const double> x_rest) const;
  KinkIntegrand integrand_;
  PreintOptions opts_;
};

}  // namespace wanova
