#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wanova/errors.hpp"

namespace wanova {

enum class RhoFamily { GaussianStd, Logistic };

struct PsiSpec {
  enum class Kind { GaussianDecay, ExpDecay, Constant };
  Kind kind = Kind::Constant;
  double param = 1.0;  // alpha for decay families, c for Constant

  static PsiSpec gaussian_decay(double alpha);
  static PsiSpec exp_decay(double alpha);
  static PsiSpec constant(double c);
};

/// A (rho, psi) weight-function pair for one coordinate. rho is a strictly
/// positive probability density with distribution function Phi; psi is a
/// strictly positive weight on differentiated variables.
struct WeightPair {
  RhoFamily rho_family = RhoFamily::GaussianStd;
  PsiSpec psi;
  double tolerance = 1e-10;

  double rho(double x) const;
  double log_rho(double x) const;
  double cdf(double x) const;      // Phi(x)
  double sf(double x) const;       // 1 - Phi(x)
  double log_cdf(double x) const;  // safe in the deep left tail
  double log_sf(double x) const;   // safe in the deep right tail
  double inv_cdf(double p) const;  // throws DomainError for p outside (0,1)

  double psi_value(double x) const;
  double log_psi(double x) const;

  std::string rho_name() const;
  std::string psi_name() const;
};

struct TruncationSample {
  double radius;
  double value;
};

struct ConditionReport {
  bool weak_holds = false;
  bool strong_holds = false;
  std::optional<double> c_constant;  // present iff strong_holds
  std::vector<TruncationSample> diagnostics;
};

/// Classify the pair against the weak and strong integrability conditions.
/// Uses the analytic classification for the built-in families; the numeric
/// truncation classifier is the fallback. Computes C when strong holds.
ConditionReport check_conditions(const WeightPair& pair);

/// Numeric-only classifier (truncation doubling over R in {10,20,40,80},
/// divergence declared when a doubling grows the integral by more than 1.5x).
/// Throws ClassificationInconclusive on boundary growth patterns.
ConditionReport check_conditions_numeric(const WeightPair& pair);

/// C(rho, psi) = integral of Phi(t)(1 - Phi(t))/psi(t) over the real line,
/// by adaptive quadrature on a symmetric expanding domain (relative tail
/// target 1e-10). Throws DivergenceDetected when truncations do not settle.
double compute_C(const WeightPair& pair);

/// Fixed rule for averages against rho, the density folded into the weights:
/// a scaled Gauss-Hermite rule for the Gaussian density, or a Gauss-Legendre
/// rule through the logit map (endpoint-graded) for the logistic.
/// `extra_rate` is additional Gaussian decay e^{-r x^2} of the integrand
/// itself (0 for bounded ones); it sets the Hermite node scale.
struct RhoRule {
  std::vector<double> x;
  std::vector<double> w;
};
RhoRule rho_rule(const WeightPair& pair, double extra_rate, int n);

/// Average of g against rho using rho_rule.
double integrate_against_rho(const WeightPair& pair,
                             const std::function<double(double)>& g, int n,
                             double extra_rate = 0.0);

}  // namespace wanova
