#include "wanova/weights.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "wanova/quadrature.hpp"

namespace wanova {
namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log(sqrt(2*pi))

double gauss_log_cdf(double x) {
  if (x > -36.0) return std::log(0.5 * std::erfc(-x / kSqrt2));
  // asymptotic expansion of the left tail, accurate to ~1e-14 here
  double z = 1.0 / (x * x);
  double series = z * (-1.0 + z * (3.0 + z * (-15.0 + z * (105.0 - 945.0 * z))));
  return -0.5 * x * x - kLogSqrt2Pi - std::log(-x) + std::log1p(series);
}

// Acklam's rational approximation to the normal quantile.
double acklam(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double gauss_inv_cdf(double p) {
  double x = acklam(p);
  // two Halley refinements against the erfc-based cdf
  for (int i = 0; i < 2; ++i) {
    double e = 0.5 * std::erfc(-x / kSqrt2) - p;
    double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    if (!std::isfinite(u)) break;
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double logistic_log_cdf(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

}  // namespace

PsiSpec PsiSpec::gaussian_decay(double alpha) {
  if (!(alpha > 0.0)) throw DomainError("gaussian_decay: alpha must be positive");
  return {Kind::GaussianDecay, alpha};
}
PsiSpec PsiSpec::exp_decay(double alpha) {
  if (!(alpha > 0.0)) throw DomainError("exp_decay: alpha must be positive");
  return {Kind::ExpDecay, alpha};
}
PsiSpec PsiSpec::constant(double c) {
  if (!(c > 0.0)) throw DomainError("constant: c must be positive");
  return {Kind::Constant, c};
}

double WeightPair::rho(double x) const {
  switch (rho_family) {
    case RhoFamily::GaussianStd:
      return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    case RhoFamily::Logistic: {
      double e = std::exp(-std::abs(x));
      double s = 1.0 + e;
      return e / (s * s);
    }
  }
  return 0.0;
}

double WeightPair::log_rho(double x) const {
  switch (rho_family) {
    case RhoFamily::GaussianStd:
      return -0.5 * x * x - kLogSqrt2Pi;
    case RhoFamily::Logistic:
      return -std::abs(x) - 2.0 * std::log1p(std::exp(-std::abs(x)));
  }
  return 0.0;
}

double WeightPair::cdf(double x) const {
  switch (rho_family) {
    case RhoFamily::GaussianStd:
      return 0.5 * std::erfc(-x / kSqrt2);
    case RhoFamily::Logistic:
      return 1.0 / (1.0 + std::exp(-x));
  }
  return 0.0;
}

double WeightPair::sf(double x) const {
  switch (rho_family) {
    case RhoFamily::GaussianStd:
      return 0.5 * std::erfc(x / kSqrt2);
    case RhoFamily::Logistic:
      return 1.0 / (1.0 + std::exp(x));
  }
  return 0.0;
}

double WeightPair::log_cdf(double x) const {
  switch (rho_family) {
    case RhoFamily::GaussianStd:
      return gauss_log_cdf(x);
    case RhoFamily::Logistic:
      return logistic_log_cdf(x);
  }
  return 0.0;
}

double WeightPair::log_sf(double x) const { return log_cdf(-x); }

double WeightPair::inv_cdf(double p) const {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("inv_cdf: p must lie strictly inside (0,1)");
  switch (rho_family) {
    case RhoFamily::GaussianStd:
      return gauss_inv_cdf(p);
    case RhoFamily::Logistic:
      return std::log(p) - std::log1p(-p);
  }
  return 0.0;
}

double WeightPair::psi_value(double x) const {
  switch (psi.kind) {
    case PsiSpec::Kind::GaussianDecay:
      return std::exp(-x * x / (2.0 * psi.param));
    case PsiSpec::Kind::ExpDecay:
      return std::exp(-psi.param * std::abs(x));
    case PsiSpec::Kind::Constant:
      return psi.param;
  }
  return 1.0;
}

double WeightPair::log_psi(double x) const {
  switch (psi.kind) {
    case PsiSpec::Kind::GaussianDecay:
      return -x * x / (2.0 * psi.param);
    case PsiSpec::Kind::ExpDecay:
      return -psi.param * std::abs(x);
    case PsiSpec::Kind::Constant:
      return std::log(psi.param);
  }
  return 0.0;
}

std::string WeightPair::rho_name() const {
  return rho_family == RhoFamily::GaussianStd ? "gaussian" : "logistic";
}

std::string WeightPair::psi_name() const {
  char buf[64];
  switch (psi.kind) {
    case PsiSpec::Kind::GaussianDecay:
      std::snprintf(buf, sizeof buf, "gaussian_decay:alpha=%g", psi.param);
      break;
    case PsiSpec::Kind::ExpDecay:
      std::snprintf(buf, sizeof buf, "exp_decay:alpha=%g", psi.param);
      break;
    case PsiSpec::Kind::Constant:
      std::snprintf(buf, sizeof buf, "constant:c=%g", psi.param);
      break;
  }
  return buf;
}

namespace {

enum class Growth { Convergent, Divergent, Inconclusive };

// log-space integrand of one condition integral; `power` is the exponent on
// the cdf/sf factor (2 for the weak condition, 1 for the strong one).
std::function<double(double)> condition_integrand(const WeightPair& pair,
                                                  bool left_tail, int power,
                                                  bool* saturated) {
  return [=, &pair](double t) {
    double lg = power * (left_tail ? pair.log_cdf(t) : pair.log_sf(t)) -
                pair.log_psi(t);
    if (lg > 400.0) {
      if (saturated) *saturated = true;
      lg = 400.0;
    }
    return std::exp(lg);
  };
}

struct Classified {
  Growth growth = Growth::Inconclusive;
  std::vector<TruncationSample> samples;
};

// adaptive integration with the tolerance scaled to the integrand magnitude
// (divergent condition integrands reach e^400; an absolute 1e-12 target
// would sit below the roundoff floor and exhaust the refinement depth)
double integrate_scaled(const std::function<double(double)>& g, double a,
                        double b, double rel_tol) {
  const auto& gl = quad::gauss_legendre(32);
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double coarse = 0.0, peak = 0.0;
  for (size_t i = 0; i < gl.x.size(); ++i) {
    double v = g(c + h * gl.x[i]);
    coarse += h * gl.w[i] * v;
    peak = std::max(peak, std::abs(v));
  }
  double scale = std::max({1.0, std::abs(coarse), peak});
  return quad::integrate_adaptive(g, a, b, rel_tol * scale, 48);
}

// Truncation-doubling classifier over R in {10,20,40,80}. Divergence is
// declared when the last doubling grows the integral by a factor >= 1.5 (or
// the integrand saturates); convergence when shell increments decay.
Classified classify_tail(const WeightPair& pair, bool left_tail, int power) {
  static const double radii[] = {10.0, 20.0, 40.0, 80.0};
  bool saturated = false;
  auto g = condition_integrand(pair, left_tail, power, &saturated);
  Classified out;
  double acc = 0.0, prev_shell_lo = 0.0;
  for (double r : radii) {
    double a = left_tail ? -r : prev_shell_lo;
    double b = left_tail ? -prev_shell_lo : r;
    // growth ratios are judged against 1.5x; 1e-6 relative is ample
    acc += integrate_scaled(g, std::min(a, b), std::max(a, b), 1e-6);
    prev_shell_lo = r;
    out.samples.push_back({r, acc});
  }
  if (saturated) {
    out.growth = Growth::Divergent;
    return out;
  }
  const auto& s = out.samples;
  double i2 = s[1].value, i3 = s[2].value, i4 = s[3].value;
  if (i3 > 0.0 && i4 / i3 >= 1.5) {
    out.growth = Growth::Divergent;
  } else {
    double d3 = i3 - i2, d4 = i4 - i3;
    double scale = std::max(i4, 1e-300);
    if (d4 <= 0.75 * d3 + 1e-14 * scale || d4 <= 1e-12 * scale)
      out.growth = Growth::Convergent;
  }
  return out;
}

Growth combine(Growth a, Growth b) {
  if (a == Growth::Divergent || b == Growth::Divergent) return Growth::Divergent;
  if (a == Growth::Inconclusive || b == Growth::Inconclusive)
    return Growth::Inconclusive;
  return Growth::Convergent;
}

void append(std::vector<TruncationSample>& dst,
            const std::vector<TruncationSample>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

}  // namespace

ConditionReport check_conditions_numeric(const WeightPair& pair) {
  auto weak_l = classify_tail(pair, true, 2);
  auto weak_r = classify_tail(pair, false, 2);
  auto strong_l = classify_tail(pair, true, 1);
  auto strong_r = classify_tail(pair, false, 1);

  ConditionReport rep;
  append(rep.diagnostics, weak_l.samples);
  append(rep.diagnostics, weak_r.samples);
  append(rep.diagnostics, strong_l.samples);
  append(rep.diagnostics, strong_r.samples);

  Growth weak = combine(weak_l.growth, weak_r.growth);
  Growth strong = combine(strong_l.growth, strong_r.growth);
  if (weak == Growth::Inconclusive ||
      (weak == Growth::Convergent && strong == Growth::Inconclusive))
    throw ClassificationInconclusive(
        "numeric condition classifier: growth pattern at R=80 is neither "
        "clearly convergent nor clearly divergent for " +
        pair.rho_name() + " / " + pair.psi_name());

  rep.weak_holds = weak == Growth::Convergent;
  rep.strong_holds = rep.weak_holds && strong == Growth::Convergent;
  if (rep.strong_holds) rep.c_constant = compute_C(pair);
  return rep;
}

ConditionReport check_conditions(const WeightPair& pair) {
  ConditionReport rep;
  bool weak = false, strong = false;
  switch (pair.rho_family) {
    case RhoFamily::GaussianStd:
      switch (pair.psi.kind) {
        case PsiSpec::Kind::GaussianDecay:
          weak = pair.psi.param >= 0.5;
          strong = pair.psi.param > 1.0;
          break;
        case PsiSpec::Kind::ExpDecay:
        case PsiSpec::Kind::Constant:
          weak = strong = true;  // Gaussian tails beat any exponential
          break;
      }
      break;
    case RhoFamily::Logistic:
      switch (pair.psi.kind) {
        case PsiSpec::Kind::GaussianDecay:
          weak = strong = false;  // 1/psi outgrows the exponential cdf tails
          break;
        case PsiSpec::Kind::ExpDecay:
          weak = pair.psi.param < 2.0;
          strong = pair.psi.param < 1.0;
          break;
        case PsiSpec::Kind::Constant:
          weak = strong = true;
          break;
      }
      break;
  }
  rep.weak_holds = weak;
  rep.strong_holds = strong;
  // diagnostics: strong-condition truncation profile, saturation-clamped
  auto diag_l = classify_tail(pair, true, 1);
  auto diag_r = classify_tail(pair, false, 1);
  append(rep.diagnostics, diag_l.samples);
  append(rep.diagnostics, diag_r.samples);
  if (strong) rep.c_constant = compute_C(pair);
  return rep;
}

double compute_C(const WeightPair& pair) {
  bool saturated = false;
  auto g = [&](double t) {
    double lg = pair.log_cdf(t) + pair.log_sf(t) - pair.log_psi(t);
    if (lg > 400.0) {
      saturated = true;
      lg = 400.0;
    }
    return std::exp(lg);
  };
  const double rel_target = 1e-10;
  double total = integrate_scaled(g, -10.0, 10.0, 1e-13);
  double r = 10.0;
  double prev_inc = std::numeric_limits<double>::infinity();
  while (r < 20480.0) {
    double inc = integrate_scaled(g, -2.0 * r, -r, 1e-13) +
                 integrate_scaled(g, r, 2.0 * r, 1e-13);
    total += inc;
    r *= 2.0;
    if (saturated) throw DivergenceDetected("compute_C: integrand blows up; the strong condition fails for " + pair.rho_name() + " / " + pair.psi_name());
    if (inc <= rel_target * std::max(total, 1e-300)) return total;
    if (inc >= prev_inc && r >= 80.0)
      throw DivergenceDetected("compute_C: truncations do not converge for " + pair.rho_name() + " / " + pair.psi_name());
    prev_inc = inc;
  }
  throw DivergenceDetected("compute_C: tail contribution never fell below the relative target for " + pair.rho_name() + " / " + pair.psi_name());
}

RhoRule rho_rule(const WeightPair& pair, double extra_rate, int n) {
  RhoRule r;
  if (pair.rho_family == RhoFamily::GaussianStd) {
    double rate = 0.5 + std::max(extra_rate, -0.45);
    double scale = 1.0 / std::sqrt(rate);
    const auto& gh = quad::gauss_hermite(n);
    r.x.resize(gh.x.size());
    r.w.resize(gh.x.size());
    for (size_t i = 0; i < gh.x.size(); ++i) {
      double x = scale * gh.x[i];
      r.x[i] = x;
      r.w[i] = scale * gh.w[i] * std::exp(gh.x[i] * gh.x[i]) * pair.rho(x);
    }
    return r;
  }
  // logistic: substitute u = Phi(x). The integrand picks up logarithmic
  // endpoint behaviour, handled by a dyadically graded panel mesh.
  const auto& central = quad::gauss_legendre(std::max(n, 16));
  auto add_panel = [&](double a, double b, const quad::Nodes& gl) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (size_t i = 0; i < gl.x.size(); ++i) {
      double u = c + h * gl.x[i];
      r.x.push_back(pair.inv_cdf(u));
      r.w.push_back(h * gl.w[i]);
    }
  };
  add_panel(0.25, 0.75, central);
  const auto& tail = quad::gauss_legendre(8);
  for (int k = 0; k < 46; ++k) {
    double hi = std::pow(2.0, -k - 2);
    add_panel(hi * 0.5, hi, tail);
    add_panel(1.0 - hi, 1.0 - 0.5 * hi, tail);
  }
  return r;
}

double integrate_against_rho(const WeightPair& pair,
                             const std::function<double(double)>& g, int n,
                             double extra_rate) {
  RhoRule r = rho_rule(pair, extra_rate, n);
  double sum = 0.0;
  for (size_t i = 0; i < r.x.size(); ++i) sum += r.w[i] * g(r.x[i]);
  return sum;
}

}  // namespace wanova
