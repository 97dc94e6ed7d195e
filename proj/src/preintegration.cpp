#include "wanova/preintegration.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <vector>

#include "wanova/quadrature.hpp"

namespace wanova {
namespace {

constexpr double kBracket0 = 8.0;
constexpr double kBracketCap = 40.0;

double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

PreintegratedFunction::PreintegratedFunction(KinkIntegrand integrand,
                                             PreintOptions opts)
    : integrand_(std::move(integrand)), opts_(opts) {
  if (integrand_.d < 1)
    throw DomainError("PreintegratedFunction: dimension must be >= 1");
  if (!integrand_.phi || !integrand_.dphi_dx1)
    throw DomainError("PreintegratedFunction: phi and dphi_dx1 are required");
  if (integrand_.certificate == KinkIntegrand::Certificate::Probed) {
    // stratified monotonicity probe along x_1 at the origin of x_rest
    std::vector<double> x(static_cast<size_t>(integrand_.d), 0.0);
    int k = std::max(integrand_.probe_samples, 2);
    for (int i = 0; i < k; ++i) {
      x[0] = -10.0 + 20.0 * (i + 0.5) / k;
      if (!(integrand_.dphi_dx1(x) > 0.0))
        throw MonotonicityViolated(
            "dphi/dx1 is not strictly positive at a probe point");
    }
  }
}

KinkIntegrand::Section PreintegratedFunction::section(
    std::span<const double> x_rest) const {
  if (integrand_.make_section) return integrand_.make_section(x_rest);
  // generic fallback: assemble the full point per call
  auto d = integrand_.d;
  std::vector<double> base(static_cast<size_t>(d));
  for (int j = 1; j < d; ++j) base[static_cast<size_t>(j)] = x_rest[static_cast<size_t>(j - 1)];
  KinkIntegrand::Section s;
  s.phi = [this, base](double x1) mutable {
    base[0] = x1;
    return integrand_.phi(base);
  };
  s.dphi = [this, base](double x1) mutable {
    base[0] = x1;
    return integrand_.dphi_dx1(base);
  };
  return s;
}

KinkLocation PreintegratedFunction::find_kink(
    std::span<const double> x_rest) const {
  if (static_cast<int>(x_rest.size()) != integrand_.d - 1)
    throw DimensionMismatch("find_kink: x_rest dimension");
  auto sec = section(x_rest);

  double lo = -kBracket0, hi = kBracket0;
  double flo = sec.phi(lo), fhi = sec.phi(hi);
  if (!std::isfinite(flo) || !std::isfinite(fhi))
    throw NonFiniteSample("find_kink: phi returned a non-finite value");
  if (flo > 0.0 && fhi < 0.0)
    throw MonotonicityViolated("sign pattern contradicts a phi increasing in x1");
  while ((flo > 0.0) == (fhi > 0.0) && std::max(-lo, hi) < kBracketCap) {
    lo *= 2.0;
    hi *= 2.0;
    flo = sec.phi(lo);
    fhi = sec.phi(hi);
    if (flo > 0.0 && fhi < 0.0)
      throw MonotonicityViolated("sign pattern contradicts a phi increasing in x1");
  }
  if (flo > 0.0 && fhi > 0.0) return {KinkKind::AllPositive, 0.0};
  if (flo <= 0.0 && fhi <= 0.0) return {KinkKind::AllNegative, 0.0};

  // safeguarded Newton within [lo, hi]
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double fx = sec.phi(x);
    if (std::abs(fx) <= opts_.root_tol) return {KinkKind::Root, x};
    if (fx > 0.0)
      hi = x;
    else
      lo = x;
    double dfx = sec.dphi(x);
    double next = dfx > 0.0 ? x - fx / dfx : x;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) next = 0.5 * (lo + hi);
    x = next;
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(x))) {
      double fm = sec.phi(x);
      if (std::abs(fm) <= std::sqrt(opts_.root_tol)) return {KinkKind::Root, x};
      break;
    }
  }
  throw NoConvergence("find_kink: root iteration did not converge");
}

double PreintegratedFunction::eval(std::span<const double> x_rest) const {
  KinkLocation loc = find_kink(x_rest);
  if (loc.kind == KinkKind::AllNegative) return 0.0;
  double start = loc.kind == KinkKind::Root ? loc.x1 : -kBracketCap;
  auto sec = section(x_rest);
  auto g = [&sec](double x1) { return sec.phi(x1) * std_normal_pdf(x1); };

  // composite stretches of width 16 marching right until negligible;
  // the Gaussian factor kills everything within a few stretches
  double total = 0.0;
  double a = start;
  const double width = 16.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 16; ++k) {
    double piece = quad::integrate_gl(g, a, a + width, opts_.inner_order);
    if (!std::isfinite(piece))
      throw NonFiniteSample("preintegrate: non-finite inner integral");
    total += piece;
    a += width;
    double mag = std::abs(piece);
    // stop only once past the Gaussian bulk, on a decreasing negligible block
    if (a >= 9.0 && mag <= 1e-16 * std::max(std::abs(total), 1e-300) &&
        mag <= prev)
      break;
    prev = mag;
  }
  return total;
}

std::function<double(std::span<const double>)>
PreintegratedFunction::integrand() const {
  // copy enough state to keep the adapter self-contained
  auto self = std::make_shared<PreintegratedFunction>(*this);
  return [self](std::span<const double> x_rest) { return self->eval(x_rest); };
}

}  // namespace wanova
