#include "wanova/testfn.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "wanova/rng.hpp"

namespace wanova {

double SeparableFunction::partial(std::uint32_t mask,
                                  std::span<const double> x) const {
  double sum = 0.0;
  for (const Term& t : terms) {
    double prod = t.coeff;
    for (int j = 0; j < d && prod != 0.0; ++j) {
      const Factor& f = t.factors[static_cast<size_t>(j)];
      prod *= (mask & (1u << j)) ? f.dg(x[j]) : f.g(x[j]);
    }
    sum += prod;
  }
  return sum;
}

SmoothTestFunction from_separable(SeparableFunction fn, std::string id) {
  auto shared = std::make_shared<const SeparableFunction>(std::move(fn));
  SmoothTestFunction out;
  out.d = shared->d;
  out.id = std::move(id);
  out.separable = shared;
  out.partials.resize(1u << shared->d);
  for (std::uint32_t mask = 0; mask < out.partials.size(); ++mask)
    out.partials[mask] = [shared, mask](std::span<const double> x) {
      return shared->partial(mask, x);
    };
  out.gauss_rate.assign(static_cast<size_t>(shared->d), 0.0);
  for (int j = 0; j < shared->d; ++j) {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& t : shared->terms)
      r = std::min(r, t.factors[static_cast<size_t>(j)].gauss_rate);
    out.gauss_rate[static_cast<size_t>(j)] = std::isfinite(r) ? r : 0.0;
  }
  return out;
}

void check_partial_consistency(const SmoothTestFunction& f,
                               std::span<const std::vector<double>> probes,
                               double rel_tol) {
  const double h = 1e-4;
  for (const auto& probe : probes) {
    for (std::uint32_t mask = 1; mask < (1u << f.d); ++mask) {
      int j = 0;
      while (!(mask & (1u << j))) ++j;
      std::uint32_t parent = mask & ~(1u << j);
      std::vector<double> xp(probe), xm(probe);
      xp[static_cast<size_t>(j)] += h;
      xm[static_cast<size_t>(j)] -= h;
      double fd = (f.partial(parent, xp) - f.partial(parent, xm)) / (2.0 * h);
      double an = f.partial(mask, probe);
      double scale = std::max({std::abs(an), std::abs(fd), 1e-6});
      if (std::abs(fd - an) > rel_tol * scale)
        throw DomainError("partial evaluators disagree with finite differences for " + f.id);
    }
  }
}

SeparableFunction::Factor poly_gauss_factor(std::vector<double> poly_coeffs,
                                            double beta) {
  // derivative polynomial of p(x) e^{-x^2/beta}: (p' - 2x p / beta) e^{...}
  std::vector<double> dp(poly_coeffs.size() + 1, 0.0);
  for (size_t k = 1; k < poly_coeffs.size(); ++k)
    dp[k - 1] += static_cast<double>(k) * poly_coeffs[k];
  if (std::isfinite(beta))
    for (size_t k = 0; k < poly_coeffs.size(); ++k)
      dp[k + 1] -= 2.0 * poly_coeffs[k] / beta;
  auto horner = [](const std::vector<double>& c, double x) {
    double v = 0.0;
    for (size_t k = c.size(); k-- > 0;) v = v * x + c[k];
    return v;
  };
  SeparableFunction::Factor f;
  f.gauss_rate = std::isfinite(beta) ? 1.0 / beta : 0.0;
  f.g = [poly_coeffs, beta, horner](double x) {
    double e = std::isfinite(beta) ? std::exp(-x * x / beta) : 1.0;
    return horner(poly_coeffs, x) * e;
  };
  f.dg = [dp, beta, horner](double x) {
    double e = std::isfinite(beta) ? std::exp(-x * x / beta) : 1.0;
    return horner(dp, x) * e;
  };
  return f;
}

SeparableFunction::Factor constant_factor(double value) {
  SeparableFunction::Factor f;
  f.g = [value](double) { return value; };
  f.dg = [](double) { return 0.0; };
  f.gauss_rate = 0.0;
  return f;
}

SeparableFunction::Factor normal_cdf_factor() {
  SeparableFunction::Factor f;
  f.g = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
  f.dg = [](double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  };
  f.gauss_rate = 0.0;
  return f;
}

SeparableFunction::Factor sin_factor(double freq) {
  SeparableFunction::Factor f;
  f.g = [freq](double x) { return std::sin(freq * x); };
  f.dg = [freq](double x) { return freq * std::cos(freq * x); };
  f.gauss_rate = 0.0;
  return f;
}

SeparableFunction::Factor gauss_growth_factor(double scale, double rate) {
  SeparableFunction::Factor f;
  f.g = [=](double x) { return scale * std::exp(rate * x * x); };
  f.dg = [=](double x) { return scale * 2.0 * rate * x * std::exp(rate * x * x); };
  f.gauss_rate = -rate;
  return f;
}

SmoothTestFunction random_poly_gauss(int d, std::uint64_t seed) {
  CounterRng rng(seed, /*stream=*/0x7e57f12345ULL);
  std::uint64_t ctr = 0;
  auto u01 = [&] { return rng.uniform(ctr++); };

  SeparableFunction fn;
  fn.d = d;
  int n_terms = 2 + static_cast<int>(u01() * 3.0);  // 2..4 terms
  for (int t = 0; t < n_terms; ++t) {
    SeparableFunction::Term term;
    term.coeff = 2.0 * u01() - 1.0;
    for (int j = 0; j < d; ++j) {
      int degree = static_cast<int>(u01() * 4.0);  // 0..3
      std::vector<double> coeffs(static_cast<size_t>(degree) + 1);
      for (double& c : coeffs) c = (2.0 * u01() - 1.0);
      if (coeffs.back() == 0.0) coeffs.back() = 0.5;
      double beta = 8.0 + 8.0 * u01();  // in [8, 16]
      term.factors.push_back(poly_gauss_factor(std::move(coeffs), beta));
    }
    fn.terms.push_back(std::move(term));
  }
  char name[32];
  std::snprintf(name, sizeof name, "poly_gauss_%d_%llu", d,
                static_cast<unsigned long long>(seed));
  return from_separable(std::move(fn), name);
}

}  // namespace wanova
