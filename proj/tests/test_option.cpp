#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wanova/option.hpp"

using namespace wanova;

namespace {

AsianOptionSpec base_spec(int d, Averaging avg, Factorization fact) {
  AsianOptionSpec s;
  s.s0 = 100.0;
  s.strike = 100.0;
  s.r = 0.05;
  s.sigma = 0.2;
  s.t_final = 1.0;
  s.d = d;
  s.averaging = avg;
  s.factorization = fact;
  return s;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

}  // namespace

TEST_CASE("covariance of the discretized brownian path") {
  auto s2 = covariance(base_spec(2, Averaging::Arithmetic, Factorization::Standard));
  CHECK(s2(0, 0) == doctest::Approx(0.5));
  CHECK(s2(0, 1) == doctest::Approx(0.5));
  CHECK(s2(1, 0) == doctest::Approx(0.5));
  CHECK(s2(1, 1) == doctest::Approx(1.0));

  auto spec1 = base_spec(1, Averaging::Arithmetic, Factorization::Standard);
  spec1.t_final = 2.0;
  CHECK(covariance(spec1)(0, 0) == doctest::Approx(2.0));

  auto s3 = covariance(base_spec(3, Averaging::Arithmetic, Factorization::Standard));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(s3(i, j) == doctest::Approx(std::min(i + 1, j + 1) / 3.0));
}

TEST_CASE("cholesky factor of the 2-step covariance") {
  auto f = factorize(base_spec(2, Averaging::Arithmetic, Factorization::Standard));
  double s = std::sqrt(0.5);
  CHECK(f.a(0, 0) == doctest::Approx(s).epsilon(1e-12));
  CHECK(f.a(0, 1) == doctest::Approx(0.0));
  CHECK(f.a(1, 0) == doctest::Approx(s).epsilon(1e-12));
  CHECK(f.a(1, 1) == doctest::Approx(s).epsilon(1e-12));
}

TEST_CASE("every factorization reproduces the covariance") {
  for (int d : {1, 4, 8, 13}) {  // includes a non-power-of-two bridge
    for (auto fact : {Factorization::Standard, Factorization::BrownianBridge,
                      Factorization::PCA}) {
      auto spec = base_spec(d, Averaging::Arithmetic, fact);
      auto pf = factorize(spec);
      CHECK(max_abs_diff(pf.a.times_transpose(), covariance(spec)) < 1e-10);
    }
  }
}

TEST_CASE("pca columns are orthogonal and sorted by variance") {
  auto spec = base_spec(6, Averaging::Arithmetic, Factorization::PCA);
  auto pf = factorize(spec);
  const int d = 6;
  std::vector<double> col_norm_sq(static_cast<size_t>(d));
  for (int c = 0; c < d; ++c) {
    double s = 0.0;
    for (int r = 0; r < d; ++r) s += pf.a(r, c) * pf.a(r, c);
    col_norm_sq[static_cast<size_t>(c)] = s;  // equals the eigenvalue
  }
  for (int c = 1; c < d; ++c)
    CHECK(col_norm_sq[static_cast<size_t>(c)] <= col_norm_sq[static_cast<size_t>(c - 1)] + 1e-12);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      double dot = 0.0;
      for (int r = 0; r < d; ++r) dot += pf.a(r, i) * pf.a(r, j);
      double denom = std::sqrt(col_norm_sq[static_cast<size_t>(i)] * col_norm_sq[static_cast<size_t>(j)]);
      CHECK(std::abs(dot) / denom < 1e-9);
    }
}

TEST_CASE("phi at the origin and monotonicity in the first coordinate") {
  auto spec1 = base_spec(1, Averaging::Arithmetic, Factorization::Standard);
  AsianOption opt1(spec1);
  std::vector<double> zero1{0.0};
  double expect = 100.0 * std::exp(0.05 - 0.5 * 0.04) - 100.0;
  CHECK(opt1.phi(zero1) == doctest::Approx(expect).epsilon(1e-14));

  // the first factor column is nonnegative for all three constructions,
  // making phi strictly increasing in x1
  for (auto fact : {Factorization::Standard, Factorization::BrownianBridge,
                    Factorization::PCA}) {
    auto spec = base_spec(8, Averaging::Arithmetic, fact);
    auto pf = factorize(spec);
    double col_max = 0.0;
    for (int r = 0; r < 8; ++r) {
      CHECK(pf.a(r, 0) >= -1e-12);
      col_max = std::max(col_max, pf.a(r, 0));
    }
    CHECK(col_max > 0.0);
    AsianOption opt(spec, pf);
    std::vector<double> x(8, 0.3);
    CHECK(opt.dphi_dx1(x) > 0.0);
  }

  // tiny volatility: phi is nearly flat in x
  auto flat = base_spec(4, Averaging::Arithmetic, Factorization::Standard);
  flat.sigma = 1e-3;
  AsianOption fopt(flat);
  std::vector<double> xa(4, 1.0), xb(4, -1.0);
  CHECK(std::abs(fopt.phi(xa) - fopt.phi(xb)) < 0.5);
}

TEST_CASE("section factory matches the full evaluation") {
  auto spec = base_spec(5, Averaging::Arithmetic, Factorization::BrownianBridge);
  AsianOption opt(spec);
  auto ki = opt.kink_integrand();
  std::vector<double> x_rest{0.2, -0.4, 1.0, 0.6};
  auto sec = ki.make_section(x_rest);
  std::vector<double> x(5);
  for (int j = 1; j < 5; ++j) x[static_cast<size_t>(j)] = x_rest[static_cast<size_t>(j - 1)];
  for (double x1 : {-1.5, 0.0, 0.8}) {
    x[0] = x1;
    CHECK(sec.phi(x1) == doctest::Approx(opt.phi(x)).epsilon(1e-14));
    CHECK(sec.dphi(x1) == doctest::Approx(opt.dphi_dx1(x)).epsilon(1e-12));
  }
}

TEST_CASE("geometric closed form validated against monte carlo") {
  auto spec = base_spec(8, Averaging::Geometric, Factorization::BrownianBridge);
  double closed = geometric_closed_form(spec);
  LatticeConfig cfg;
  cfg.n = 1u << 17;
  cfg.m = 16;
  cfg.seed = 2024;
  auto mc = price_mc(spec, cfg);
  CHECK(std::abs(closed - mc.price) <= 4.0 * mc.rms_error);
  CHECK(closed > 0.0);
}

TEST_CASE("strike zero reduces to the discounted average forward") {
  auto spec = base_spec(4, Averaging::Arithmetic, Factorization::Standard);
  spec.strike = 0.0;
  double analytic = 0.0;
  for (int l = 1; l <= 4; ++l)
    analytic += spec.s0 * std::exp(spec.r * l * spec.t_final / 4.0);
  analytic = std::exp(-spec.r * spec.t_final) * analytic / 4.0;

  LatticeConfig cfg;
  cfg.n = 1u << 12;
  cfg.m = 8;
  cfg.seed = 5;
  auto rep = price_qmc_preint(spec, cfg);
  CHECK(std::abs(rep.price - analytic) <= std::max(3.0 * rep.rms_error, 1e-6 * analytic));
}

TEST_CASE("tiny volatility reaches the deterministic limit") {
  auto spec = base_spec(4, Averaging::Arithmetic, Factorization::BrownianBridge);
  spec.sigma = 1e-3;
  double mean = 0.0;
  for (int l = 1; l <= 4; ++l)
    mean += spec.s0 * std::exp((spec.r - 0.5 * spec.sigma * spec.sigma) * l * spec.t_final / 4.0);
  double deterministic = std::exp(-spec.r * spec.t_final) * std::max(mean / 4.0 - spec.strike, 0.0);
  LatticeConfig cfg;
  cfg.n = 1u << 11;
  cfg.m = 8;
  auto rep = price_qmc_preint(spec, cfg);
  CHECK(std::abs(rep.price - deterministic) < 0.05);
}

TEST_CASE("one time step prices arithmetic and geometric identically") {
  auto sa = base_spec(1, Averaging::Arithmetic, Factorization::Standard);
  auto sg = base_spec(1, Averaging::Geometric, Factorization::Standard);
  LatticeConfig cfg;
  cfg.n = 1u << 10;
  cfg.m = 8;
  auto pa = price_qmc_preint(sa, cfg);
  auto pg = price_qmc_preint(sg, cfg);
  CHECK(pa.price == doctest::Approx(pg.price).epsilon(1e-12));
  CHECK(std::abs(pa.price - geometric_closed_form(sg)) < 1e-8);
}

TEST_CASE("qmc with preintegration matches the geometric closed form") {
  auto spec = base_spec(8, Averaging::Geometric, Factorization::BrownianBridge);
  LatticeConfig cfg;
  cfg.n = 1u << 11;
  cfg.m = 8;
  cfg.seed = 71;
  auto rep = price_qmc_preint(spec, cfg);
  double closed = geometric_closed_form(spec);
  CHECK(std::abs(rep.price - closed) <=
        std::max(3.0 * rep.rms_error, 1e-3 * closed));
}

TEST_CASE("arithmetic dominates geometric and factorizations agree") {
  LatticeConfig cfg;
  cfg.n = 1u << 11;
  cfg.m = 8;
  cfg.seed = 13;
  auto ga = price_qmc_preint(base_spec(6, Averaging::Arithmetic, Factorization::BrownianBridge), cfg);
  auto gg = price_qmc_preint(base_spec(6, Averaging::Geometric, Factorization::BrownianBridge), cfg);
  CHECK(ga.price >= gg.price - 3.0 * (ga.rms_error + gg.rms_error));

  auto p_std = price_qmc_preint(base_spec(6, Averaging::Arithmetic, Factorization::Standard), cfg);
  auto p_pca = price_qmc_preint(base_spec(6, Averaging::Arithmetic, Factorization::PCA), cfg);
  CHECK(std::abs(p_std.price - ga.price) <= 3.0 * (p_std.rms_error + ga.rms_error));
  CHECK(std::abs(p_pca.price - ga.price) <= 3.0 * (p_pca.rms_error + ga.rms_error));
}

TEST_CASE("reference prices") {
  auto gspec = base_spec(8, Averaging::Geometric, Factorization::BrownianBridge);
  double rms = -1.0;
  CHECK(price_reference(gspec, &rms) == geometric_closed_form(gspec));
  CHECK(rms == 0.0);

  // the arithmetic self-oracle is consistent with a mid-effort run
  auto aspec = base_spec(2, Averaging::Arithmetic, Factorization::BrownianBridge);
  double ref_rms = 0.0;
  double ref = price_reference(aspec, &ref_rms);
  LatticeConfig cfg;
  cfg.n = 1u << 12;
  cfg.m = 16;
  cfg.seed = 321;
  auto mid = price_qmc_preint(aspec, cfg);
  CHECK(std::abs(mid.price - ref) <= 3.0 * (mid.rms_error + ref_rms) + 1e-6);
}

TEST_CASE("spec validation") {
  auto bad = base_spec(0, Averaging::Arithmetic, Factorization::Standard);
  CHECK_THROWS_AS(bad.validate(), DomainError);
  auto neg = base_spec(2, Averaging::Arithmetic, Factorization::Standard);
  neg.sigma = -1.0;
  CHECK_THROWS_AS(neg.validate(), DomainError);
}
