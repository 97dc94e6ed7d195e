#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "wanova/lattice.hpp"
#include "wanova/linalg.hpp"
#include "wanova/preintegration.hpp"

namespace wanova {

enum class Averaging { Arithmetic, Geometric };
enum class Factorization { Standard, BrownianBridge, PCA };

struct AsianOptionSpec {
  double s0 = 100.0;
  double strike = 100.0;
  double r = 0.05;
  double sigma = 0.2;
  double t_final = 1.0;
  int d = 8;  // number of equal time steps
  Averaging averaging = Averaging::Arithmetic;
  Factorization factorization = Factorization::BrownianBridge;

  void validate() const;
};

struct PathFactorization {
  Matrix a;  // d x d, with A A^T equal to the Brownian covariance
};

/// Brownian-motion covariance at the monitoring times: min(i,j) T/d.
Matrix covariance(const AsianOptionSpec& spec);

/// Standard (Cholesky), Brownian bridge, or PCA factorization of the
/// covariance. The bridge uses level-order midpoint bisection with the
/// floor-midpoint convention for non-power-of-two d; PCA signs are fixed so
/// each column's largest-magnitude entry is positive.
PathFactorization factorize(const AsianOptionSpec& spec);

/// phi and payoff of the option bound to a factorization, plus the pieces
/// the preintegration step needs.
class AsianOption {
 public:
  AsianOption(AsianOptionSpec spec, PathFactorization fact);
  explicit AsianOption(AsianOptionSpec spec);

  const AsianOptionSpec& spec() const { return spec_; }
  const Matrix& a_matrix() const { return fact_.a; }

  double phi(std::span<const double> x) const;
  double payoff(std::span<const double> x) const;  // max(phi, 0)
  double dphi_dx1(std::span<const double> x) const;

  KinkIntegrand kink_integrand() const;

 private:
  AsianOptionSpec spec_;
  PathFactorization fact_;
  std::vector<double> drift_;  // (r - sigma^2/2) t_l
};

struct LatticeConfig {
  std::uint64_t n = 1u << 13;
  int m = 16;
  std::uint64_t seed = 42;
  std::uint64_t korobov_a = 0;      // 0: use the shipped table / search
  std::string vector_file;          // optional explicit generating vector
  PreintOptions preint;
};

struct PriceReport {
  double price = 0.0;
  double rms_error = 0.0;  // discounted, over the random shifts
  std::uint64_t n = 0;
  int m = 0;
};

/// Discounted price by the shifted lattice rule applied to the preintegrated
/// (d-1)-dimensional integrand. d = 1 collapses to the exact 1-D integral.
PriceReport price_qmc_preint(const AsianOptionSpec& spec,
                             const LatticeConfig& cfg);

/// Same estimator without the smoothing step (kinked integrand, d dims).
PriceReport price_qmc_plain(const AsianOptionSpec& spec,
                            const LatticeConfig& cfg);

/// Plain Monte Carlo baseline.
PriceReport price_mc(const AsianOptionSpec& spec, const LatticeConfig& cfg);

/// Lognormal closed form for the geometric average.
double geometric_closed_form(const AsianOptionSpec& spec);

/// Reference price: geometric -> closed form; arithmetic -> a high-effort
/// fixed-seed run (N = 2^16, m = 32, QMC + preintegration), rms reported
/// through *rms_out when given.
double price_reference(const AsianOptionSpec& spec, double* rms_out = nullptr);

}  // namespace wanova
