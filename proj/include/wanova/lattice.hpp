#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wanova/errors.hpp"

namespace wanova {

/// Rank-1 lattice generating vector: point n is frac(n z / N + shift).
struct GeneratingVector {
  std::vector<std::uint64_t> z;
  std::uint64_t n = 0;

  static GeneratingVector korobov(std::uint64_t a, std::uint64_t n, int d);
  /// File format: line 1 "N=<int>", line 2 "z=<comma-separated ints>".
  static GeneratingVector load(const std::string& path);

  int dimension() const { return static_cast<int>(z.size()); }
  /// 1 <= z_j < n and gcd(z_j, n) = 1 for all j; throws InvalidVector.
  void validate() const;
};

struct ShiftedRuleRun {
  int m = 0;                        // number of independent shifts
  std::uint64_t seed = 0;
  std::vector<double> shift_means;  // one estimate per shift
  double mean = 0.0;
  double rms_error = 0.0;  // sample std of shift means / sqrt(m)
};

/// The N lattice points for one shift, in [0,1)^d.
std::vector<std::vector<double>> lattice_points(const GeneratingVector& vec,
                                                std::span<const double> shift);

using IntegrandR = std::function<double(std::span<const double>)>;

/// Randomly shifted lattice rule estimate of the rho-weighted integral of f
/// over R^d (standard normal map through the inverse cdf per coordinate).
/// Deterministic in (seed, vec, m); per-shift substreams come from the
/// counter RNG so results do not depend on evaluation order.
ShiftedRuleRun qmc_estimate(const IntegrandR& f, const GeneratingVector& vec,
                            int m, std::uint64_t seed);

/// Plain Monte Carlo baseline: m batches of N i.i.d. standard normal points.
ShiftedRuleRun mc_estimate(const IntegrandR& f, int d, std::uint64_t n, int m,
                           std::uint64_t seed);

/// Small grid search for a Korobov multiplier: minimizes the estimated RMS
/// error of the shifted rule on a smooth product training integrand.
std::uint64_t korobov_search(std::uint64_t n, int d, std::uint64_t seed,
                             int n_candidates = 128);

/// Multiplier table shipped with the library ("N=<n> a=<a>" lines); returns
/// the entry for n or falls back to korobov_search when absent.
std::uint64_t default_korobov_a(std::uint64_t n, int d,
                                const std::string& table_path = "");

}  // namespace wanova
