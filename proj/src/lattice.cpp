#include "wanova/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "wanova/rng.hpp"
#include "wanova/weights.hpp"

namespace wanova {
namespace {

std::uint64_t gcd64(std::uint64_t a, std::uint64_t b) {
  while (b) {
    a %= b;
    std::swap(a, b);
  }
  return a;
}

const WeightPair& std_normal() {
  static const WeightPair pair{RhoFamily::GaussianStd, PsiSpec::constant(1.0), 1e-10};
  return pair;
}

ShiftedRuleRun finalize(std::vector<double> means, std::uint64_t seed) {
  ShiftedRuleRun run;
  run.m = static_cast<int>(means.size());
  run.seed = seed;
  run.mean = std::accumulate(means.begin(), means.end(), 0.0) / run.m;
  double ss = 0.0;
  for (double v : means) ss += (v - run.mean) * (v - run.mean);
  run.rms_error = run.m > 1 ? std::sqrt(ss / (run.m - 1)) / std::sqrt(double(run.m)) : 0.0;
  run.shift_means = std::move(means);
  return run;
}

}  // namespace

GeneratingVector GeneratingVector::korobov(std::uint64_t a, std::uint64_t n,
                                           int d) {
  if (n < 2) throw InvalidVector("korobov: N must be at least 2");
  if (gcd64(a % n, n) != 1) throw InvalidVector("korobov: gcd(a, N) must be 1");
  GeneratingVector v;
  v.n = n;
  v.z.resize(static_cast<size_t>(d));
  std::uint64_t p = 1;
  for (int j = 0; j < d; ++j) {
    v.z[static_cast<size_t>(j)] = p;
    p = (p * (a % n)) % n;
  }
  v.validate();
  return v;
}

GeneratingVector GeneratingVector::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open vector file: " + path);
  std::string line1, line2;
  if (!std::getline(in, line1) || !std::getline(in, line2))
    throw ParseError("vector file needs two lines: " + path);
  GeneratingVector v;
  if (line1.rfind("N=", 0) != 0)
    throw ParseError("vector file line 1 must start with N=");
  try {
    v.n = std::stoull(line1.substr(2));
  } catch (const std::exception&) {
    throw ParseError("bad N in vector file");
  }
  if (line2.rfind("z=", 0) != 0)
    throw ParseError("vector file line 2 must start with z=");
  std::stringstream ss(line2.substr(2));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      v.z.push_back(std::stoull(tok));
    } catch (const std::exception&) {
      throw ParseError("bad component in vector file: " + tok);
    }
  }
  if (v.z.empty()) throw ParseError("vector file has no components");
  v.validate();
  return v;
}

void GeneratingVector::validate() const {
  if (n < 2) throw InvalidVector("point count must be at least 2");
  for (std::uint64_t zj : z) {
    if (zj < 1 || zj >= n)
      throw InvalidVector("components must satisfy 1 <= z_j < N");
    if (gcd64(zj, n) != 1)
      throw InvalidVector("components must be coprime with N");
  }
}

std::vector<std::vector<double>> lattice_points(const GeneratingVector& vec,
                                                std::span<const double> shift) {
  vec.validate();
  const int d = vec.dimension();
  if (static_cast<int>(shift.size()) != d)
    throw DimensionMismatch("lattice_points: shift dimension");
  for (double s : shift)
    if (!(s >= 0.0 && s < 1.0))
      throw InvalidVector("shift components must lie in [0,1)");
  std::vector<std::vector<double>> pts(vec.n, std::vector<double>(static_cast<size_t>(d)));
  for (std::uint64_t i = 0; i < vec.n; ++i)
    for (int j = 0; j < d; ++j) {
      double u = double((i * vec.z[static_cast<size_t>(j)]) % vec.n) / double(vec.n) +
                 shift[static_cast<size_t>(j)];
      if (u >= 1.0) u -= 1.0;
      pts[i][static_cast<size_t>(j)] = u;
    }
  return pts;
}

ShiftedRuleRun qmc_estimate(const IntegrandR& f, const GeneratingVector& vec,
                            int m, std::uint64_t seed) {
  vec.validate();
  if (m < 1) throw DomainError("qmc_estimate: need at least one shift");
  const int d = vec.dimension();
  const double n_inv = 1.0 / double(vec.n);
  const double clamp_lo = 0.5 * n_inv;       // guard against exact 0/1
  const double clamp_hi = 1.0 - clamp_lo;
  const auto& pair = std_normal();

  std::vector<double> means(static_cast<size_t>(m));
  std::vector<double> shift(static_cast<size_t>(d));
  std::vector<double> x(static_cast<size_t>(d));
  for (int s = 0; s < m; ++s) {
    CounterRng rng(seed, static_cast<std::uint64_t>(s));
    for (int j = 0; j < d; ++j)
      shift[static_cast<size_t>(j)] = rng.uniform(static_cast<std::uint64_t>(j));
    double acc = 0.0;
    for (std::uint64_t i = 0; i < vec.n; ++i) {
      for (int j = 0; j < d; ++j) {
        double u = double((i * vec.z[static_cast<size_t>(j)]) % vec.n) * n_inv +
                   shift[static_cast<size_t>(j)];
        if (u >= 1.0) u -= 1.0;
        u = std::clamp(u, clamp_lo, clamp_hi);
        x[static_cast<size_t>(j)] = pair.inv_cdf(u);
      }
      double v = f(x);
      if (!std::isfinite(v))
        throw NonFiniteSample("qmc_estimate: integrand returned a non-finite value");
      acc += v;
    }
    means[static_cast<size_t>(s)] = acc * n_inv;
  }
  return finalize(std::move(means), seed);
}

ShiftedRuleRun mc_estimate(const IntegrandR& f, int d, std::uint64_t n, int m,
                           std::uint64_t seed) {
  if (d < 1) throw DomainError("mc_estimate: dimension must be positive");
  if (m < 1) throw DomainError("mc_estimate: need at least one batch");
  const auto& pair = std_normal();
  std::vector<double> means(static_cast<size_t>(m));
  std::vector<double> x(static_cast<size_t>(d));
  for (int s = 0; s < m; ++s) {
    CounterRng rng(seed, 0x4d430000ULL + static_cast<std::uint64_t>(s));
    double acc = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j)
        x[static_cast<size_t>(j)] =
            pair.inv_cdf(rng.uniform(i * static_cast<std::uint64_t>(d) +
                                     static_cast<std::uint64_t>(j)));
      double v = f(x);
      if (!std::isfinite(v))
        throw NonFiniteSample("mc_estimate: integrand returned a non-finite value");
      acc += v;
    }
    means[static_cast<size_t>(s)] = acc / double(n);
  }
  return finalize(std::move(means), seed);
}

std::uint64_t korobov_search(std::uint64_t n, int d, std::uint64_t seed,
                             int n_candidates) {
  // smooth product training integrand with decaying coordinate influence;
  // exact value 1, so the shift-estimated RMS is a pure quality signal
  auto train = [d](std::span<const double> x) {
    const WeightPair& pair = std_normal();
    double prod = 1.0;
    for (int j = 0; j < d; ++j) {
      double c = 1.0 / ((j + 1.0) * (j + 1.0));
      prod *= 1.0 + c * (pair.cdf(x[static_cast<size_t>(j)]) - 0.5);
    }
    return prod;
  };
  std::uint64_t best_a = 1;
  double best_rms = std::numeric_limits<double>::infinity();
  int tried = 0;
  // odd candidates spread over (1, N/2); for power-of-two N oddness gives
  // gcd(a, N) = 1
  for (int k = 0; k < 4 * n_candidates && tried < n_candidates; ++k) {
    std::uint64_t a =
        1 + 2 * (1 + (static_cast<std::uint64_t>(k) * (n / 2 - 2)) /
                         static_cast<std::uint64_t>(4 * n_candidates));
    if (a <= 1 || a >= n || gcd64(a, n) != 1) continue;
    ++tried;
    auto vec = GeneratingVector::korobov(a, n, d);
    auto run = qmc_estimate(train, vec, 4, seed);
    double score = std::max(run.rms_error, std::abs(run.mean - 1.0));
    if (score < best_rms) {
      best_rms = score;
      best_a = a;
    }
  }
  if (!(best_rms < std::numeric_limits<double>::infinity()))
    throw InvalidVector("korobov_search found no admissible multiplier");
  return best_a;
}

std::uint64_t default_korobov_a(std::uint64_t n, int d,
                                const std::string& table_path) {
  std::string path = table_path.empty() ? std::string(WANOVA_DATA_DIR) + "/default_lattice.txt"
                                        : table_path;
  std::ifstream in(path);
  if (in) {
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::uint64_t fn = 0, fa = 0;
      if (std::sscanf(line.c_str(), "N=%llu a=%llu",
                      reinterpret_cast<unsigned long long*>(&fn),
                      reinterpret_cast<unsigned long long*>(&fa)) == 2 &&
          fn == n)
        return fa;
    }
  }
  return korobov_search(n, d, /*seed=*/20240901ULL);
}

}  // namespace wanova
