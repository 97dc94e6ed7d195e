#include "wanova/option.hpp"

#include <cmath>
#include <deque>
#include <memory>
#include <numbers>

#include "wanova/weights.hpp"

namespace wanova {
namespace {

double clamped_exp(double t) { return std::exp(std::min(t, 700.0)); }

// W = bridge(x): level-order Brownian bridge construction on the grid
// t_j = j h, j = 1..d. Linear in x, so columns of A are bridge(e_k).
std::vector<double> bridge_apply(int d, double h, std::span<const double> x) {
  std::vector<double> w(static_cast<size_t>(d) + 1, 0.0);  // w[0] = W(0) = 0
  int next = 0;
  w[static_cast<size_t>(d)] = std::sqrt(d * h) * x[static_cast<size_t>(next++)];
  std::deque<std::pair<int, int>> queue{{0, d}};
  while (!queue.empty()) {
    auto [l, r] = queue.front();
    queue.pop_front();
    int m = (l + r) / 2;
    if (m == l || m == r) continue;
    double tl = l * h, tm = m * h, tr = r * h;
    double mean = ((tr - tm) * w[static_cast<size_t>(l)] +
                   (tm - tl) * w[static_cast<size_t>(r)]) /
                  (tr - tl);
    double sd = std::sqrt((tm - tl) * (tr - tm) / (tr - tl));
    w[static_cast<size_t>(m)] = mean + sd * x[static_cast<size_t>(next++)];
    queue.emplace_back(l, m);
    queue.emplace_back(m, r);
  }
  return {w.begin() + 1, w.end()};
}

}  // namespace

void AsianOptionSpec::validate() const {
  if (!(s0 > 0.0 && strike >= 0.0 && sigma > 0.0 && t_final > 0.0))
    throw DomainError("AsianOptionSpec: s0, sigma, t_final must be positive and strike nonnegative");
  if (d < 1) throw DomainError("AsianOptionSpec: d must be >= 1");
}

Matrix covariance(const AsianOptionSpec& spec) {
  spec.validate();
  const int d = spec.d;
  const double h = spec.t_final / d;
  Matrix s(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s(i, j) = std::min(i + 1, j + 1) * h;
  return s;
}

PathFactorization factorize(const AsianOptionSpec& spec) {
  spec.validate();
  const int d = spec.d;
  const double h = spec.t_final / d;
  PathFactorization out;
  switch (spec.factorization) {
    case Factorization::Standard:
      out.a = cholesky_lower(covariance(spec));
      break;
    case Factorization::BrownianBridge: {
      out.a = Matrix(d, d);
      std::vector<double> e(static_cast<size_t>(d), 0.0);
      for (int k = 0; k < d; ++k) {
        e[static_cast<size_t>(k)] = 1.0;
        auto col = bridge_apply(d, h, e);
        for (int i = 0; i < d; ++i) out.a(i, k) = col[static_cast<size_t>(i)];
        e[static_cast<size_t>(k)] = 0.0;
      }
      break;
    }
    case Factorization::PCA: {
      auto eig = jacobi_eigen(covariance(spec));
      out.a = Matrix(d, d);
      for (int c = 0; c < d; ++c) {
        if (eig.values[static_cast<size_t>(c)] < 0.0)
          throw EigenSolveFailure("PCA: negative eigenvalue for an SPD matrix");
        double s = std::sqrt(eig.values[static_cast<size_t>(c)]);
        // deterministic sign: largest-magnitude entry positive
        int arg = 0;
        for (int r = 1; r < d; ++r)
          if (std::abs(eig.vectors(r, c)) > std::abs(eig.vectors(arg, c)))
            arg = r;
        double flip = eig.vectors(arg, c) < 0.0 ? -1.0 : 1.0;
        for (int r = 0; r < d; ++r) out.a(r, c) = flip * s * eig.vectors(r, c);
      }
      break;
    }
  }
  return out;
}

AsianOption::AsianOption(AsianOptionSpec spec, PathFactorization fact)
    : spec_(spec), fact_(std::move(fact)) {
  spec_.validate();
  if (fact_.a.rows() != spec_.d || fact_.a.cols() != spec_.d)
    throw DimensionMismatch("AsianOption: factorization size vs d");
  drift_.resize(static_cast<size_t>(spec_.d));
  for (int l = 0; l < spec_.d; ++l)
    drift_[static_cast<size_t>(l)] =
        (spec_.r - 0.5 * spec_.sigma * spec_.sigma) * (l + 1) * spec_.t_final / spec_.d;
}

AsianOption::AsianOption(AsianOptionSpec spec)
    : AsianOption(spec, factorize(spec)) {}

double AsianOption::phi(std::span<const double> x) const {
  const int d = spec_.d;
  if (static_cast<int>(x.size()) != d)
    throw DimensionMismatch("AsianOption::phi: point dimension");
  if (spec_.averaging == Averaging::Arithmetic) {
    double mean = 0.0;
    for (int l = 0; l < d; ++l) {
      double z = 0.0;
      auto row = fact_.a.row(l);
      for (int j = 0; j < d; ++j) z += row[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
      mean += clamped_exp(drift_[static_cast<size_t>(l)] + spec_.sigma * z);
    }
    return spec_.s0 * mean / d - spec_.strike;
  }
  double log_mean = 0.0;
  for (int l = 0; l < d; ++l) {
    double z = 0.0;
    auto row = fact_.a.row(l);
    for (int j = 0; j < d; ++j) z += row[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
    log_mean += drift_[static_cast<size_t>(l)] + spec_.sigma * z;
  }
  return spec_.s0 * clamped_exp(log_mean / d) - spec_.strike;
}

double AsianOption::payoff(std::span<const double> x) const {
  return std::max(phi(x), 0.0);
}

double AsianOption::dphi_dx1(std::span<const double> x) const {
  const int d = spec_.d;
  if (spec_.averaging == Averaging::Arithmetic) {
    double acc = 0.0;
    for (int l = 0; l < d; ++l) {
      double z = 0.0;
      auto row = fact_.a.row(l);
      for (int j = 0; j < d; ++j) z += row[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
      acc += fact_.a(l, 0) * clamped_exp(drift_[static_cast<size_t>(l)] + spec_.sigma * z);
    }
    return spec_.sigma * spec_.s0 * acc / d;
  }
  double log_mean = 0.0, a1 = 0.0;
  for (int l = 0; l < d; ++l) {
    double z = 0.0;
    auto row = fact_.a.row(l);
    for (int j = 0; j < d; ++j) z += row[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
    log_mean += drift_[static_cast<size_t>(l)] + spec_.sigma * z;
    a1 += fact_.a(l, 0);
  }
  return spec_.s0 * clamped_exp(log_mean / d) * spec_.sigma * a1 / d;
}

KinkIntegrand AsianOption::kink_integrand() const {
  KinkIntegrand ki;
  ki.d = spec_.d;
  auto self = std::make_shared<AsianOption>(*this);
  ki.phi = [self](std::span<const double> x) { return self->phi(x); };
  ki.dphi_dx1 = [self](std::span<const double> x) { return self->dphi_dx1(x); };
  ki.make_section = [self](std::span<const double> x_rest) {
    // freeze the x_{2:d} contribution per path step
    const int d = self->spec_.d;
    const double sigma = self->spec_.sigma;
    const double s0 = self->spec_.s0;
    const double strike = self->spec_.strike;
    const bool arith = self->spec_.averaging == Averaging::Arithmetic;
    std::vector<double> base(static_cast<size_t>(d)), a1(static_cast<size_t>(d));
    for (int l = 0; l < d; ++l) {
      double z = 0.0;
      auto row = self->fact_.a.row(l);
      for (int j = 1; j < d; ++j)
        z += row[static_cast<size_t>(j)] * x_rest[static_cast<size_t>(j - 1)];
      base[static_cast<size_t>(l)] = self->drift_[static_cast<size_t>(l)] + sigma * z;
      a1[static_cast<size_t>(l)] = sigma * row[0];
    }
    KinkIntegrand::Section sec;
    if (arith) {
      sec.phi = [=](double x1) {
        double mean = 0.0;
        for (int l = 0; l < d; ++l)
          mean += clamped_exp(base[static_cast<size_t>(l)] + a1[static_cast<size_t>(l)] * x1);
        return s0 * mean / d - strike;
      };
      sec.dphi = [=](double x1) {
        double acc = 0.0;
        for (int l = 0; l < d; ++l)
          acc += a1[static_cast<size_t>(l)] *
                 clamped_exp(base[static_cast<size_t>(l)] + a1[static_cast<size_t>(l)] * x1);
        return s0 * acc / d;
      };
    } else {
      double b = 0.0, c = 0.0;
      for (int l = 0; l < d; ++l) {
        b += base[static_cast<size_t>(l)];
        c += a1[static_cast<size_t>(l)];
      }
      b /= d;
      c /= d;
      sec.phi = [=](double x1) { return s0 * clamped_exp(b + c * x1) - strike; };
      sec.dphi = [=](double x1) { return s0 * c * clamped_exp(b + c * x1); };
    }
    return sec;
  };
  ki.certificate = KinkIntegrand::Certificate::Probed;
  return ki;
}

namespace {

GeneratingVector config_vector(const LatticeConfig& cfg, int d) {
  if (!cfg.vector_file.empty()) {
    auto v = GeneratingVector::load(cfg.vector_file);
    if (v.dimension() < d)
      throw InvalidVector("vector file has fewer components than needed");
    v.z.resize(static_cast<size_t>(d));
    if (v.n != cfg.n && cfg.n != 0)
      throw InvalidVector("vector file N does not match the requested N");
    return v;
  }
  std::uint64_t a = cfg.korobov_a ? cfg.korobov_a : default_korobov_a(cfg.n, d);
  return GeneratingVector::korobov(a, cfg.n, d);
}

PriceReport discounted(const AsianOptionSpec& spec, const ShiftedRuleRun& run,
                       std::uint64_t n) {
  double disc = std::exp(-spec.r * spec.t_final);
  PriceReport rep;
  rep.price = disc * run.mean;
  rep.rms_error = disc * run.rms_error;
  rep.n = n;
  rep.m = run.m;
  return rep;
}

}  // namespace

PriceReport price_qmc_preint(const AsianOptionSpec& spec,
                             const LatticeConfig& cfg) {
  spec.validate();
  AsianOption opt(spec);
  PreintegratedFunction pf(opt.kink_integrand(), cfg.preint);
  if (spec.d == 1) {
    // preintegration consumes the only variable; no lattice stage
    PriceReport rep;
    rep.price = std::exp(-spec.r * spec.t_final) * pf.eval({});
    rep.rms_error = 0.0;
    rep.n = 1;
    rep.m = cfg.m;
    return rep;
  }
  auto vec = config_vector(cfg, spec.d - 1);
  auto run = qmc_estimate(pf.integrand(), vec, cfg.m, cfg.seed);
  return discounted(spec, run, vec.n);
}

PriceReport price_qmc_plain(const AsianOptionSpec& spec,
                            const LatticeConfig& cfg) {
  spec.validate();
  AsianOption opt(spec);
  auto vec = config_vector(cfg, spec.d);
  auto run = qmc_estimate(
      [&opt](std::span<const double> x) { return opt.payoff(x); }, vec, cfg.m,
      cfg.seed);
  return discounted(spec, run, vec.n);
}

PriceReport price_mc(const AsianOptionSpec& spec, const LatticeConfig& cfg) {
  spec.validate();
  AsianOption opt(spec);
  auto run = mc_estimate(
      [&opt](std::span<const double> x) { return opt.payoff(x); }, spec.d,
      cfg.n, cfg.m, cfg.seed);
  return discounted(spec, run, cfg.n);
}

double geometric_closed_form(const AsianOptionSpec& spec) {
  spec.validate();
  // the geometric mean of the lognormal path values is lognormal:
  // log G ~ Normal(log S0 + mu_g, sig_g^2)
  const double d = spec.d;
  double mu_g = (spec.r - 0.5 * spec.sigma * spec.sigma) * spec.t_final * (d + 1.0) / (2.0 * d);
  double var_g = spec.sigma * spec.sigma * spec.t_final * (d + 1.0) * (2.0 * d + 1.0) / (6.0 * d * d);
  double sig_g = std::sqrt(var_g);
  WeightPair normal{RhoFamily::GaussianStd, PsiSpec::constant(1.0), 1e-10};
  double disc = std::exp(-spec.r * spec.t_final);
  if (spec.strike <= 0.0) {
    return disc * (spec.s0 * std::exp(mu_g + 0.5 * var_g) - spec.strike);
  }
  double d2 = (std::log(spec.s0 / spec.strike) + mu_g) / sig_g;
  double d1 = d2 + sig_g;
  return disc * (spec.s0 * std::exp(mu_g + 0.5 * var_g) * normal.cdf(d1) -
                 spec.strike * normal.cdf(d2));
}

double price_reference(const AsianOptionSpec& spec, double* rms_out) {
  spec.validate();
  if (spec.averaging == Averaging::Geometric) {
    if (rms_out) *rms_out = 0.0;
    return geometric_closed_form(spec);
  }
  LatticeConfig cfg;
  cfg.n = 1u << 16;
  cfg.m = 32;
  cfg.seed = 987654321ULL;
  auto rep = price_qmc_preint(spec, cfg);
  if (rms_out) *rms_out = rep.rms_error;
  return rep.price;
}

}  // namespace wanova
