#include "wanova/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "wanova/norms.hpp"
#include "wanova/option.hpp"
#include "wanova/quadrature.hpp"
#include "wanova/rng.hpp"

namespace wanova::experiments {

namespace {

constexpr const char* kToolVersion = "wanova 1.0.0";

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  size_t b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
  return out;
}

WeightPair parse_pair(const Config& cfg) {
  WeightPair pair;
  std::string rho = cfg.get("rho", "gaussian");
  if (rho == "gaussian")
    pair.rho_family = RhoFamily::GaussianStd;
  else if (rho == "logistic")
    pair.rho_family = RhoFamily::Logistic;
  else
    throw ParseError("unknown rho family: " + rho);

  std::string psi = cfg.get("psi", "gaussian_decay:alpha=1.0");
  auto parts = split(psi, ':');
  double param = 1.0;
  if (parts.size() > 1) {
    auto kv = split(parts[1], '=');
    if (kv.size() != 2) throw ParseError("bad psi parameter: " + psi);
    param = std::stod(kv[1]);
  }
  if (parts[0] == "gaussian_decay")
    pair.psi = PsiSpec::gaussian_decay(param);
  else if (parts[0] == "exp_decay")
    pair.psi = PsiSpec::exp_decay(param);
  else if (parts[0] == "constant")
    pair.psi = PsiSpec::constant(param);
  else
    throw ParseError("unknown psi family: " + parts[0]);
  return pair;
}

AsianOptionSpec parse_option(const Config& cfg) {
  AsianOptionSpec spec;
  spec.s0 = cfg.get_double("s0", 100.0);
  spec.strike = cfg.get_double("strike", 100.0);
  spec.r = cfg.get_double("r", 0.05);
  spec.sigma = cfg.get_double("sigma", 0.2);
  spec.t_final = cfg.get_double("t", 1.0);
  spec.d = cfg.get_int("d", 8);
  std::string avg = cfg.get("avg", "arith");
  if (avg == "arith")
    spec.averaging = Averaging::Arithmetic;
  else if (avg == "geom")
    spec.averaging = Averaging::Geometric;
  else
    throw ParseError("avg must be arith or geom");
  std::string fact = cfg.get("fact", "bb");
  if (fact == "std")
    spec.factorization = Factorization::Standard;
  else if (fact == "bb")
    spec.factorization = Factorization::BrownianBridge;
  else if (fact == "pca")
    spec.factorization = Factorization::PCA;
  else
    throw ParseError("fact must be std, bb or pca");
  spec.validate();
  return spec;
}

LatticeConfig parse_lattice(const Config& cfg) {
  LatticeConfig lat;
  lat.n = cfg.get_u64("n", 1u << 13);
  lat.m = cfg.get_int("shifts", 16);
  lat.seed = cfg.get_u64("seed", 42);
  lat.korobov_a = cfg.get_u64("korobov-a", 0);
  lat.vector_file = cfg.get("vector-file", "");
  lat.preint.inner_order = cfg.get_int("inner-order", 64);
  lat.preint.root_tol = cfg.get_double("root-tol", 1e-12);
  return lat;
}

// CSV preamble: every parameter that shaped the run, sorted, as comments.
void header(std::ostringstream& os, const char* command, const Config& cfg) {
  os << "# tool=" << kToolVersion << "\n# command=" << command << "\n";
  for (const auto& k : cfg.keys()) os << "# " << k << "=" << cfg.get(k, "") << "\n";
}

// real-line integral with a kink: expanding blocks away from the kink
double integrate_line_kinked(const std::function<double(double)>& g,
                             double kink, double tol) {
  using namespace quad;
  QuadratureSpec up{AdaptiveSimpson{tol, 44}, SemiInfinite{kink, Direction::Up}};
  QuadratureSpec dn{AdaptiveSimpson{tol, 44}, SemiInfinite{kink, Direction::Down}};
  return integrate(up, g) + integrate(dn, g);
}

std::string pass_str(bool ok) { return ok ? "1" : "0"; }

}  // namespace

std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

Config Config::from_file(const std::string& path) {
  Config c;
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line is not key=value: " + t);
    c.kv_[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return c;
}

void Config::set(const std::string& key, std::string value) {
  kv_[key] = std::move(value);
}
bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }
std::string Config::get(const std::string& key,
                        const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}
double Config::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : std::stod(it->second);
}
int Config::get_int(const std::string& key, int fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : std::stoi(it->second);
}
std::uint64_t Config::get_u64(const std::string& key,
                              std::uint64_t fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : std::stoull(it->second);
}
std::vector<std::string> Config::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : kv_) out.push_back(k);
  return out;
}

RunResult run_conditions(const Config& cfg) {
  std::ostringstream os;
  header(os, "conditions", cfg);
  os << "rho,psi,mode,weak,strong,c_constant,note\n";
  bool numeric = cfg.get_int("numeric", 0) != 0;
  std::string rho = cfg.get("rho", "gaussian");
  std::string psi_family = cfg.get("psi-family", "gaussian_decay");
  auto alphas = split(cfg.get("alphas", "0.4,0.5,0.9,1.0,1.1,4.0"), ',');
  RunResult res;
  for (const auto& alpha : alphas) {
    Config row_cfg = cfg;
    row_cfg.set("rho", rho);
    row_cfg.set("psi", psi_family + ":alpha=" + alpha);
    if (psi_family == "constant") row_cfg.set("psi", "constant:c=" + alpha);
    WeightPair pair = parse_pair(row_cfg);
    std::string note;
    ConditionReport rep;
    bool have = true;
    try {
      rep = numeric ? check_conditions_numeric(pair) : check_conditions(pair);
    } catch (const ClassificationInconclusive&) {
      note = "inconclusive";
      have = false;
    } catch (const DivergenceDetected&) {
      note = "divergent_constant";
      have = false;
    }
    os << pair.rho_name() << ',' << pair.psi_name() << ','
       << (numeric ? "numeric" : "analytic") << ',';
    if (have) {
      os << (rep.weak_holds ? 1 : 0) << ',' << (rep.strong_holds ? 1 : 0) << ','
         << (rep.c_constant ? csv_double(*rep.c_constant) : std::string())
         << ',' << note << "\n";
    } else {
      os << ",,," << note << "\n";
    }
  }
  res.csv = os.str();
  return res;
}

RunResult run_constant(const Config& cfg) {
  std::ostringstream os;
  header(os, "constant", cfg);
  os << "rho,psi,c_constant,note\n";
  WeightPair pair = parse_pair(cfg);
  RunResult res;
  try {
    double c = compute_C(pair);
    os << pair.rho_name() << ',' << pair.psi_name() << ',' << csv_double(c)
       << ",\n";
  } catch (const DivergenceDetected&) {
    os << pair.rho_name() << ',' << pair.psi_name() << ",,divergent\n";
  }
  res.csv = os.str();
  return res;
}

RunResult run_kernel_check(const Config& cfg) {
  std::ostringstream os;
  header(os, "kernel-check", cfg);
  os << "check,where,value,target,pass\n";
  WeightPair pair = parse_pair(cfg);
  double gamma = cfg.get_double("gamma", 1.0);
  int n_y = cfg.get_int("points", 20);
  std::uint64_t seed = cfg.get_u64("seed", 42);

  KernelContext ctx({pair}, WeightParams::product({gamma}));
  const auto& coord = ctx.coord(0);
  (void)seed;
  RunResult res;

  // annihilation at n_y spread-out y values
  for (int i = 0; i < n_y; ++i) {
    double y = pair.inv_cdf((i + 0.5) / n_y);
    double v = integrate_line_kinked(
        [&](double x) { return coord.eta(x, y) * pair.rho(x); }, y, 1e-11);
    bool ok = std::abs(v) <= 1e-8;
    res.ok = res.ok && ok;
    os << "annihilation," << csv_double(y) << ',' << csv_double(v) << ",0,"
       << pass_str(ok) << "\n";
  }
  // kernel mean value, d = 1
  {
    double y = 0.7;
    double v = integrate_line_kinked(
        [&](double x) { return (1.0 + gamma * coord.eta(x, y)) * pair.rho(x); },
        y, 1e-11);
    bool ok = std::abs(v - 1.0) <= 1e-7;
    res.ok = res.ok && ok;
    os << "kernel_mean_d1," << csv_double(y) << ',' << csv_double(v) << ",1,"
       << pass_str(ok) << "\n";
  }
  // derivative-energy identity at a few y
  for (double y : {-1.5, 0.0, 2.0}) {
    double v = integrate_line_kinked(
        [&](double x) {
          if (x == y) return 0.0;
          double dv = coord.eta_dx(x, y);
          return dv * dv * pair.psi_value(x);
        },
        y, 1e-11);
    double target = coord.eta_diag(y);
    bool ok = std::abs(v - target) <= 1e-8;
    res.ok = res.ok && ok;
    os << "derivative_energy," << csv_double(y) << ',' << csv_double(v) << ','
       << csv_double(target) << ',' << pass_str(ok) << "\n";
  }
  res.csv = os.str();
  return res;
}

RunResult run_norm_equiv(const Config& cfg) {
  std::ostringstream os;
  header(os, "norm-equiv", cfg);
  RunResult res;
  if (cfg.get_int("counterexample", 0) != 0) {
    // f = 1/sqrt(rho), psi = exp(-3x^2/4): in the ANOVA space but with a
    // linearly growing truncated L2_rho norm
    WeightPair pair{RhoFamily::GaussianStd, PsiSpec::gaussian_decay(2.0 / 3.0), 1e-10};
    KernelContext ctx({pair}, WeightParams::product({cfg.get_double("gamma", 1.0)}));
    SeparableFunction sep;
    sep.d = 1;
    SeparableFunction::Term term;
    term.coeff = 1.0;
    term.factors.push_back(gauss_growth_factor(std::pow(2.0 * std::numbers::pi, 0.25), 0.25));
    sep.terms.push_back(term);
    auto f = from_separable(std::move(sep), "inv_sqrt_rho");
    auto w = norm_w(f, ctx);
    auto h = norm_h(f, ctx);
    os << "kind,radius,value,expected,pass\n";
    NormOptions opts;
    for (int r = 0; r < 4; ++r) {
      double rad = opts.radii[static_cast<size_t>(r)];
      double got = h.terms[0].truncated[static_cast<size_t>(r)];  // L2_rho piece
      double expected = 2.0 * rad;
      bool ok = std::abs(got - expected) <= 1e-8;
      res.ok = res.ok && ok;
      os << "h_l2_truncated," << csv_double(rad) << ',' << csv_double(got)
         << ',' << csv_double(expected) << ',' << pass_str(ok) << "\n";
    }
    bool wconv = w.converged;
    res.ok = res.ok && wconv;
    os << "w_norm_converged,," << csv_double(w.norm_sq) << ",finite,"
       << pass_str(wconv) << "\n";
    res.csv = os.str();
    return res;
  }

  int d = cfg.get_int("d", 1);
  int count = cfg.get_int("count", 50);
  std::uint64_t seed = cfg.get_u64("seed", 42);
  WeightPair pair = parse_pair(cfg);
  std::vector<double> gammas(static_cast<size_t>(d));
  auto gamma_list = split(cfg.get("gammas", ""), ',');
  for (int j = 0; j < d; ++j)
    gammas[static_cast<size_t>(j)] =
        (static_cast<size_t>(j) < gamma_list.size() && !gamma_list[static_cast<size_t>(j)].empty())
            ? std::stod(gamma_list[static_cast<size_t>(j)])
            : 1.0 / ((j + 1.0) * (j + 1.0));
  KernelContext ctx(std::vector<WeightPair>(static_cast<size_t>(d), pair),
                    WeightParams::product(gammas));
  os << "function_id,w_norm_sq,h_norm_sq,ratio,bound,pass\n";
  for (int i = 0; i < count; ++i) {
    auto f = random_poly_gauss(d, seed + static_cast<std::uint64_t>(i));
    auto audit = audit_equivalence(f, ctx);
    bool ok = audit.lower_ok && audit.upper_ok;
    res.ok = res.ok && ok;
    os << f.id << ',' << csv_double(audit.w.norm_sq) << ','
       << csv_double(audit.h.norm_sq) << ',' << csv_double(audit.ratio) << ','
       << csv_double(audit.bound) << ',' << pass_str(ok) << "\n";
  }
  res.csv = os.str();
  return res;
}

RunResult run_anova(const Config& cfg) {
  std::ostringstream os;
  header(os, "anova", cfg);
  os << "check,detail,value,target,pass\n";
  int d = cfg.get_int("d", 2);
  std::uint64_t seed = cfg.get_u64("seed", 42);
  WeightPair pair = parse_pair(cfg);
  std::vector<double> gammas(static_cast<size_t>(d), 0.5);
  KernelContext ctx(std::vector<WeightPair>(static_cast<size_t>(d), pair),
                    WeightParams::product(gammas));
  auto f = random_poly_gauss(d, seed);
  RunResult res;

  const std::uint32_t nsub = 1u << d;
  std::vector<std::function<double(std::span<const double>)>> terms;
  for (std::uint32_t u = 0; u < nsub; ++u) terms.push_back(anova_term(f, ctx, u));

  // reconstruction at spread-out points
  CounterRng rng(seed, 0xa20a);
  std::uint64_t ctr = 0;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> x(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) x[static_cast<size_t>(j)] = pair.inv_cdf(rng.uniform(ctr++));
    double sum = 0.0;
    for (std::uint32_t u = 0; u < nsub; ++u) {
      std::vector<double> xu;
      for (int j = 0; j < d; ++j)
        if (u & (1u << j)) xu.push_back(x[static_cast<size_t>(j)]);
      sum += terms[u](xu);
    }
    double target = f(x);
    bool ok = std::abs(sum - target) <= 1e-6 * std::max(1.0, std::abs(target));
    res.ok = res.ok && ok;
    os << "reconstruction,point" << i << ',' << csv_double(sum) << ','
       << csv_double(target) << ',' << pass_str(ok) << "\n";
  }

  // pairwise orthogonality and the norm decomposition
  double sum_norms = 0.0;
  for (std::uint32_t u = 0; u < nsub; ++u) {
    for (std::uint32_t v = u; v < nsub; ++v) {
      double ip = w_inner_anova(f, ctx, u, v);
      if (u == v) {
        sum_norms += ip;
      } else {
        bool ok = std::abs(ip) <= 1e-7;
        res.ok = res.ok && ok;
        os << "orthogonality,u" << u << "_v" << v << ',' << csv_double(ip)
           << ",0," << pass_str(ok) << "\n";
      }
    }
  }
  double total = norm_w(f, ctx).norm_sq;
  bool ok = std::abs(sum_norms - total) <= 1e-6 * std::max(1.0, total);
  res.ok = res.ok && ok;
  os << "parseval,sum_vs_norm," << csv_double(sum_norms) << ','
     << csv_double(total) << ',' << pass_str(ok) << "\n";
  res.csv = os.str();
  return res;
}

RunResult run_converge(const Config& cfg, RateReport* report) {
  std::ostringstream os;
  header(os, "converge", cfg);
  os << "# note: rate fit excludes the smallest N (pre-asymptotic)\n";
  os << "method,n,estimate,rms_error\n";
  AsianOptionSpec spec = parse_option(cfg);
  std::string method = cfg.get("method", "qmc-preint");
  auto n_list = split(cfg.get("n-list", "128,256,512,1024,2048,4096,8192"), ',');
  if (n_list.size() < 4) throw ParseError("converge needs at least 4 N values");

  RateReport rate;
  for (const auto& ns : n_list) {
    Config one = cfg;
    one.set("n", ns);
    LatticeConfig lat = parse_lattice(one);
    PriceReport rep;
    if (method == "mc")
      rep = price_mc(spec, lat);
    else if (method == "qmc")
      rep = price_qmc_plain(spec, lat);
    else if (method == "qmc-preint")
      rep = price_qmc_preint(spec, lat);
    else
      throw ParseError("method must be mc, qmc or qmc-preint");
    rate.rms_by_n.emplace_back(lat.n, rep.rms_error);
    os << method << ',' << lat.n << ',' << csv_double(rep.price) << ','
       << csv_double(rep.rms_error) << "\n";
  }

  // least-squares slope of log2 rms vs log2 N, smallest N excluded
  std::vector<double> xs, ys;
  for (size_t i = 1; i < rate.rms_by_n.size(); ++i) {
    xs.push_back(std::log2(double(rate.rms_by_n[i].first)));
    ys.push_back(std::log2(std::max(rate.rms_by_n[i].second, 1e-300)));
  }
  double n = double(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double denom = n * sxx - sx * sx;
  rate.slope = (n * sxy - sx * sy) / denom;
  double intercept = (sy - rate.slope * sx) / n;
  double ssr = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    double rres = ys[i] - (intercept + rate.slope * xs[i]);
    ssr += rres * rres;
  }
  double var = xs.size() > 2 ? ssr / (n - 2.0) : 0.0;
  rate.slope_stderr = std::sqrt(var * n / denom);
  os << "# summary: slope=" << csv_double(rate.slope)
     << " stderr=" << csv_double(rate.slope_stderr) << "\n";
  os << "slope," << method << ',' << csv_double(rate.slope) << ','
     << csv_double(rate.slope_stderr) << "\n";
  if (report) *report = rate;
  RunResult res;
  res.csv = os.str();
  return res;
}

RunResult run_price(const Config& cfg) {
  std::ostringstream os;
  header(os, "price", cfg);
  os << "method,avg,fact,d,n,shifts,seed,price,rms_error\n";
  AsianOptionSpec spec = parse_option(cfg);
  LatticeConfig lat = parse_lattice(cfg);
  std::string method = cfg.get("method", "qmc-preint");
  PriceReport rep;
  if (method == "mc")
    rep = price_mc(spec, lat);
  else if (method == "qmc")
    rep = price_qmc_plain(spec, lat);
  else if (method == "qmc-preint")
    rep = price_qmc_preint(spec, lat);
  else
    throw ParseError("method must be mc, qmc or qmc-preint");
  os << method << ',' << cfg.get("avg", "arith") << ',' << cfg.get("fact", "bb")
     << ',' << spec.d << ',' << rep.n << ',' << rep.m << ',' << lat.seed << ','
     << csv_double(rep.price) << ',' << csv_double(rep.rms_error) << "\n";
  RunResult res;
  res.csv = os.str();
  return res;
}

}  // namespace wanova::experiments
