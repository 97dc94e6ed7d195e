#include "wanova/norms.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "wanova/quadrature.hpp"

namespace wanova {
namespace {

int popcount(std::uint32_t m) { return __builtin_popcount(m); }

double psi_gauss_rate(const WeightPair& p) {
  return p.psi.kind == PsiSpec::Kind::GaussianDecay ? 1.0 / (2.0 * p.psi.param)
                                                    : 0.0;
}

double rho_gauss_rate(const WeightPair& p) {
  return p.rho_family == RhoFamily::GaussianStd ? 0.5 : 0.0;
}

// ---------------------------------------------------------------------------
// 1-D machinery: infinite rho rules and truncated weighted grids
// ---------------------------------------------------------------------------

using Rule1D = RhoRule;

Rule1D make_rho_rule(const WeightPair& pair, double extra_rate, int n) {
  return rho_rule(pair, extra_rate, n);
}

struct WeightedGrid {
  std::vector<double> x, w;
  std::vector<std::uint8_t> bucket;  // index of the smallest radius box
};

// Composite Gauss-Legendre panels on [-T, T] with the weight folded in.
// T is sized from the total Gaussian envelope rate; panels are cut at the
// profile radii and at any supplied kink.
WeightedGrid make_weighted_grid(const std::function<double(double)>& weight,
                                double gauss_rate,
                                std::span<const double> kinks,
                                const NormOptions& opts) {
  const double rmax = opts.radii.back();
  double sigma = gauss_rate > 1e-6 ? 1.0 / std::sqrt(gauss_rate) : rmax;
  double t_eff = std::min(rmax, std::max(6.0, 9.5 * sigma));
  double width = std::min(2.5, 1.25 * sigma);

  std::vector<double> cuts{-t_eff, t_eff};
  for (double r : opts.radii)
    if (r < t_eff) {
      cuts.push_back(r);
      cuts.push_back(-r);
    }
  for (double k : kinks)
    if (std::abs(k) < t_eff) cuts.push_back(k);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const auto& gl = quad::gauss_legendre(opts.panel_nodes);
  WeightedGrid g;
  for (size_t c = 0; c + 1 < cuts.size(); ++c) {
    double a = cuts[c], b = cuts[c + 1];
    int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / width)));
    for (int p = 0; p < pieces; ++p) {
      double pa = a + (b - a) * p / pieces;
      double pb = a + (b - a) * (p + 1) / pieces;
      double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
      for (size_t i = 0; i < gl.x.size(); ++i) {
        double x = mid + half * gl.x[i];
        g.x.push_back(x);
        g.w.push_back(half * gl.w[i] * weight(x));
        std::uint8_t bk = 3;
        for (int r = 0; r < 4; ++r)
          if (std::abs(x) <= opts.radii[static_cast<size_t>(r)]) {
            bk = static_cast<std::uint8_t>(r);
            break;
          }
        g.bucket.push_back(bk);
      }
    }
  }
  return g;
}

// Tensor sweep over truncated grids accumulating the profile by box class.
template <typename F>
std::array<double, 4> tensor_profile(std::span<const WeightedGrid> grids,
                                     F&& integrand) {
  const int k = static_cast<int>(grids.size());
  std::array<double, 4> acc{};
  if (k == 0) {
    double v = integrand(std::span<const double>{});
    acc.fill(v);
    return acc;
  }
  std::vector<size_t> idx(static_cast<size_t>(k), 0);
  std::vector<double> pt(static_cast<size_t>(k));
  while (true) {
    double w = 1.0;
    std::uint8_t cls = 0;
    for (int j = 0; j < k; ++j) {
      const auto& g = grids[static_cast<size_t>(j)];
      pt[static_cast<size_t>(j)] = g.x[idx[static_cast<size_t>(j)]];
      w *= g.w[idx[static_cast<size_t>(j)]];
      cls = std::max(cls, g.bucket[idx[static_cast<size_t>(j)]]);
    }
    double v = integrand(std::span<const double>(pt));
    if (!std::isfinite(v))
      throw NonFiniteSample("norm quadrature hit a non-finite sample");
    acc[cls] += w * v;
    int j = k - 1;
    while (j >= 0 && ++idx[static_cast<size_t>(j)] ==
                         grids[static_cast<size_t>(j)].x.size()) {
      idx[static_cast<size_t>(j)] = 0;
      --j;
    }
    if (j < 0) break;
  }
  for (int r = 1; r < 4; ++r) acc[static_cast<size_t>(r)] += acc[static_cast<size_t>(r - 1)];
  return acc;
}

std::vector<int> mask_coords(std::uint32_t mask, int d) {
  std::vector<int> out;
  for (int j = 0; j < d; ++j)
    if (mask & (1u << j)) out.push_back(j);
  return out;
}

void require_dim(const SmoothTestFunction& f, const KernelContext& ctx,
                 int cap, const char* what) {
  if (f.d != ctx.dimension())
    throw DimensionMismatch(std::string(what) + ": function vs context dimension");
  if (f.d > cap)
    throw DimensionTooLarge(std::string(what) + ": tensor quadrature is capped at d <= " + std::to_string(cap));
}

bool profile_converged(const std::array<double, 4>& p) {
  return std::abs(p[3] - p[2]) <= std::max(1e-9, 1e-8 * std::abs(p[3]));
}

}  // namespace

double rho_average(const SmoothTestFunction& f, const KernelContext& ctx,
                   std::uint32_t deriv_mask, std::uint32_t avg_mask,
                   std::span<const double> fixed, int n_nodes) {
  const int d = f.d;
  if (deriv_mask & avg_mask)
    throw DomainError("rho_average: derivative and average sets must be disjoint");

  if (f.separable) {
    const auto& sep = *f.separable;
    double sum = 0.0;
    for (const auto& term : sep.terms) {
      double prod = term.coeff;
      size_t fi = 0;
      for (int j = 0; j < d && prod != 0.0; ++j) {
        const auto& fac = term.factors[static_cast<size_t>(j)];
        bool deriv = deriv_mask & (1u << j);
        if (avg_mask & (1u << j)) {
          prod *= integrate_against_rho(ctx.coord(j).pair(),
                                        deriv ? fac.dg : fac.g, 64,
                                        fac.gauss_rate);
        } else {
          double xj = fixed[fi++];
          prod *= deriv ? fac.dg(xj) : fac.g(xj);
        }
      }
      sum += prod;
    }
    return sum;
  }

  // generic path: tensor rho rule over the averaged coordinates
  auto avg = mask_coords(avg_mask, d);
  std::vector<Rule1D> rules;
  rules.reserve(avg.size());
  for (int j : avg)
    rules.push_back(make_rho_rule(ctx.coord(j).pair(),
                                  f.gauss_rate.empty() ? 0.0 : f.gauss_rate[static_cast<size_t>(j)],
                                  n_nodes));
  std::vector<double> pt(static_cast<size_t>(d));
  {
    size_t fi = 0;
    for (int j = 0; j < d; ++j)
      if (!(avg_mask & (1u << j))) pt[static_cast<size_t>(j)] = fixed[fi++];
  }
  std::vector<size_t> idx(avg.size(), 0);
  double sum = 0.0;
  while (true) {
    double w = 1.0;
    for (size_t a = 0; a < avg.size(); ++a) {
      pt[static_cast<size_t>(avg[a])] = rules[a].x[idx[a]];
      w *= rules[a].w[idx[a]];
    }
    double v = f.partial(deriv_mask, pt);
    if (!std::isfinite(v)) throw NonFiniteSample("rho_average: non-finite sample");
    sum += w * v;
    if (avg.empty()) break;
    size_t j = avg.size() - 1;
    while (true) {
      if (++idx[j] < rules[j].x.size()) break;
      idx[j] = 0;
      if (j == 0) return sum;
      --j;
    }
  }
  return sum;
}

namespace {

// cache-free per-factor mu would recompute 64-node averages at every outer
// grid point; memoize them per (coordinate, term, derivative) instead
struct SeparableAverager {
  const SeparableFunction* sep = nullptr;
  const KernelContext* ctx = nullptr;
  std::vector<std::vector<std::array<double, 2>>> mu;  // [term][coord][deriv]
  bool ready = false;

  void init(const SmoothTestFunction& f, const KernelContext& c) {
    if (!f.separable) return;
    sep = f.separable.get();
    ctx = &c;
    mu.resize(sep->terms.size());
    for (size_t t = 0; t < sep->terms.size(); ++t) {
      mu[t].resize(static_cast<size_t>(sep->d));
      for (int j = 0; j < sep->d; ++j) {
        const auto& fac = sep->terms[t].factors[static_cast<size_t>(j)];
        const auto& pair = c.coord(j).pair();
        mu[t][static_cast<size_t>(j)][0] =
            integrate_against_rho(pair, fac.g, 64, fac.gauss_rate);
        mu[t][static_cast<size_t>(j)][1] =
            integrate_against_rho(pair, fac.dg, 64, fac.gauss_rate);
      }
    }
    ready = true;
  }

  // average of partial(deriv_mask) over avg_mask at packed fixed point
  double operator()(std::uint32_t deriv_mask, std::uint32_t avg_mask,
                    std::span<const double> fixed) const {
    double sum = 0.0;
    for (size_t t = 0; t < sep->terms.size(); ++t) {
      const auto& term = sep->terms[t];
      double prod = term.coeff;
      size_t fi = 0;
      for (int j = 0; j < sep->d && prod != 0.0; ++j) {
        bool deriv = deriv_mask & (1u << j);
        if (avg_mask & (1u << j)) {
          prod *= mu[t][static_cast<size_t>(j)][deriv ? 1 : 0];
        } else {
          const auto& fac = term.factors[static_cast<size_t>(j)];
          double xj = fixed[fi++];
          prod *= deriv ? fac.dg(xj) : fac.g(xj);
        }
      }
      sum += prod;
    }
    return sum;
  }
};

// engine bundling the per-fixture caches used by the norm evaluations
struct Engine {
  const SmoothTestFunction& f;
  const KernelContext& ctx;
  const NormOptions& opts;
  SeparableAverager sep;

  Engine(const SmoothTestFunction& fn, const KernelContext& c,
         const NormOptions& o)
      : f(fn), ctx(c), opts(o) {
    sep.init(fn, c);
  }

  double rate(int j) const {
    return f.gauss_rate.empty() ? 0.0 : f.gauss_rate[static_cast<size_t>(j)];
  }

  double avg(std::uint32_t deriv_mask, std::uint32_t avg_mask,
             std::span<const double> fixed) const {
    if (sep.ready) return sep(deriv_mask, avg_mask, fixed);
    return rho_average(f, ctx, deriv_mask, avg_mask, fixed, opts.inner_nodes);
  }

  WeightedGrid psi_grid(int j, double extra_rate,
                        std::span<const double> kinks = {}) const {
    const auto& pair = ctx.coord(j).pair();
    return make_weighted_grid([&pair](double x) { return pair.psi_value(x); },
                              psi_gauss_rate(pair) + extra_rate, kinks, opts);
  }

  WeightedGrid rho_grid(int j, double extra_rate) const {
    const auto& pair = ctx.coord(j).pair();
    return make_weighted_grid([&pair](double x) { return pair.rho(x); },
                              rho_gauss_rate(pair) + extra_rate, {}, opts);
  }
};

}  // namespace

NormPart norm_w(const SmoothTestFunction& f, const KernelContext& ctx,
                const NormOptions& opts) {
  require_dim(f, ctx, 4, "norm_w");
  Engine eng(f, ctx, opts);
  const int d = f.d;
  NormPart out;
  for (std::uint32_t u = 0; u < (1u << d); ++u) {
    double inv_gamma = 1.0 / ctx.weights().gamma(u);
    TermReport tr;
    tr.subset = u;
    if (u == 0) {
      double m = eng.avg(0, (1u << d) - 1, {});
      tr.truncated.fill(inv_gamma * m * m);
      tr.value = inv_gamma * m * m;
      tr.converged = true;
    } else {
      auto coords = mask_coords(u, d);
      std::vector<WeightedGrid> grids;
      grids.reserve(coords.size());
      for (int j : coords) grids.push_back(eng.psi_grid(j, 2.0 * eng.rate(j)));
      std::uint32_t avg_mask = ((1u << d) - 1) & ~u;
      auto profile = tensor_profile(grids, [&](std::span<const double> xu) {
        double v = eng.avg(u, avg_mask, xu);
        return v * v;
      });
      for (int r = 0; r < 4; ++r)
        tr.truncated[static_cast<size_t>(r)] = inv_gamma * profile[static_cast<size_t>(r)];
      tr.value = tr.truncated[3];
      tr.converged = profile_converged(tr.truncated);
    }
    out.norm_sq += tr.value;
    out.converged = out.converged && tr.converged;
    out.terms.push_back(tr);
  }
  return out;
}

NormPart norm_h(const SmoothTestFunction& f, const KernelContext& ctx,
                const NormOptions& opts) {
  require_dim(f, ctx, 4, "norm_h");
  Engine eng(f, ctx, opts);
  const int d = f.d;
  NormPart out;
  for (std::uint32_t u = 0; u < (1u << d); ++u) {
    double inv_gamma = 1.0 / ctx.weights().gamma(u);
    std::vector<WeightedGrid> grids;
    grids.reserve(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) {
      if (u & (1u << j))
        grids.push_back(eng.psi_grid(j, 2.0 * eng.rate(j)));
      else
        grids.push_back(eng.rho_grid(j, 2.0 * eng.rate(j)));
    }
    auto profile = tensor_profile(grids, [&](std::span<const double> x) {
      double v = f.partial(u, x);
      return v * v;
    });
    TermReport tr;
    tr.subset = u;
    for (int r = 0; r < 4; ++r)
      tr.truncated[static_cast<size_t>(r)] = inv_gamma * profile[static_cast<size_t>(r)];
    tr.value = tr.truncated[3];
    tr.converged = profile_converged(tr.truncated);
    out.norm_sq += tr.value;
    out.converged = out.converged && tr.converged;
    out.terms.push_back(tr);
  }
  return out;
}

AuditResult audit_equivalence(const SmoothTestFunction& f,
                              const KernelContext& ctx,
                              const NormOptions& opts) {
  if (!ctx.all_strong())
    throw ConditionViolated(
        "audit_equivalence: every coordinate must satisfy the strong condition");
  AuditResult res;
  res.w = norm_w(f, ctx, opts);
  res.h = norm_h(f, ctx, opts);
  res.bound = embed_constant_d(ctx);
  res.ratio = res.h.norm_sq / res.w.norm_sq;
  double s = opts.slack;
  res.lower_ok = res.w.norm_sq <= res.h.norm_sq * (1.0 + s);
  res.upper_ok = res.h.norm_sq <= res.bound * res.w.norm_sq * (1.0 + s);
  return res;
}

std::function<double(std::span<const double>)> anova_term(
    const SmoothTestFunction& f, const KernelContext& ctx, std::uint32_t u,
    const NormOptions& opts) {
  require_dim(f, ctx, 4, "anova_term");
  const int d = f.d;
  const std::uint32_t full = (1u << d) - 1;
  auto eng = std::make_shared<Engine>(f, ctx, opts);
  auto coords = mask_coords(u, d);
  return [eng, u, full, coords, d](std::span<const double> xu) {
    if (xu.size() != coords.size())
      throw DimensionMismatch("anova_term: argument size vs subset size");
    double sum = 0.0;
    std::uint32_t v = u;
    while (true) {  // all v subseteq u
      // pack the components of x_u that lie in v
      std::vector<double> xv;
      xv.reserve(static_cast<size_t>(popcount(v)));
      for (size_t a = 0; a < coords.size(); ++a)
        if (v & (1u << coords[a])) xv.push_back(xu[a]);
      double sign = (popcount(u) - popcount(v)) % 2 == 0 ? 1.0 : -1.0;
      sum += sign * eng->avg(0, full & ~v, xv);
      if (v == 0) break;
      v = (v - 1) & u;
    }
    return sum;
  };
}

namespace {

// rho-average over the coordinates of u\setminus w of the w-th partial of the
// ANOVA term f_u, at the packed point x_w. Built from the explicit ANOVA
// formula; the annihilation happens numerically, not symbolically.
double anova_partial_avg(const Engine& eng, std::uint32_t u, std::uint32_t w,
                         std::span<const double> x_w) {
  const int d = eng.f.d;
  const std::uint32_t full = (1u << d) - 1;
  auto wc = mask_coords(w, d);
  auto inner_coords = mask_coords(u & ~w, d);

  // tensor rho rule over u\setminus w
  std::vector<Rule1D> rules;
  rules.reserve(inner_coords.size());
  for (int j : inner_coords)
    rules.push_back(make_rho_rule(eng.ctx.coord(j).pair(), eng.rate(j),
                                  eng.opts.inner_nodes));

  std::vector<size_t> idx(inner_coords.size(), 0);
  double total = 0.0;
  std::vector<double> xu(static_cast<size_t>(popcount(u)));
  auto ucoords = mask_coords(u, d);
  while (true) {
    double wt = 1.0;
    // assemble x_u from x_w and the rho nodes
    for (size_t a = 0, wi = 0, ii = 0; a < ucoords.size(); ++a) {
      if (w & (1u << ucoords[a])) {
        xu[a] = x_w[wi++];
      } else {
        xu[a] = rules[ii].x[idx[ii]];
        wt *= rules[ii].w[idx[ii]];
        ++ii;
      }
    }
    // partial^w of f_u at xu: explicit alternating sum over w ⊆ v ⊆ u
    double val = 0.0;
    std::uint32_t rest = u & ~w;
    std::uint32_t s = rest;
    while (true) {
      std::uint32_t v = w | s;
      std::vector<double> xv;
      xv.reserve(static_cast<size_t>(popcount(v)));
      for (size_t a = 0; a < ucoords.size(); ++a)
        if (v & (1u << ucoords[a])) xv.push_back(xu[a]);
      double sign = (popcount(u) - popcount(v)) % 2 == 0 ? 1.0 : -1.0;
      val += sign * eng.avg(w, full & ~v, xv);
      if (s == 0) break;
      s = (s - 1) & rest;
    }
    total += wt * val;
    if (inner_coords.empty()) break;
    size_t j = inner_coords.size() - 1;
    while (true) {
      if (++idx[j] < rules[j].x.size()) break;
      idx[j] = 0;
      if (j == 0) return total;
      --j;
    }
  }
  return total;
}

}  // namespace

double w_inner_anova(const SmoothTestFunction& f, const KernelContext& ctx,
                     std::uint32_t u, std::uint32_t v,
                     const NormOptions& opts) {
  require_dim(f, ctx, 4, "w_inner_anova");
  Engine eng(f, ctx, opts);
  const int d = f.d;
  double total = 0.0;
  std::uint32_t meet = u & v;
  std::uint32_t w = meet;
  while (true) {  // all w subseteq u ∩ v; other subsets vanish structurally
    double inv_gamma = 1.0 / ctx.weights().gamma(w);
    if (w == 0) {
      total += inv_gamma * anova_partial_avg(eng, u, 0, {}) *
               anova_partial_avg(eng, v, 0, {});
    } else {
      auto wcoords = mask_coords(w, d);
      std::vector<WeightedGrid> grids;
      grids.reserve(wcoords.size());
      for (int j : wcoords) grids.push_back(eng.psi_grid(j, 2.0 * eng.rate(j)));
      auto profile = tensor_profile(grids, [&](std::span<const double> xw) {
        return anova_partial_avg(eng, u, w, xw) *
               anova_partial_avg(eng, v, w, xw);
      });
      total += inv_gamma * profile[3];
    }
    if (w == 0) break;
    w = (w - 1) & meet;
  }
  return total;
}

double reproducing_residual(const SmoothTestFunction& f,
                            const KernelContext& ctx,
                            std::span<const double> y,
                            const NormOptions& opts) {
  require_dim(f, ctx, 3, "reproducing_residual");
  const int d = f.d;
  if (static_cast<int>(y.size()) != d)
    throw DimensionMismatch("reproducing_residual: y dimension");
  for (int j = 0; j < d; ++j)
    if (!ctx.coord(j).weak())
      throw ConditionViolated("reproducing_residual requires the weak condition");
  Engine eng(f, ctx, opts);
  const std::uint32_t full = (1u << d) - 1;

  // <f, K(.,y)>_W = I_rho(f) + sum_{u != empty} int A_u[f](x_u)
  //                 prod_{j in u} dEta_j(x_j, y_j) psi_j(x_j) dx_u
  double inner = eng.avg(0, full, {});
  for (std::uint32_t u = 1; u < (1u << d); ++u) {
    auto coords = mask_coords(u, d);
    std::vector<WeightedGrid> grids;
    grids.reserve(coords.size());
    for (size_t a = 0; a < coords.size(); ++a) {
      int j = coords[a];
      const auto& pair = ctx.coord(j).pair();
      double yj = y[static_cast<size_t>(j)];
      double kink[1] = {yj};
      // dEta * psi collapses to Phi on the left of y_j and -(1-Phi) beyond
      grids.push_back(make_weighted_grid(
          [&pair, yj](double x) { return x < yj ? pair.cdf(x) : -pair.sf(x); },
          eng.rate(j), kink, opts));
    }
    std::uint32_t avg_mask = full & ~u;
    auto profile = tensor_profile(grids, [&](std::span<const double> xu) {
      return eng.avg(u, avg_mask, xu);
    });
    inner += profile[3];
  }
  return std::abs(f(y) - inner);
}

}  // namespace wanova
