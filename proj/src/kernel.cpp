#include "wanova/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "wanova/quadrature.hpp"

namespace wanova {

WeightParams WeightParams::product(std::vector<double> gamma_per_coord,
                                   double gamma_empty) {
  WeightParams p;
  p.d_ = static_cast<int>(gamma_per_coord.size());
  p.product_ = true;
  p.gamma_empty_ = gamma_empty;
  p.per_coord_ = std::move(gamma_per_coord);
  if (!(gamma_empty > 0.0))
    throw DomainError("WeightParams: gamma_empty must be positive");
  for (double g : p.per_coord_)
    if (!(g > 0.0)) throw DomainError("WeightParams: weights must be positive");
  return p;
}

WeightParams WeightParams::explicit_weights(
    int d, std::map<std::uint32_t, double> weights, double gamma_empty) {
  WeightParams p;
  p.d_ = d;
  p.product_ = false;
  p.gamma_empty_ = gamma_empty;
  p.map_ = std::move(weights);
  if (!(gamma_empty > 0.0))
    throw DomainError("WeightParams: gamma_empty must be positive");
  for (const auto& [mask, g] : p.map_) {
    if (mask >= (1u << d))
      throw DomainError("WeightParams: subset mask out of range");
    if (!(g > 0.0)) throw DomainError("WeightParams: weights must be positive");
  }
  return p;
}

double WeightParams::gamma(std::uint32_t mask) const {
  if (mask == 0) return gamma_empty_;
  if (product_) {
    double g = 1.0;
    for (int j = 0; j < d_; ++j)
      if (mask & (1u << j)) g *= per_coord_[j];
    return g;
  }
  auto it = map_.find(mask);
  if (it == map_.end())
    throw DomainError("WeightParams: no weight stored for the queried subset");
  return it->second;
}

double WeightParams::gamma_coordinate(int j) const {
  if (!product_)
    throw DomainError("gamma_coordinate applies to product weights only");
  return per_coord_.at(static_cast<size_t>(j));
}

namespace {

double hermite_eval(double x0, double x1, double v0, double v1, double s0,
                    double s1, double x) {
  double h = x1 - x0;
  double t = (x - x0) / h;
  double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * v0 + (t3 - 2 * t2 + t) * h * s0 +
         (-2 * t3 + 3 * t2) * v1 + (t3 - t2) * h * s1;
}

struct Knot {
  double x, v, s;
};

// adaptive quadrature with the absolute target scaled to the integrand size;
// the weak-only integrands span hundreds of orders of magnitude
double scaled_adaptive(const std::function<double(double)>& f, double a,
                       double b, double rel_tol) {
  if (a == b) return 0.0;
  const auto& gl = quad::gauss_legendre(24);
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double coarse = 0.0, peak = 0.0;
  for (size_t i = 0; i < gl.x.size(); ++i) {
    double v = f(c + h * gl.x[i]);
    coarse += h * gl.w[i] * v;
    peak = std::max(peak, std::abs(v));
  }
  double scale = std::max({1.0, std::abs(coarse), peak});
  return quad::integrate_adaptive(f, a, b, rel_tol * scale, 48);
}

// refine [a,b] until the cubic Hermite midpoint prediction matches the
// directly integrated value, relatively for large cumulative values
void build_segment(const std::function<double(double)>& f, double a, double va,
                   double sa, double b, double tol, int depth,
                   std::vector<Knot>& out) {
  double m = 0.5 * (a + b);
  double vm = va + quad::integrate_gl(f, a, m, 16);
  double vb = vm + quad::integrate_gl(f, m, b, 16);
  double sm = f(m), sb = f(b);
  double pred = hermite_eval(a, b, va, vb, sa, sb, m);
  double scale = std::max(1.0, std::abs(vm));
  if (std::abs(pred - vm) <= tol * scale || depth >= 12) {
    out.push_back({m, vm, sm});
    out.push_back({b, vb, sb});
    return;
  }
  build_segment(f, a, va, sa, m, 0.5 * tol, depth + 1, out);
  const Knot& mid = out.back();
  build_segment(f, mid.x, mid.v, mid.s, b, 0.5 * tol, depth + 1, out);
}

}  // namespace

AntiderivativeTable::AntiderivativeTable(std::function<double(double)> f,
                                         double a, double b, double tol)
    : f_(std::move(f)) {
  std::vector<Knot> knots;
  knots.push_back({a, 0.0, f_(a)});
  const int coarse = 20;
  for (int k = 0; k < coarse; ++k) {
    const Knot& last = knots.back();
    double hi = a + (b - a) * (k + 1) / coarse;
    build_segment(f_, last.x, last.v, last.s, hi, tol, 0, knots);
  }
  x_.reserve(knots.size());
  v_.reserve(knots.size());
  s_.reserve(knots.size());
  for (const Knot& k : knots) {
    x_.push_back(k.x);
    v_.push_back(k.v);
    s_.push_back(k.s);
  }
}

double AntiderivativeTable::operator()(double x) const {
  if (x < x_.front())
    return v_.front() - scaled_adaptive(f_, x, x_.front(), 1e-13);
  if (x > x_.back())
    return v_.back() + scaled_adaptive(f_, x_.back(), x, 1e-13);
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  size_t i = (it == x_.begin()) ? 0 : (it - x_.begin() - 1);
  if (i + 1 >= x_.size()) i = x_.size() - 2;
  return hermite_eval(x_[i], x_[i + 1], v_[i], v_[i + 1], s_[i], s_[i + 1], x);
}

ZeroAnchoredTable::ZeroAnchoredTable(const std::function<double(double)>& f,
                                     double x0, double tol)
    : right_(f, 0.0, x0, tol),
      left_([f](double u) { return f(-u); }, 0.0, x0, tol) {}

double ZeroAnchoredTable::operator()(double x) const {
  return x >= 0.0 ? right_(x) : -left_(-x);
}

namespace {

constexpr double kTableHalfWidth = 10.0;
constexpr double kTableTol = 1e-13;

// log-space integrand (Phi or 1-Phi to `power`) / psi; the pair is copied
// into the closure, which outlives any move of the owning cache
std::function<double(double)> tail_safe_integrand(WeightPair pair,
                                                  bool use_cdf, int power) {
  return [pair, use_cdf, power](double t) {
    double lg =
        power * (use_cdf ? pair.log_cdf(t) : pair.log_sf(t)) - pair.log_psi(t);
    return std::exp(std::min(lg, 400.0));
  };
}

// int over (-inf, -r0] (left) or [r0, inf) (right) by expanding blocks
double tail_integral(const std::function<double(double)>& g, double r0,
                     bool left) {
  double total = 0.0;
  double width = 2.0, edge = r0;
  for (int k = 0; k < 60; ++k) {
    double a = left ? -(edge + width) : edge;
    double b = left ? -edge : edge + width;
    double inc = quad::integrate_adaptive(g, a, b, 1e-14, 48);
    total += inc;
    edge += width;
    width *= 2.0;
    if (inc <= 1e-13 * std::max(total, 1e-300) && k >= 2) return total;
  }
  return total;
}

}  // namespace

CoordinateCache::CoordinateCache(WeightPair pair)
    : pair_(std::move(pair)), report_(check_conditions(pair_)) {
  if (!report_.weak_holds) return;
  auto cdf_sq = tail_safe_integrand(pair_, true, 2);
  auto sf_sq = tail_safe_integrand(pair_, false, 2);
  auto cdf1 = tail_safe_integrand(pair_, true, 1);
  auto sf1 = tail_safe_integrand(pair_, false, 1);
  auto prod = [pair = pair_](double t) {
    double lg = pair.log_cdf(t) + pair.log_sf(t) - pair.log_psi(t);
    return std::exp(std::min(lg, 400.0));
  };
  p_cdf_sq_ = std::make_unique<ZeroAnchoredTable>(cdf_sq, kTableHalfWidth, kTableTol);
  p_sf_sq_ = std::make_unique<ZeroAnchoredTable>(sf_sq, kTableHalfWidth, kTableTol);
  p_cdf_ = std::make_unique<ZeroAnchoredTable>(cdf1, kTableHalfWidth, kTableTol);
  p_sf_ = std::make_unique<ZeroAnchoredTable>(sf1, kTableHalfWidth, kTableTol);
  p_prod_ = std::make_unique<ZeroAnchoredTable>(prod, kTableHalfWidth, kTableTol);
  // int_{-inf}^0 Phi^2/psi = far tail + table piece, both small under the
  // weak condition; mirrored for the survival side
  base_cdf_sq_ = tail_integral(cdf_sq, kTableHalfWidth, true) - (*p_cdf_sq_)(-kTableHalfWidth);
  base_sf_sq_ = tail_integral(sf_sq, kTableHalfWidth, false) + (*p_sf_sq_)(kTableHalfWidth);
  if (report_.strong_holds) {
    base_cdf_ = tail_integral(cdf1, kTableHalfWidth, true) - (*p_cdf_)(-kTableHalfWidth);
    base_sf_ = tail_integral(sf1, kTableHalfWidth, false) + (*p_sf_)(kTableHalfWidth);
  }
}

void CoordinateCache::require_weak(const char* what) const {
  if (!report_.weak_holds)
    throw ConditionViolated(std::string(what) +
                            ": the weak condition fails for " +
                            pair_.rho_name() + " / " + pair_.psi_name());
}

double CoordinateCache::c_constant() const {
  if (!report_.strong_holds)
    throw ConditionViolated("c_constant: the strong condition fails for " +
                            pair_.rho_name() + " / " + pair_.psi_name());
  return *report_.c_constant;
}

double CoordinateCache::cdf_sq_from_left(double x) const {
  require_weak("cdf_sq_from_left");
  return base_cdf_sq_ + (*p_cdf_sq_)(x);
}

double CoordinateCache::sf_sq_from_right(double x) const {
  require_weak("sf_sq_from_right");
  return base_sf_sq_ - (*p_sf_sq_)(x);
}

double CoordinateCache::cdf_between(double a, double b) const {
  require_weak("cdf_between");
  return (*p_cdf_)(b) - (*p_cdf_)(a);
}

double CoordinateCache::sf_between(double a, double b) const {
  require_weak("sf_between");
  return (*p_sf_)(b) - (*p_sf_)(a);
}

double CoordinateCache::product_between(double a, double b) const {
  require_weak("product_between");
  return (*p_prod_)(b) - (*p_prod_)(a);
}

double CoordinateCache::cdf_from_left(double x) const {
  if (!report_.strong_holds)
    throw ConditionViolated("cdf_from_left requires the strong condition");
  return base_cdf_ + (*p_cdf_)(x);
}

double CoordinateCache::sf_from_right(double x) const {
  if (!report_.strong_holds)
    throw ConditionViolated("sf_from_right requires the strong condition");
  return base_sf_ - (*p_sf_)(x);
}

double CoordinateCache::eta(double x, double y) const {
  double lo = std::min(x, y), hi = std::max(x, y);
  return cdf_sq_from_left(lo) + sf_sq_from_right(hi) - product_between(lo, hi);
}

double CoordinateCache::eta_diag(double y) const {
  return cdf_sq_from_left(y) + sf_sq_from_right(y);
}

double CoordinateCache::eta_dx(double x, double y) const {
  require_weak("eta_dx");
  if (x == y)
    throw UndefinedAtKink("eta_dx is undefined on the diagonal x == y");
  double lg = (x < y ? pair_.log_cdf(x) : pair_.log_sf(x)) - pair_.log_psi(x);
  double v = std::exp(std::min(lg, 400.0));
  return x < y ? v : -v;
}

double CoordinateCache::eta_form_min_anchor(double x, double y) const {
  double lo = std::min(x, y), hi = std::max(x, y);
  return cdf_sq_from_left(lo) + sf_sq_from_right(lo) - sf_between(lo, hi);
}

double CoordinateCache::eta_form_max_anchor(double x, double y) const {
  double lo = std::min(x, y), hi = std::max(x, y);
  return cdf_sq_from_left(hi) + sf_sq_from_right(hi) - cdf_between(lo, hi);
}

double CoordinateCache::eta_form_strong(double x, double y) const {
  double lo = std::min(x, y), hi = std::max(x, y);
  return cdf_from_left(lo) + sf_from_right(hi) - c_constant();
}

KernelContext::KernelContext(std::vector<WeightPair> pairs, WeightParams weights)
    : weights_(std::move(weights)) {
  if (static_cast<int>(pairs.size()) != weights_.dimension())
    throw DimensionMismatch("KernelContext: pairs vs weight dimension");
  coords_.reserve(pairs.size());
  for (auto& p : pairs) coords_.emplace_back(std::move(p));
}

const CoordinateCache& KernelContext::coord(int j) const {
  if (j < 0 || j >= dimension())
    throw DimensionMismatch("coordinate index out of range");
  return coords_[static_cast<size_t>(j)];
}

double KernelContext::eta(int j, double x, double y) const {
  return coord(j).eta(x, y);
}
double KernelContext::eta_diag(int j, double y) const {
  return coord(j).eta_diag(y);
}
double KernelContext::eta_dx(int j, double x, double y) const {
  return coord(j).eta_dx(x, y);
}

double KernelContext::kernel(std::span<const double> x,
                             std::span<const double> y) const {
  const int d = dimension();
  if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d)
    throw DimensionMismatch("kernel: point dimension mismatch");
  if (weights_.is_product()) {
    double prod = weights_.gamma_empty();
    for (int j = 0; j < d; ++j)
      prod *= 1.0 + weights_.gamma_coordinate(j) * coords_[j].eta(x[j], y[j]);
    return prod;
  }
  return kernel_subset_sum(x, y);
}

double KernelContext::kernel_subset_sum(std::span<const double> x,
                                        std::span<const double> y) const {
  const int d = dimension();
  if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d)
    throw DimensionMismatch("kernel: point dimension mismatch");
  if (d > 20)
    throw DimensionTooLarge("subset-sum kernel is capped at d <= 20");
  std::vector<double> etas(d);
  for (int j = 0; j < d; ++j) etas[j] = coords_[j].eta(x[j], y[j]);
  double sum = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
    double term = weights_.gamma(mask);
    for (int j = 0; j < d; ++j)
      if (mask & (1u << j)) term *= etas[j];
    sum += term;
  }
  return sum;
}

bool KernelContext::all_strong() const {
  for (const auto& c : coords_)
    if (!c.strong()) return false;
  return true;
}

std::vector<double> KernelContext::c_constants() const {
  std::vector<double> out;
  out.reserve(coords_.size());
  for (const auto& c : coords_) out.push_back(c.c_constant());
  return out;
}

double embed_constant_1d(double gamma, double c) { return 1.0 + gamma * c; }

double embed_constant_d(const WeightParams& weights,
                        std::span<const double> c_per_coord) {
  const int d = weights.dimension();
  if (static_cast<int>(c_per_coord.size()) != d)
    throw DimensionMismatch("embed_constant_d: constants vs weight dimension");
  if (weights.is_product()) {
    double prod = 1.0;
    for (int j = 0; j < d; ++j)
      prod *= 1.0 + weights.gamma_coordinate(j) * c_per_coord[j];
    return prod;
  }
  if (d > 20)
    throw DimensionTooLarge("subset maximization is capped at d <= 20");
  double best = 0.0;
  for (std::uint32_t v = 0; v < (1u << d); ++v) {
    double gv = weights.gamma(v);
    double sum = 0.0;
    std::uint32_t w = v;
    while (true) {  // enumerate all subsets w of v, including empty
      double term = gv / weights.gamma(v & ~w);
      for (int j = 0; j < d; ++j)
        if (w & (1u << j)) term *= c_per_coord[j];
      sum += term;
      if (w == 0) break;
      w = (w - 1) & v;
    }
    best = std::max(best, sum);
  }
  return best;
}

double embed_constant_d(const KernelContext& ctx) {
  if (!ctx.all_strong())
    throw ConditionViolated(
        "embed_constant_d: every coordinate must satisfy the strong condition");
  auto cs = ctx.c_constants();
  return embed_constant_d(ctx.weights(), cs);
}

}  // namespace wanova
