#include "wanova/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace wanova::quad {
namespace {

// Eigenvalues and first eigenvector components of a symmetric tridiagonal
// matrix (diag d, off-diag e), by the implicit QL method with Wilkinson
// shifts. On return d holds eigenvalues and q0 the first components of the
// normalized eigenvectors. Standard tql2 reduced to the first row.
void tridiag_eigen_first_row(std::vector<double>& d, std::vector<double>& e,
                             std::vector<double>& q0) {
  const int n = static_cast<int>(d.size());
  q0.assign(n, 0.0);
  if (n == 0) return;
  q0[0] = 1.0;
  if (n == 1) return;
  e.push_back(0.0);

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 1e-16 * dd) break;
      }
      if (m != l) {
        if (++iter > 50) throw NoConvergence("tridiagonal QL did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          // rotate the tracked first row of the eigenvector matrix
          f = q0[i + 1];
          q0[i + 1] = s * q0[i] + c * f;
          q0[i] = c * q0[i] - s * f;
        }
        if (r == 0.0 && m - 1 >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }

  // sort ascending, carrying q0 along
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
  std::vector<double> ds(n), qs(n);
  for (int i = 0; i < n; ++i) {
    ds[i] = d[idx[i]];
    qs[i] = q0[idx[i]];
  }
  d = std::move(ds);
  q0 = std::move(qs);
}

Nodes golub_welsch(int n, double mu0, const std::function<double(int)>& offdiag) {
  std::vector<double> d(n, 0.0), e(n - 1 > 0 ? n - 1 : 0), q0;
  for (int k = 1; k < n; ++k) e[k - 1] = offdiag(k);
  tridiag_eigen_first_row(d, e, q0);
  Nodes out;
  out.x = d;
  out.w.resize(n);
  for (int i = 0; i < n; ++i) out.w[i] = mu0 * q0[i] * q0[i];
  // both Hermite and Legendre rules are symmetric; enforce it exactly
  for (int i = 0, j = n - 1; i < j; ++i, --j) {
    double xm = 0.5 * (out.x[j] - out.x[i]);
    out.x[i] = -xm;
    out.x[j] = xm;
    double wm = 0.5 * (out.w[i] + out.w[j]);
    out.w[i] = out.w[j] = wm;
  }
  if (n % 2 == 1) out.x[n / 2] = 0.0;
  return out;
}

const Nodes& cached(std::map<int, Nodes>& cache, std::mutex& mu, int n,
                    const std::function<Nodes(int)>& make) {
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make(n)).first;
  return it->second;
}

double require_finite(double v, const char* where) {
  if (!std::isfinite(v)) throw NonFiniteSample(std::string(where) + ": integrand returned a non-finite value");
  return v;
}

struct SimpsonCtx {
  const Fn1* g;
  double tol;
  int max_depth;
};

double simpson_rec(const SimpsonCtx& c, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = require_finite((*c.g)(lm), "adaptive");
  double frm = require_finite((*c.g)(rm), "adaptive");
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth >= c.max_depth) throw MaxDepthExceeded("adaptive Simpson exceeded max depth");
  return simpson_rec(c, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_rec(c, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

const Nodes& gauss_hermite(int n) {
  if (n < 1) throw DomainError("gauss_hermite: order must be >= 1");
  static std::map<int, Nodes> cache;
  static std::mutex mu;
  return cached(cache, mu, n, [](int m) {
    return golub_welsch(m, std::sqrt(std::numbers::pi),
                        [](int k) { return std::sqrt(0.5 * k); });
  });
}

const Nodes& gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: order must be >= 1");
  static std::map<int, Nodes> cache;
  static std::mutex mu;
  return cached(cache, mu, n, [](int m) {
    return golub_welsch(m, 2.0, [](int k) {
      return k / std::sqrt(4.0 * k * k - 1.0);
    });
  });
}

double integrate_gl(const Fn1& g, double a, double b, int n) {
  const Nodes& gl = gauss_legendre(n);
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double sum = 0.0;
  for (size_t i = 0; i < gl.x.size(); ++i)
    sum += gl.w[i] * require_finite(g(c + h * gl.x[i]), "gauss_legendre");
  return h * sum;
}

double integrate_adaptive(const Fn1& g, double a, double b, double tol,
                          int max_depth) {
  if (a == b) return 0.0;
  SimpsonCtx c{&g, tol, max_depth};
  double fa = require_finite(g(a), "adaptive");
  double fb = require_finite(g(b), "adaptive");
  double fm = require_finite(g(0.5 * (a + b)), "adaptive");
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(c, a, b, fa, fm, fb, whole, tol, 0);
}

double integrate_hermite_scaled(const Fn1& g, int n, double scale) {
  const Nodes& gh = gauss_hermite(n);
  double sum = 0.0;
  for (size_t i = 0; i < gh.x.size(); ++i) {
    double t = gh.x[i];
    sum += gh.w[i] * std::exp(t * t) *
           require_finite(g(scale * t), "gauss_hermite");
  }
  return scale * sum;
}

namespace {

// Expanding blocks away from `a`; each block integrated adaptively. Stops
// once blocks past the integrand's peak contribute below tol relative.
double integrate_semi_infinite(const Fn1& g, double a, Direction dir,
                               double tol, int max_depth) {
  double total = 0.0;
  double width = 1.0;
  double lo = a;
  double peak = 0.0;
  bool seen_peak = false;
  for (int k = 0; k < 64; ++k) {
    double hi = lo + width * (dir == Direction::Up ? 1.0 : -1.0);
    double piece = dir == Direction::Up
                       ? integrate_adaptive(g, lo, hi, tol, max_depth)
                       : integrate_adaptive(g, hi, lo, tol, max_depth);
    total += piece;
    double mag = std::abs(piece);
    if (mag >= peak) {
      peak = mag;
    } else {
      seen_peak = true;
    }
    if (seen_peak && mag <= tol * std::max(std::abs(total), 1.0) && k >= 3)
      return total;
    lo = hi;
    if (width < 4096.0) width *= 2.0;
  }
  throw MaxDepthExceeded("semi-infinite integral did not settle");
}

}  // namespace

double integrate(const QuadratureSpec& spec, const Fn1& g) {
  if (const auto* gh = std::get_if<GaussHermite>(&spec.rule)) {
    if (!std::holds_alternative<RealLine>(spec.domain))
      throw DomainError("GaussHermite rule applies to the real line");
    return integrate_hermite_scaled(g, gh->n, 1.0);
  }
  if (const auto* gl = std::get_if<GaussLegendre>(&spec.rule)) {
    const auto* iv = std::get_if<Interval>(&spec.domain);
    if (!iv) throw DomainError("GaussLegendre rule applies to an interval");
    return integrate_gl(g, iv->a, iv->b, gl->n);
  }
  const auto& as = std::get<AdaptiveSimpson>(spec.rule);
  if (const auto* iv = std::get_if<Interval>(&spec.domain))
    return integrate_adaptive(g, iv->a, iv->b, as.tol, as.max_depth);
  if (const auto* si = std::get_if<SemiInfinite>(&spec.domain))
    return integrate_semi_infinite(g, si->a, si->dir, as.tol, as.max_depth);
  // real line: two expanding half-line sweeps meeting at 0
  return integrate_semi_infinite(g, 0.0, Direction::Up, 0.5 * as.tol,
                                 as.max_depth) +
         integrate_semi_infinite(g, 0.0, Direction::Down, 0.5 * as.tol,
                                 as.max_depth);
}

double tensor_integrate(std::span<const QuadratureSpec> specs, const FnK& g) {
  const int k = static_cast<int>(specs.size());
  if (k > 4) throw DimensionTooLarge("tensor_integrate supports k <= 4");
  if (k == 0) return g({});

  struct Axis {
    std::vector<double> x, w;
  };
  std::vector<Axis> axes(k);
  for (int j = 0; j < k; ++j) {
    const auto& spec = specs[j];
    Axis ax;
    if (const auto* gh = std::get_if<GaussHermite>(&spec.rule)) {
      if (!std::holds_alternative<RealLine>(spec.domain))
        throw DomainError("GaussHermite rule applies to the real line");
      const Nodes& t = gauss_hermite(gh->n);
      ax.x = t.x;
      ax.w.resize(t.w.size());
      for (size_t i = 0; i < t.w.size(); ++i)
        ax.w[i] = t.w[i] * std::exp(t.x[i] * t.x[i]);
    } else if (const auto* gl = std::get_if<GaussLegendre>(&spec.rule)) {
      const auto* iv = std::get_if<Interval>(&spec.domain);
      if (!iv) throw DomainError("GaussLegendre rule applies to an interval");
      const Nodes& t = gauss_legendre(gl->n);
      double c = 0.5 * (iv->a + iv->b), h = 0.5 * (iv->b - iv->a);
      ax.x.resize(t.x.size());
      ax.w.resize(t.w.size());
      for (size_t i = 0; i < t.x.size(); ++i) {
        ax.x[i] = c + h * t.x[i];
        ax.w[i] = h * t.w[i];
      }
    } else {
      throw DomainError("adaptive rules are not supported in tensor products");
    }
    axes[j] = std::move(ax);
  }

  std::vector<size_t> idx(k, 0);
  std::vector<double> pt(k);
  double sum = 0.0;
  while (true) {
    double w = 1.0;
    for (int j = 0; j < k; ++j) {
      pt[j] = axes[j].x[idx[j]];
      w *= axes[j].w[idx[j]];
    }
    sum += w * require_finite(g(pt), "tensor_integrate");
    int j = k - 1;
    while (j >= 0 && ++idx[j] == axes[j].x.size()) {
      idx[j] = 0;
      --j;
    }
    if (j < 0) break;
  }
  return sum;
}

}  // namespace wanova::quad
