#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "wanova/weights.hpp"

namespace wanova {

/// Weight parameters gamma_u over subsets u of {1..d}, either in product form
/// (gamma_u = prod_{j in u} gamma_j) or as an explicit mask -> value map.
class WeightParams {
 public:
  static WeightParams product(std::vector<double> gamma_per_coord,
                              double gamma_empty = 1.0);
  static WeightParams explicit_weights(int d,
                                       std::map<std::uint32_t, double> weights,
                                       double gamma_empty = 1.0);

  int dimension() const { return d_; }
  bool is_product() const { return product_; }
  double gamma_empty() const { return gamma_empty_; }

  /// gamma_u for the subset encoded as a bitmask (bit j-1 <-> coordinate j).
  /// Explicit representation throws DomainError for a missing subset.
  double gamma(std::uint32_t mask) const;

  /// Product representation only: the per-coordinate factor gamma_j.
  double gamma_coordinate(int j) const;

 private:
  WeightParams() = default;
  int d_ = 0;
  bool product_ = true;
  double gamma_empty_ = 1.0;
  std::vector<double> per_coord_;
  std::map<std::uint32_t, double> map_;
};

/// Cumulative antiderivative F(x) = int_a^x f(t) dt of a smooth positive
/// integrand on [a, b], stored as an adaptively refined cubic Hermite table
/// (derivatives are the integrand itself, known exactly). Evaluations
/// outside the table fall back to anchored quadrature.
class AntiderivativeTable {
 public:
  AntiderivativeTable(std::function<double(double)> f, double a, double b,
                      double tol);
  double operator()(double x) const;

 private:
  std::function<double(double)> f_;
  std::vector<double> x_, v_, s_;  // knots, values, slopes
};

/// int_0^x f(t) dt on [-x0, x0], assembled from two half-tables anchored at
/// zero. Anchoring both halves at the origin keeps small central values
/// cancellation-free even when the integrand blows up toward the edges
/// (the weak-only pairs reach e^75 there).
class ZeroAnchoredTable {
 public:
  ZeroAnchoredTable(const std::function<double(double)>& f, double x0,
                    double tol);
  double operator()(double x) const;  // int_0^x, signed

 private:
  AntiderivativeTable right_, left_;  // left_ integrates the mirror image
};

/// Per-coordinate antiderivative caches backing the kernel eta_j and the
/// equivalence constants. Caches are built only when the corresponding
/// condition (weak, resp. strong) holds.
class CoordinateCache {
 public:
  explicit CoordinateCache(WeightPair pair);

  const WeightPair& pair() const { return pair_; }
  const ConditionReport& report() const { return report_; }
  bool weak() const { return report_.weak_holds; }
  bool strong() const { return report_.strong_holds; }
  double c_constant() const;  // C(rho,psi); throws ConditionViolated if not strong

  // cumulative integrals; names follow the tail side they anchor to
  double cdf_sq_from_left(double x) const;    // int_{-inf}^x Phi^2/psi
  double sf_sq_from_right(double x) const;    // int_x^{inf} (1-Phi)^2/psi
  double cdf_between(double a, double b) const;     // int_a^b Phi/psi
  double sf_between(double a, double b) const;      // int_a^b (1-Phi)/psi
  double product_between(double a, double b) const; // int_a^b Phi(1-Phi)/psi
  double cdf_from_left(double x) const;   // int_{-inf}^x Phi/psi   (strong)
  double sf_from_right(double x) const;   // int_x^{inf} (1-Phi)/psi (strong)

  double eta(double x, double y) const;
  double eta_diag(double y) const;
  double eta_dx(double x, double y) const;

  // the three equivalent algebraic forms of eta (min/max split variants and
  // the strong-condition form); agreement among them is a test invariant
  double eta_form_min_anchor(double x, double y) const;
  double eta_form_max_anchor(double x, double y) const;
  double eta_form_strong(double x, double y) const;

 private:
  void require_weak(const char* what) const;
  WeightPair pair_;
  ConditionReport report_;
  std::unique_ptr<ZeroAnchoredTable> p_cdf_sq_, p_sf_sq_, p_cdf_, p_sf_, p_prod_;
  double base_cdf_sq_ = 0.0;   // int_{-inf}^{0} Phi^2/psi
  double base_sf_sq_ = 0.0;    // int_{0}^{inf} (1-Phi)^2/psi
  double base_cdf_ = 0.0;      // int_{-inf}^{0} Phi/psi    (strong)
  double base_sf_ = 0.0;       // int_{0}^{inf} (1-Phi)/psi (strong)
};

/// Evaluation context for the d-dimensional kernel: one weight pair per
/// coordinate plus the weight parameters. Immutable after construction;
/// evaluations are read-only and safe to run concurrently.
class KernelContext {
 public:
  KernelContext(std::vector<WeightPair> pairs, WeightParams weights);

  int dimension() const { return static_cast<int>(coords_.size()); }
  const WeightParams& weights() const { return weights_; }
  const CoordinateCache& coord(int j) const;  // j is 0-based

  double eta(int j, double x, double y) const;
  double eta_diag(int j, double y) const;
  double eta_dx(int j, double x, double y) const;

  /// K_d(x, y). Product weights use the factorized form
  /// prod_j (1 + gamma_j eta_j); explicit weights the 2^d subset sum (d <= 20).
  double kernel(std::span<const double> x, std::span<const double> y) const;

  /// The subset-sum form regardless of representation (d <= 20).
  double kernel_subset_sum(std::span<const double> x,
                           std::span<const double> y) const;

  bool all_strong() const;
  std::vector<double> c_constants() const;

 private:
  std::vector<CoordinateCache> coords_;
  WeightParams weights_;
};

/// 1 + gamma * C
double embed_constant_1d(double gamma, double c);

/// Norm-equivalence constant: product weights give prod_j (1 + gamma_j C_j);
/// general weights the exhaustive subset maximization (d <= 20).
double embed_constant_d(const WeightParams& weights,
                        std::span<const double> c_per_coord);

/// As above with the constants taken from the context; requires the strong
/// condition on every coordinate.
double embed_constant_d(const KernelContext& ctx);

}  // namespace wanova
