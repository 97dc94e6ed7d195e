#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wanova/kernel.hpp"
#include "wanova/testfn.hpp"

namespace wanova {

struct NormOptions {
  int inner_nodes = 32;  // rho-average rule per inactive coordinate
  int panel_nodes = 12;  // Gauss-Legendre nodes per grid panel
  double slack = 1e-6;   // relative slack on the sandwich inequalities
  // truncation radii of the divergence profile
  std::array<double, 4> radii{5.0, 10.0, 20.0, 40.0};
};

struct TermReport {
  std::uint32_t subset = 0;
  double value = 0.0;  // contribution at full truncation, 1/gamma_u included
  std::array<double, 4> truncated{};  // values on the [-R,R] boxes
  bool converged = true;
};

struct NormPart {
  double norm_sq = 0.0;
  bool converged = true;
  std::vector<TermReport> terms;
};

/// Average of the mixed partial (deriv_mask) of f against the product of
/// rho_j over the coordinates in avg_mask, the remaining coordinates fixed
/// at `fixed` (packed in increasing coordinate order). deriv_mask and
/// avg_mask must be disjoint. Separable fixtures use factorized per-factor
/// averages; generic ones a tensor rho rule.
double rho_average(const SmoothTestFunction& f, const KernelContext& ctx,
                   std::uint32_t deriv_mask, std::uint32_t avg_mask,
                   std::span<const double> fixed, int n_nodes = 32);

/// The two norms. Each subset term is evaluated on expanding truncation
/// boxes so divergence shows up as a growth profile instead of infinity.
/// Dimension capped at 4 (tensor quadrature).
NormPart norm_w(const SmoothTestFunction& f, const KernelContext& ctx,
                const NormOptions& opts = {});
NormPart norm_h(const SmoothTestFunction& f, const KernelContext& ctx,
                const NormOptions& opts = {});

struct AuditResult {
  bool lower_ok = false;
  bool upper_ok = false;
  double ratio = 0.0;  // h_norm_sq / w_norm_sq
  double bound = 0.0;  // norm-equivalence constant
  NormPart w, h;
};

/// Checks w <= h <= bound * w within opts.slack relative tolerance.
/// Requires the strong condition on every coordinate.
AuditResult audit_equivalence(const SmoothTestFunction& f,
                              const KernelContext& ctx,
                              const NormOptions& opts = {});

/// The ANOVA term f_u as a callable on R^{|u|} (arguments packed in
/// increasing coordinate order), via the alternating-sum formula.
std::function<double(std::span<const double>)> anova_term(
    const SmoothTestFunction& f, const KernelContext& ctx, std::uint32_t u,
    const NormOptions& opts = {});

/// Inner product <f_u, f_v> in the d-dimensional ANOVA space, evaluated
/// numerically from the explicit ANOVA formulas (no orthogonality assumed).
double w_inner_anova(const SmoothTestFunction& f, const KernelContext& ctx,
                     std::uint32_t u, std::uint32_t v,
                     const NormOptions& opts = {});

/// |f(y) - <f, K_d(. , y)>_W|, the reproducing-property residual.
double reproducing_residual(const SmoothTestFunction& f,
                            const KernelContext& ctx,
                            std::span<const double> y,
                            const NormOptions& opts = {});

}  // namespace wanova
