#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "clexp/gibbs.hpp"
#include "clexp/model.hpp"

namespace clexp {

/// Lattice span of the observable: all f values are a + b h with
/// b in [p, q], h maximal (gcd of value differences), a = min value, p = 0.
struct SpanInfo {
  long long a = 0;
  long long h = 1;
  long long p = 0;
  long long q = 0;
};
SpanInfo detect_span(const SpinSpace& space);

/// Standard normal CDF, 0.5 erfc(-x/sqrt(2)); absolute error well below 1e-12.
double normal_cdf(double x);

/// Kolmogorov distance between the law of (S_k - mean)/sqrt(D_k) and the
/// standard normal.
double kolmogorov_distance_to_normal(const SkStatistics& stats);

struct LcltRow {
  long long b = 0;
  long long s_value = 0;
  double prob = 0.0;
  double z = 0.0;          // z_{k,b}
  double gauss = 0.0;      // exp(-z^2/2)/sqrt(2 pi)
  double discrepancy = 0.0;
  double conf_radius = 0.0;  // 0 in exact mode
};

struct LcltTable {
  std::vector<LcltRow> rows;   // every b in [p |Lambda|, q |Lambda|]
  double sup_discrepancy = 0.0;
  long long argmax_b = 0;
  bool exact = true;
};

/// Exact per-b LCLT discrepancy table from an exact mass function.
LcltTable lclt_discrepancy(const SkStatistics& stats, const SpanInfo& span, long long volume);

/// Monte Carlo variant: mass-function confidence radii propagate linearly
/// into per-row radii.
LcltTable lclt_discrepancy_mc(const McResult& mc, const SpanInfo& span, long long volume);

struct IntegralDecomposition {
  double i1 = 0.0;  // int_{-B}^{B} |mu(e^{it Sbar}) - e^{-t^2/2}| dt
  double i2 = 0.0;  // int_{|t|>=B} e^{-t^2/2} dt
  double i3 = 0.0;  // int_{B<|t|<delta sqrt(Dk)} |mu| dt
  double i4 = 0.0;  // int_{delta sqrt(Dk)<=|t|<=(pi/h) sqrt(Dk)} |mu| dt
  double majorant = 0.0;  // (i1+i2+i3+i4) / (2 pi)
  bool grids_converged = false;
};

/// Trapezoid quadrature at `grid_points` per segment with one halving
/// refinement; non-convergence beyond 1e-7 is flagged.
IntegralDecomposition integral_decomposition(const ExactGibbs& g, const SpanInfo& span,
                                             double B, double delta, int grid_points = 4096);

enum class CharfnRegime {
  quadratic,  // |t| < delta sqrt(Dk), bound exp(-t^2 D |Lambda| / Dk)
  tail,       // delta sqrt(Dk) <= |t| <= (pi/h) sqrt(Dk), bound exp(-C |Lambda|)
};

struct CharfnBoundRow {
  double t = 0.0;
  double modulus = 0.0;
  double bound = 0.0;
  bool holds = false;
};

struct CharfnBoundReport {
  std::vector<CharfnBoundRow> rows;
  bool all_hold = true;
  double worst_margin = 0.0;  // min over rows of bound - modulus
  double t_worst = 0.0;
};

/// Evaluates |mu(e^{it Sbar_k})| on the regime's t-grid against the bound.
/// `constant` is D (quadratic) or C (tail) from the bounds module; callers
/// must pass constants whose positivity flag holds.
CharfnBoundReport charfn_bound_check(const ExactGibbs& g, CharfnRegime regime, double constant,
                                     double delta, const SpanInfo& span, int grid_points);

struct DecimationSample {
  std::vector<int> omega_prime;  // label per in-box exterior site
  double modulus = 0.0;
};

struct DecimationReport {
  std::shared_ptr<const Region> sublattice;
  double d_k_full = 0.0;
  double phase = 0.0;  // t / sqrt(D_k)
  std::vector<DecimationSample> samples;
  double sup_modulus = 0.0;
  bool ltp_checked = false;
  double ltp_max_diff = 0.0;
};

/// Conditional characteristic functions on the sublattice Lambda_k ∩ r0 Z^d
/// under sampled in-box exterior assignments omega', each frozen through the
/// composite boundary condition. Also verifies the law of total probability
/// exactly when the enumeration budgets allow.
DecimationReport decimation_experiment(std::shared_ptr<const Region> full_region,
                                       const SpinSpace& space, const PairPotential& phi,
                                       const BoundaryCondition& base_bc, double beta, int r0,
                                       int n_samples, std::uint64_t seed, double t,
                                       PairConvention conv = PairConvention::unordered,
                                       std::uint64_t budget = ExactGibbs::kDefaultBudget);

}  // namespace clexp
