#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "clexp/common.hpp"
#include "clexp/polymer.hpp"

namespace clexp {

/// Intersection graph of a polymer tuple: vertices 1..n, an edge {i,j}
/// whenever the supports intersect.
struct IntersectionGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  bool connected() const;
};
IntersectionGraph intersection_graph(const std::vector<Polymer>& tuple);

constexpr int kUrsellEdgeBudget = 24;

/// Ursell function phi^T: 1 for n=1, 0 when the intersection graph is
/// disconnected, otherwise the alternating sum over connected spanning
/// subgraphs divided by n!, in exact rational arithmetic.
Rational ursell(const std::vector<Polymer>& tuple);
Rational ursell_from_graph(const IntersectionGraph& g);

/// Polymer family with precomputed activities, aggregated by support mask.
/// For zeta_t with t != 0 the family includes singleton-decorated polymers
/// and pure singletons; for t = 0 and the R_2 kinds only pair skeletons.
struct PolymerFamily {
  std::vector<Polymer> skeletons;                      // R_2 members, canonical order
  std::vector<std::complex<double>> skeleton_activity; // per skeleton, chosen kind
  std::vector<std::complex<double>> mask_activity;     // support mask -> summed activity
  std::size_t polymer_count = 0;                       // polymers contributing to mask_activity
};

constexpr std::uint64_t kXiRegionBudget = 20;  // max sites for the family sum

PolymerFamily build_polymer_family(const ActivityContext& ctx, const PolymerCutoffs& cutoffs,
                                   ActivityKind kind, double c = 0.0);

struct XiResult {
  std::complex<double> xi{1.0, 0.0};
  std::size_t polymer_count = 0;
  std::uint64_t family_count = 0;  // non-empty disjoint families summed
};

/// Xi = 1 + sum over families of pairwise-support-disjoint polymers of the
/// activity product. Exactly the hardcore polymer partition function within
/// the cutoffs.
XiResult polymer_partition_function(const ActivityContext& ctx, const PolymerCutoffs& cutoffs,
                                    ActivityKind kind, double c = 0.0);

struct FactorizationReport {
  std::complex<double> lhs;            // Z_{Lambda,beta,t} by configuration enumeration
  std::complex<double> rhs;            // (prod_x N_x) * Xi by polymer enumeration
  std::complex<double> xi;
  double product_factor = 0.0;         // prod_x N_x
  double rel_error = 0.0;
  std::size_t polymer_count = 0;
};

/// Checks Z = (prod_x N_x) Xi with both sides computed by independent
/// routes. The polymer family is exhaustive within the region (all pair
/// bonds within the truncation radius, all decorations).
FactorizationReport factorization_check(const ActivityContext& ctx,
                                        std::uint64_t enumeration_budget = ExactGibbs::kDefaultBudget);

struct SeriesOrderRow {
  int n = 0;
  std::uint64_t term_count = 0;  // ordered tuples with nonzero Ursell value
  std::complex<double> increment;
  std::complex<double> partial_sum;
};

struct SeriesOptions {
  int max_order = 4;                       // N <= 5
  std::optional<int> pin_site;             // region site index
  std::optional<Polymer> pin_polymer;      // tuples containing this polymer
  bool l_n_filter = false;                 // require some |support| > 1
  std::uint64_t tuple_budget = 1ull << 23;
};

/// Partial sums of the cluster series for log Xi, per order n <= N.
/// Ordered-tuple sums are evaluated over multisets weighted by multinomial
/// counts.
std::vector<SeriesOrderRow> truncated_log_series(const ActivityContext& ctx,
                                                 const PolymerCutoffs& cutoffs, ActivityKind kind,
                                                 const SeriesOptions& opt, double c = 0.0);

}  // namespace clexp
