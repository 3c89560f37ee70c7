#include "clexp/cluster.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace clexp {

namespace {

/// Disjoint-set over a fixed number of vertices.
struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > UINT64_MAX - b ? UINT64_MAX : a + b;
}
std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  return a > UINT64_MAX / b ? UINT64_MAX : a * b;
}

}  // namespace

bool IntersectionGraph::connected() const {
  if (n <= 1) return true;
  UnionFind uf(n);
  int components = n;
  for (const auto& [i, j] : edges)
    if (uf.unite(i, j)) --components;
  return components == 1;
}

IntersectionGraph intersection_graph(const std::vector<Polymer>& tuple) {
  IntersectionGraph g;
  g.n = static_cast<int>(tuple.size());
  for (int i = 0; i < g.n; ++i)
    for (int j = i + 1; j < g.n; ++j)
      if (tuple[i].support_mask & tuple[j].support_mask) g.edges.emplace_back(i, j);
  return g;
}

Rational ursell_from_graph(const IntersectionGraph& g) {
  if (g.n < 1) throw std::invalid_argument("ursell: empty tuple");
  if (g.n == 1) return Rational(1);
  if (!g.connected()) return Rational(0);
  const int e = static_cast<int>(g.edges.size());
  if (e > kUrsellEdgeBudget)
    throw BudgetError("ursell: intersection graph has more than " +
                      std::to_string(kUrsellEdgeBudget) + " edges");

  long long alternating = 0;
  const std::uint32_t subsets = 1u << e;
  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    UnionFind uf(g.n);
    int components = g.n;
    for (int b = 0; b < e; ++b)
      if (mask & (1u << b))
        if (uf.unite(g.edges[b].first, g.edges[b].second)) --components;
    if (components != 1) continue;  // not spanning-connected
    alternating += (std::popcount(mask) % 2 == 0) ? 1 : -1;
  }

  long long fact = 1;
  for (int i = 2; i <= g.n; ++i) fact *= i;
  return Rational(alternating, fact);
}

Rational ursell(const std::vector<Polymer>& tuple) {
  return ursell_from_graph(intersection_graph(tuple));
}

PolymerFamily build_polymer_family(const ActivityContext& ctx, const PolymerCutoffs& cutoffs,
                                   ActivityKind kind, double c) {
  const std::size_t n = ctx.region().size();
  if (n > kXiRegionBudget)
    throw BudgetError("polymer_partition_function: region exceeds the budget of " +
                      std::to_string(kXiRegionBudget) + " sites");

  PolymerFamily fam;
  fam.mask_activity.assign(1ull << n, std::complex<double>{0.0, 0.0});

  PolymerCutoffs skel = cutoffs;
  skel.restrict_to_r2 = true;
  fam.skeletons = enumerate_polymers(ctx.region(), ctx.potential(), skel);

  const bool with_singletons = kind == ActivityKind::zeta_t && ctx.t() != 0.0 &&
                               !cutoffs.restrict_to_r2;
  const std::size_t labels = ctx.num_labels();

  fam.skeleton_activity.reserve(fam.skeletons.size());
  for (const Polymer& sk : fam.skeletons) {
    const std::size_t m = sk.support.size();
    std::uint64_t states = 1;
    for (std::size_t i = 0; i < m; ++i) {
      states *= labels;
      if (states > kActivityBudget)
        throw BudgetError("polymer_partition_function: activity budget exceeded");
    }

    if (!with_singletons) {
      const std::complex<double> a = activity(ctx, sk, kind, c);
      fam.skeleton_activity.push_back(a);
      fam.mask_activity[sk.support_mask] += a;
      ++fam.polymer_count;
      continue;
    }

    // One sweep over E^support accumulates the activity of every
    // singleton-decorated variant of this skeleton.
    const std::size_t decs = std::size_t{1} << m;
    std::vector<std::complex<double>> acc(decs, {0.0, 0.0});
    std::vector<std::complex<double>> v(decs);
    std::vector<int> sigma(m, 0);
    for (std::uint64_t cfg = 0; cfg < states; ++cfg) {
      double base = 1.0;
      for (std::size_t i = 0; i < m; ++i) base *= ctx.site_mass(sk.support[i])[sigma[i]];
      for (const Bond& b : sk.bonds) {
        const std::size_t si =
            std::lower_bound(sk.support.begin(), sk.support.end(), b.lo) - sk.support.begin();
        const std::size_t sj =
            std::lower_bound(sk.support.begin(), sk.support.end(), b.hi) - sk.support.begin();
        base *= ctx.xi_pair(b.lo, b.hi, sigma[si], sigma[sj]);
      }
      v[0] = base;
      for (std::size_t i = 0; i < m; ++i) {
        const std::complex<double> u = ctx.xi_single(sigma[i]);
        const std::size_t bit = std::size_t{1} << i;
        for (std::size_t d = 0; d < bit; ++d) v[d | bit] = v[d] * u;
      }
      for (std::size_t d = 0; d < decs; ++d) acc[d] += v[d];

      for (std::size_t i = 0; i < m; ++i) {
        if (static_cast<std::size_t>(++sigma[i]) < labels) break;
        sigma[i] = 0;
      }
    }

    const int budget_left = cutoffs.max_bonds - static_cast<int>(sk.bonds.size());
    fam.skeleton_activity.push_back(acc[0]);
    for (std::size_t d = 0; d < decs; ++d) {
      if (static_cast<int>(std::popcount(d)) > budget_left) continue;
      fam.mask_activity[sk.support_mask] += acc[d];
      ++fam.polymer_count;
    }
  }

  if (with_singletons) {
    for (std::size_t x = 0; x < n; ++x) {
      std::complex<double> a{0.0, 0.0};
      for (std::size_t e = 0; e < labels; ++e)
        a += ctx.site_mass(x)[e] * ctx.xi_single(static_cast<int>(e));
      fam.mask_activity[std::uint64_t{1} << x] += a;
      ++fam.polymer_count;
    }
  }
  return fam;
}

XiResult polymer_partition_function(const ActivityContext& ctx, const PolymerCutoffs& cutoffs,
                                    ActivityKind kind, double c) {
  const PolymerFamily fam = build_polymer_family(ctx, cutoffs, kind, c);
  const std::size_t n = ctx.region().size();
  const std::uint64_t full = (n == 64) ? ~0ull : (1ull << n) - 1;

  // Nonzero-activity masks grouped by lowest site.
  std::vector<std::vector<std::uint64_t>> masks_at(n);
  std::vector<std::uint64_t> poly_count_at_mask(fam.mask_activity.size(), 0);
  for (std::uint64_t m = 1; m <= full; ++m) {
    if (fam.mask_activity[m] == std::complex<double>{0.0, 0.0}) continue;
    masks_at[static_cast<std::size_t>(std::countr_zero(m))].push_back(m);
  }

  // F(S) = sum over families of disjoint polymers with supports inside S.
  // Recurrence over the lowest available site: either it stays uncovered
  // or one polymer covering it is chosen.
  std::vector<std::complex<double>> f(full + 1, {0.0, 0.0});
  std::vector<std::uint64_t> cnt(full + 1, 0);
  f[0] = 1.0;
  cnt[0] = 1;
  for (std::uint64_t s = 1; s <= full; ++s) {
    const std::size_t i = static_cast<std::size_t>(std::countr_zero(s));
    std::complex<double> acc = f[s & (s - 1)];  // site i uncovered
    std::uint64_t cc = cnt[s & (s - 1)];
    for (std::uint64_t m : masks_at[i]) {
      if ((m & ~s) != 0) continue;  // polymer sticks out of S
      acc += fam.mask_activity[m] * f[s & ~m];
      cc = saturating_add(cc, saturating_mul(1, cnt[s & ~m]));
    }
    f[s] = acc;
    cnt[s] = cc;
  }

  XiResult out;
  out.xi = f[full];
  out.polymer_count = fam.polymer_count;
  out.family_count = cnt[full] > 0 ? cnt[full] - 1 : 0;  // minus the empty family
  return out;
}

FactorizationReport factorization_check(const ActivityContext& ctx,
                                        std::uint64_t enumeration_budget) {
  const ExactGibbs g = ExactGibbs::build(ctx.region_ptr(), ctx.space(), ctx.potential(),
                                         ctx.boundary(), ctx.beta(), ctx.convention(),
                                         enumeration_budget);
  FactorizationReport rep;
  rep.lhs = g.z_t_phase(ctx.phase());

  PolymerCutoffs full;
  full.max_bonds = std::numeric_limits<int>::max() / 2;
  full.max_pair_range = ctx.potential().truncation_radius();
  full.max_polymers = UINT64_MAX;
  const XiResult xi = polymer_partition_function(ctx, full, ActivityKind::zeta_t);

  rep.xi = xi.xi;
  rep.polymer_count = xi.polymer_count;
  rep.product_factor = 1.0;
  for (std::size_t i = 0; i < ctx.region().size(); ++i)
    rep.product_factor *= ctx.site_normalizer(i);
  rep.rhs = rep.product_factor * xi.xi;
  rep.rel_error = std::abs(rep.lhs - rep.rhs) / std::abs(rep.lhs);
  return rep;
}

std::vector<SeriesOrderRow> truncated_log_series(const ActivityContext& ctx,
                                                 const PolymerCutoffs& cutoffs, ActivityKind kind,
                                                 const SeriesOptions& opt, double c) {
  if (opt.max_order < 1 || opt.max_order > 5)
    throw std::invalid_argument("truncated_log_series: order must be in 1..5");

  PolymerCutoffs fam_cut = cutoffs;
  if (kind != ActivityKind::zeta_t || ctx.t() == 0.0)
    fam_cut.restrict_to_r2 = true;  // singleton activities vanish identically
  const std::vector<Polymer> family = enumerate_polymers(ctx.region(), ctx.potential(), fam_cut);

  std::vector<std::complex<double>> act;
  act.reserve(family.size());
  for (const Polymer& r : family) act.push_back(activity(ctx, r, kind, c));

  const std::size_t m = family.size();
  // multiset count guard: sum_{n<=N} C(m+n-1, n)
  {
    double total = 0.0;
    for (int n = 1; n <= opt.max_order; ++n) {
      double cnt = 1.0;
      for (int i = 0; i < n; ++i) cnt = cnt * (static_cast<double>(m) + i) / (i + 1);
      total += cnt;
    }
    if (total > static_cast<double>(opt.tuple_budget))
      throw BudgetError("truncated_log_series: multiset count exceeds the budget of " +
                        std::to_string(opt.tuple_budget) + " tuples");
  }

  std::vector<SeriesOrderRow> rows(opt.max_order);
  for (int n = 1; n <= opt.max_order; ++n) rows[n - 1].n = n;

  std::vector<std::size_t> pick;
  std::vector<long long> fact(opt.max_order + 1, 1);
  for (int i = 2; i <= opt.max_order; ++i) fact[i] = fact[i - 1] * i;

  auto evaluate = [&]() {
    const int n = static_cast<int>(pick.size());
    // filters
    if (opt.pin_site) {
      const std::uint64_t bit = 1ull << *opt.pin_site;
      bool hit = false;
      for (std::size_t idx : pick) hit = hit || (family[idx].support_mask & bit);
      if (!hit) return;
    }
    if (opt.pin_polymer) {
      bool hit = false;
      for (std::size_t idx : pick) hit = hit || (family[idx].bonds == opt.pin_polymer->bonds);
      if (!hit) return;
    }
    if (opt.l_n_filter) {
      bool some_big = false;
      for (std::size_t idx : pick) some_big = some_big || family[idx].support.size() > 1;
      if (!some_big) return;
    }

    std::vector<Polymer> tuple;
    tuple.reserve(n);
    for (std::size_t idx : pick) tuple.push_back(family[idx]);
    const IntersectionGraph g = intersection_graph(tuple);
    if (n >= 2 && !g.connected()) return;
    const Rational phi_t = ursell_from_graph(g);
    if (phi_t.num == 0) return;

    // multinomial multiplicity of this multiset among ordered tuples
    long long mult = fact[n];
    std::size_t run = 1;
    for (std::size_t i = 1; i < pick.size(); ++i) {
      if (pick[i] == pick[i - 1]) {
        ++run;
        mult /= static_cast<long long>(run);
      } else {
        run = 1;
      }
    }

    std::complex<double> prod{1.0, 0.0};
    for (std::size_t idx : pick) prod *= act[idx];
    rows[n - 1].increment += static_cast<double>(mult) * phi_t.to_double() * prod;
    rows[n - 1].term_count += static_cast<std::uint64_t>(mult);
  };

  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (!pick.empty()) evaluate();
    if (pick.size() == static_cast<std::size_t>(opt.max_order)) return;
    for (std::size_t i = start; i < m; ++i) {
      pick.push_back(i);
      rec(i);
      pick.pop_back();
    }
  };
  rec(0);

  std::complex<double> running{0.0, 0.0};
  for (auto& row : rows) {
    running += row.increment;
    row.partial_sum = running;
  }
  return rows;
}

}  // namespace clexp
