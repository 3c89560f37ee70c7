#include "clexp/polymer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace clexp {

std::size_t Polymer::singleton_count() const {
  std::size_t c = 0;
  for (const Bond& b : bonds) c += b.singleton() ? 1 : 0;
  return c;
}

std::vector<Bond> Polymer::gamma1() const {
  std::vector<Bond> g;
  for (const Bond& b : bonds) if (b.singleton()) g.push_back(b);
  return g;
}

std::vector<Bond> Polymer::gamma2() const {
  std::vector<Bond> g;
  for (const Bond& b : bonds) if (!b.singleton()) g.push_back(b);
  return g;
}

bool is_connected(std::span<const Bond> bonds) {
  if (bonds.empty()) throw std::invalid_argument("is_connected: empty bond set");
  // breadth-first search over the bond-intersection graph
  std::vector<bool> seen(bonds.size(), false);
  std::deque<std::size_t> queue{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    for (std::size_t k = 0; k < bonds.size(); ++k) {
      if (seen[k] || !bonds[cur].intersects(bonds[k])) continue;
      seen[k] = true;
      ++reached;
      queue.push_back(k);
    }
  }
  return reached == bonds.size();
}

Polymer make_polymer(std::vector<Bond> bonds, std::size_t region_size) {
  if (region_size > 64)
    throw BudgetError("make_polymer: polymer operations support regions of at most 64 sites");
  if (bonds.empty()) throw std::invalid_argument("make_polymer: empty bond set");
  std::sort(bonds.begin(), bonds.end());
  if (std::adjacent_find(bonds.begin(), bonds.end()) != bonds.end())
    throw std::invalid_argument("make_polymer: duplicate bonds");
  if (!is_connected(bonds)) throw std::invalid_argument("make_polymer: bond set is not connected");

  Polymer p;
  p.bonds = std::move(bonds);
  for (const Bond& b : p.bonds) {
    if (b.lo < 0 || static_cast<std::size_t>(b.hi) >= region_size)
      throw std::invalid_argument("make_polymer: bond site index out of range");
    p.support_mask |= (1ull << b.lo) | (1ull << b.hi);
  }
  for (int i = 0; i < static_cast<int>(region_size); ++i)
    if (p.support_mask & (1ull << i)) p.support.push_back(i);
  return p;
}

Polymer empty_polymer() { return Polymer{}; }

bool polymer_canonical_less(const Polymer& a, const Polymer& b) {
  if (a.support.front() != b.support.front()) return a.support.front() < b.support.front();
  if (a.bonds.size() != b.bonds.size()) return a.bonds.size() < b.bonds.size();
  return a.bonds < b.bonds;
}

std::vector<Polymer> enumerate_polymers(const Region& region, const PairPotential& phi,
                                        const PolymerCutoffs& cutoffs) {
  if (cutoffs.max_bonds < 1)
    throw std::invalid_argument("cutoffs.maxBonds: must be >= 1");
  if (cutoffs.max_pair_range > phi.truncation_radius())
    throw std::invalid_argument("cutoffs.maxPairRange: must not exceed the truncation radius");
  const std::size_t n = region.size();
  if (n > 64)
    throw BudgetError("enumerate_polymers: polymer operations support regions of at most 64 sites");

  // candidate bond universe, canonically ordered
  std::vector<Bond> universe;
  if (!cutoffs.restrict_to_r2)
    for (std::size_t i = 0; i < n; ++i) universe.emplace_back(static_cast<int>(i), static_cast<int>(i));
  const long long range2 = static_cast<long long>(cutoffs.max_pair_range) * cutoffs.max_pair_range;
  std::vector<int> disp(region.dim());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      for (int c = 0; c < region.dim(); ++c) disp[c] = region.site(j).x[c] - region.site(i).x[c];
      if (squared_norm(disp) <= range2)
        universe.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  std::sort(universe.begin(), universe.end());

  // adjacency between bonds (shared site)
  const std::size_t m = universe.size();
  std::vector<std::vector<int>> adj(m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      if (universe[a].intersects(universe[b])) {
        adj[a].push_back(static_cast<int>(b));
        adj[b].push_back(static_cast<int>(a));
      }

  // Connected-subset enumeration: subsets containing seed s and no bond
  // with index < s are grown through the candidate frontier; candidates
  // processed earlier at the same level are excluded from deeper calls,
  // so every connected subset appears exactly once.
  std::vector<Polymer> out;
  std::vector<int> current;
  std::vector<char> in_current(m, 0), banned(m, 0);

  auto emit = [&]() {
    std::vector<Bond> bonds;
    bonds.reserve(current.size());
    for (int idx : current) bonds.push_back(universe[idx]);
    out.push_back(make_polymer(std::move(bonds), n));
    if (out.size() > cutoffs.max_polymers)
      throw BudgetError("enumerate_polymers: polymer count exceeds the budget of " +
                        std::to_string(cutoffs.max_polymers) + " polymers");
  };

  std::function<void(int)> grow = [&](int seed) {
    emit();
    if (current.size() >= static_cast<std::size_t>(cutoffs.max_bonds)) return;
    // frontier: neighbors of the current set, unbanned, > seed
    std::vector<int> frontier;
    for (int idx : current)
      for (int nb : adj[idx])
        if (nb > seed && !in_current[nb] && !banned[nb]) {
          banned[nb] = 1;  // temporarily, to dedupe the frontier list
          frontier.push_back(nb);
        }
    std::sort(frontier.begin(), frontier.end());
    for (int nb : frontier) banned[nb] = 0;

    for (std::size_t p = 0; p < frontier.size(); ++p) {
      const int pick = frontier[p];
      current.push_back(pick);
      in_current[pick] = 1;
      grow(seed);
      in_current[pick] = 0;
      current.pop_back();
      banned[pick] = 1;  // siblings to the right must not re-add it
    }
    for (int nb : frontier) banned[nb] = 0;
  };

  for (std::size_t s = 0; s < m; ++s) {
    current.assign(1, static_cast<int>(s));
    in_current[s] = 1;
    grow(static_cast<int>(s));
    in_current[s] = 0;
  }

  std::sort(out.begin(), out.end(), polymer_canonical_less);
  return out;
}

ActivityContext ActivityContext::make(std::shared_ptr<const Region> region, SpinSpace space,
                                      PairPotential phi, BoundaryCondition bc, double beta,
                                      double t, double d_k, PairConvention conv) {
  space.validate();
  if (t != 0.0 && !(d_k > 0.0))
    throw std::invalid_argument("ActivityContext: D_k must be positive when t != 0");

  ActivityContext ctx;
  ctx.region_ = std::move(region);
  ctx.space_ = std::move(space);
  ctx.phi_ = std::move(phi);
  ctx.bc_ = std::move(bc);
  ctx.beta_ = beta;
  ctx.t_ = t;
  ctx.d_k_ = d_k;
  ctx.phase_ = t == 0.0 ? 0.0 : t / std::sqrt(d_k);
  ctx.conv_ = conv;

  const PairTables tables = build_pair_tables(*ctx.region_, ctx.space_, ctx.phi_, ctx.bc_, conv);
  const std::size_t n = ctx.region_->size();
  const std::size_t labels = ctx.space_.size();

  ctx.site_mass_.assign(n, std::vector<double>(labels, 0.0));
  ctx.site_normalizer_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (std::size_t e = 0; e < labels; ++e) {
      const double v = ctx.space_.weights[e] * std::exp(-beta * tables.exterior_field[i][e]);
      ctx.site_mass_[i][e] = v;
      norm += v;
    }
    ctx.site_normalizer_[i] = norm;
    for (std::size_t e = 0; e < labels; ++e) ctx.site_mass_[i][e] /= norm;
  }

  ctx.xi_single_.resize(labels);
  ctx.phase_factor_.resize(labels);
  for (std::size_t e = 0; e < labels; ++e) {
    const std::complex<double> pf =
        std::exp(std::complex<double>(0.0, ctx.phase_ * ctx.space_.f[e]));
    ctx.phase_factor_[e] = pf;
    ctx.xi_single_[e] = pf - 1.0;
  }

  ctx.pair_lookup_.assign(n * n, -1);
  for (const auto& p : tables.pairs) {
    const int idx = static_cast<int>(ctx.xi_pair_.size());
    std::vector<double> table(labels * labels);
    for (std::size_t a = 0; a < labels; ++a)
      for (std::size_t b = 0; b < labels; ++b)
        table[a * labels + b] = std::expm1(-beta * p.energy[a * labels + b]);
    ctx.xi_pair_.push_back(std::move(table));
    ctx.pair_lookup_[static_cast<std::size_t>(p.i) * n + p.j] = idx;
    ctx.pair_lookup_[static_cast<std::size_t>(p.j) * n + p.i] = idx;
  }
  return ctx;
}

int ActivityContext::pair_index(int i, int j) const {
  return pair_lookup_[static_cast<std::size_t>(i) * region_->size() + j];
}

double ActivityContext::xi_pair(int i, int j, int a, int b) const {
  const int idx = pair_index(i, j);
  if (idx < 0) return 0.0;  // out of range: Phi = 0, xi = 0
  return xi_pair_[idx][static_cast<std::size_t>(a) * space_.size() + b];
}

std::vector<double> single_site_density(const ActivityContext& ctx, std::size_t site_index) {
  if (site_index >= ctx.region().size())
    throw std::invalid_argument("single_site_density: site outside the box");
  return ctx.site_mass(site_index);
}

std::complex<double> activity(const ActivityContext& ctx, const Polymer& r, ActivityKind kind,
                              double c, std::uint64_t budget) {
  if (r.empty()) {
    if (kind == ActivityKind::zeta_hat) return 1.0;
    throw std::invalid_argument("activity: empty polymer is only valid for zeta_hat");
  }
  const bool needs_r2 = kind == ActivityKind::zeta_hat || kind == ActivityKind::eta_c ||
                        kind == ActivityKind::zeta_tilde;
  if (needs_r2 && !r.in_r2())
    throw std::invalid_argument("activity: this kind is defined on R_2 (pair bonds only)");
  if (kind == ActivityKind::zeta_t && ctx.t() != 0.0 && !(ctx.d_k() > 0.0))
    throw std::invalid_argument("activity: zeta_t with t != 0 requires D_k");

  const std::size_t s = r.support.size();
  const std::size_t labels = ctx.num_labels();
  std::uint64_t states = 1;
  for (std::size_t i = 0; i < s; ++i) {
    states *= labels;
    if (states > budget)
      throw BudgetError("activity: |E|^|support| exceeds the budget of " +
                        std::to_string(budget) + " states");
  }

  std::vector<int> sigma(s, 0);  // label per support slot
  std::complex<double> acc{0.0, 0.0};
  for (std::uint64_t cfg = 0; cfg < states; ++cfg) {
    double mass = 1.0;
    for (std::size_t i = 0; i < s; ++i) mass *= ctx.site_mass(r.support[i])[sigma[i]];

    std::complex<double> term{mass, 0.0};
    if (kind == ActivityKind::zeta_tilde)
      for (std::size_t i = 0; i < s; ++i) term *= ctx.phase_factor(sigma[i]);

    for (const Bond& b : r.bonds) {
      if (b.singleton()) {
        const std::size_t slot =
            std::lower_bound(r.support.begin(), r.support.end(), b.lo) - r.support.begin();
        term *= ctx.xi_single(sigma[slot]);
      } else {
        const std::size_t si =
            std::lower_bound(r.support.begin(), r.support.end(), b.lo) - r.support.begin();
        const std::size_t sj =
            std::lower_bound(r.support.begin(), r.support.end(), b.hi) - r.support.begin();
        const double xi = ctx.xi_pair(b.lo, b.hi, sigma[si], sigma[sj]);
        term *= (kind == ActivityKind::zeta_hat || kind == ActivityKind::eta_c)
                    ? std::abs(xi)
                    : xi;
      }
      if (term == std::complex<double>{0.0, 0.0}) break;
    }
    acc += term;

    for (std::size_t i = 0; i < s; ++i) {
      if (static_cast<std::size_t>(++sigma[i]) < labels) break;
      sigma[i] = 0;
    }
  }

  if (kind == ActivityKind::eta_c) acc *= std::exp(c * static_cast<double>(s));
  return acc;
}

}  // namespace clexp
