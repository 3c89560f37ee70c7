// Independent brute-force oracles for the test suite. These deliberately
// avoid the library's tables, enumeration order and connectivity routines
// so that agreement is evidence, not tautology.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "clexp/gibbs.hpp"
#include "clexp/model.hpp"
#include "clexp/polymer.hpp"

namespace oracles {

using clexp::Bond;
using clexp::BoundaryCondition;
using clexp::PairPotential;
using clexp::Region;
using clexp::Site;
using clexp::SpinSpace;

/// Plain double loop over ordered site pairs (halved) plus an exterior scan
/// over the whole truncation cube per site.
inline double hamiltonian(const Region& region, const std::vector<int>& sigma,
                          const BoundaryCondition& bc, const SpinSpace& /*space*/,
                          const PairPotential& phi) {
  const int d = region.dim();
  const int R = phi.truncation_radius();
  double total = 0.0;
  for (std::size_t i = 0; i < region.size(); ++i)
    for (std::size_t j = 0; j < region.size(); ++j) {
      if (i == j) continue;
      std::vector<int> disp(d);
      for (int c = 0; c < d; ++c) disp[c] = region.site(j).x[c] - region.site(i).x[c];
      total += 0.5 * phi.energy(disp, sigma[i], sigma[j]);
    }
  for (std::size_t i = 0; i < region.size(); ++i) {
    std::vector<int> v(d, -R);
    while (true) {
      if (clexp::squared_norm(v) > 0 &&
          clexp::squared_norm(v) <= static_cast<long long>(R) * R) {
        Site y = region.site(i).shifted(Site(v));
        if (!region.contains(y)) {
          auto lbl = bc.label_at(y);
          if (lbl) total += phi.energy(v, sigma[i], *lbl);
        }
      }
      int c = d - 1;
      while (c >= 0 && v[c] == R) { v[c] = -R; --c; }
      if (c < 0) break;
      ++v[c];
    }
  }
  return total;
}

/// Recursive configuration enumeration; returns Z and the S_k histogram by
/// direct exp summation (no log-sum-exp).
struct EnumerationResult {
  double z = 0.0;
  std::map<long long, double> s_weight;  // S value -> summed weight
};

inline EnumerationResult enumerate_gibbs(const Region& region, const SpinSpace& space,
                                         const PairPotential& phi, const BoundaryCondition& bc,
                                         double beta) {
  EnumerationResult out;
  std::vector<int> sigma(region.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t site) {
    if (site == region.size()) {
      double w = std::exp(-beta * hamiltonian(region, sigma, bc, space, phi));
      long long s = 0;
      for (std::size_t i = 0; i < region.size(); ++i) {
        w *= space.weights[sigma[i]];
        s += space.f[sigma[i]];
      }
      out.z += w;
      out.s_weight[s] += w;
      return;
    }
    for (std::size_t e = 0; e < space.size(); ++e) {
      sigma[site] = static_cast<int>(e);
      rec(site + 1);
    }
  };
  rec(0);
  return out;
}

inline std::map<long long, double> mass_function(const EnumerationResult& e) {
  std::map<long long, double> m;
  for (const auto& [s, w] : e.s_weight) m[s] = w / e.z;
  return m;
}

inline std::complex<double> charfn_centered(const EnumerationResult& e, double t) {
  double mean = 0.0;
  for (const auto& [s, w] : e.s_weight) mean += static_cast<double>(s) * w / e.z;
  double var = 0.0;
  for (const auto& [s, w] : e.s_weight) {
    const double dd = static_cast<double>(s) - mean;
    var += dd * dd * w / e.z;
  }
  std::complex<double> acc{0.0, 0.0};
  for (const auto& [s, w] : e.s_weight)
    acc += w / e.z *
           std::exp(std::complex<double>(0.0, t * (static_cast<double>(s) - mean) / std::sqrt(var)));
  return acc;
}

/// Union-find connectivity over bonds (the library uses BFS here).
inline bool connected_union_find(const std::vector<Bond>& bonds) {
  if (bonds.empty()) return false;
  std::vector<int> parent(bonds.size());
  for (std::size_t i = 0; i < bonds.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) { parent[v] = parent[parent[v]]; v = parent[v]; }
    return v;
  };
  for (std::size_t i = 0; i < bonds.size(); ++i)
    for (std::size_t j = i + 1; j < bonds.size(); ++j)
      if (bonds[i].intersects(bonds[j])) parent[find(static_cast<int>(i))] = find(static_cast<int>(j));
  const int root = find(0);
  for (std::size_t i = 0; i < bonds.size(); ++i)
    if (find(static_cast<int>(i)) != root) return false;
  return true;
}

/// All connected bond subsets of size <= max_bonds, as canonical bond lists,
/// by filtering every subset.
inline std::set<std::vector<Bond>> polymer_subset_filter(const std::vector<Bond>& universe,
                                                         int max_bonds) {
  std::set<std::vector<Bond>> out;
  const std::size_t m = universe.size();
  for (std::uint64_t mask = 1; mask < (1ull << m); ++mask) {
    std::vector<Bond> subset;
    for (std::size_t b = 0; b < m; ++b)
      if (mask & (1ull << b)) subset.push_back(universe[b]);
    if (subset.size() > static_cast<std::size_t>(max_bonds)) continue;
    if (!connected_union_find(subset)) continue;
    std::sort(subset.begin(), subset.end());
    out.insert(subset);
  }
  return out;
}

/// Ursell value by recursive edge-subset enumeration with DFS connectivity
/// (the library iterates bitmasks with union-find).
inline double ursell(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n == 1) return 1.0;
  std::vector<std::vector<int>> adj(n);
  long long signed_count = 0;
  std::vector<std::pair<int, int>> chosen;

  std::function<bool()> connected_dfs = [&]() {
    std::vector<std::vector<int>> a(n);
    for (auto& [u, v] : chosen) { a[u].push_back(v); a[v].push_back(u); }
    std::vector<bool> seen(n, false);
    std::function<void(int)> dfs = [&](int v) {
      seen[v] = true;
      for (int w : a[v]) if (!seen[w]) dfs(w);
    };
    dfs(0);
    for (bool s : seen) if (!s) return false;
    return true;
  };

  std::function<void(std::size_t)> rec = [&](std::size_t idx) {
    if (idx == edges.size()) {
      if (connected_dfs()) signed_count += chosen.size() % 2 == 0 ? 1 : -1;
      return;
    }
    rec(idx + 1);
    chosen.push_back(edges[idx]);
    rec(idx + 1);
    chosen.pop_back();
  };
  rec(0);

  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  return static_cast<double>(signed_count) / fact;
}

/// zeta^t activity by direct recursion, with p_x computed from scratch.
inline std::complex<double> zeta_t_activity(const Region& region, const SpinSpace& space,
                                            const PairPotential& phi, const BoundaryCondition& bc,
                                            double beta, double phase,
                                            const std::vector<Bond>& bonds) {
  std::set<int> support_set;
  for (const Bond& b : bonds) { support_set.insert(b.lo); support_set.insert(b.hi); }
  std::vector<int> support(support_set.begin(), support_set.end());

  const int d = region.dim();
  const int R = phi.truncation_radius();
  auto p_mass = [&](int site_index, int label) {
    auto field = [&](int lbl) {
      double h = 0.0;
      std::vector<int> v(d, -R);
      while (true) {
        if (clexp::squared_norm(v) > 0 &&
            clexp::squared_norm(v) <= static_cast<long long>(R) * R) {
          Site y = region.site(site_index).shifted(Site(v));
          if (!region.contains(y)) {
            auto wl = bc.label_at(y);
            if (wl) h += phi.energy(v, lbl, *wl);
          }
        }
        int c = d - 1;
        while (c >= 0 && v[c] == R) { v[c] = -R; --c; }
        if (c < 0) break;
        ++v[c];
      }
      return h;
    };
    double norm = 0.0;
    for (std::size_t e = 0; e < space.size(); ++e)
      norm += space.weights[e] * std::exp(-beta * field(static_cast<int>(e)));
    return space.weights[label] * std::exp(-beta * field(label)) / norm;
  };

  std::map<int, int> label_of;
  std::complex<double> total{0.0, 0.0};
  std::function<void(std::size_t)> rec = [&](std::size_t slot) {
    if (slot == support.size()) {
      std::complex<double> term{1.0, 0.0};
      for (int s : support) term *= p_mass(s, label_of[s]);
      for (const Bond& b : bonds) {
        if (b.singleton()) {
          term *= std::exp(std::complex<double>(0.0, phase * space.f[label_of[b.lo]])) - 1.0;
        } else {
          std::vector<int> disp(d);
          for (int c = 0; c < d; ++c)
            disp[c] = region.site(b.hi).x[c] - region.site(b.lo).x[c];
          term *= std::exp(-beta * phi.energy(disp, label_of[b.lo], label_of[b.hi])) - 1.0;
        }
      }
      total += term;
      return;
    }
    for (std::size_t e = 0; e < space.size(); ++e) {
      label_of[support[slot]] = static_cast<int>(e);
      rec(slot + 1);
    }
  };
  rec(0);
  return total;
}

}  // namespace oracles
