#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace clexp {

/// A lattice site in Z^d. Ordering is lexicographic on coordinates.
struct Site {
  std::vector<int> x;

  Site() = default;
  explicit Site(std::vector<int> coords) : x(std::move(coords)) {}

  int dim() const { return static_cast<int>(x.size()); }
  auto operator<=>(const Site&) const = default;

  Site shifted(const Site& by) const {
    Site s = *this;
    for (std::size_t i = 0; i < x.size(); ++i) s.x[i] += by.x[i];
    return s;
  }
};

inline long long squared_norm(std::span<const int> v) {
  long long s = 0;
  for (int c : v) s += static_cast<long long>(c) * c;
  return s;
}

inline double euclid_norm(std::span<const int> v) {
  return std::sqrt(static_cast<double>(squared_norm(v)));
}

/// The cube [-k, k]^d.
struct Box {
  int d = 1;
  int k = 0;

  Box() = default;
  Box(int dim, int halfwidth) : d(dim), k(halfwidth) {
    if (d < 1) throw std::invalid_argument("Box: dimension must be >= 1");
    if (k < 0) throw std::invalid_argument("Box: half-width must be >= 0");
  }

  bool contains(const Site& s) const {
    if (s.dim() != d) return false;
    for (int c : s.x)
      if (c < -k || c > k) return false;
    return true;
  }

  long long volume() const {
    long long v = 1;
    for (int i = 0; i < d; ++i) v *= 2LL * k + 1;
    return v;
  }

  /// All sites of the box in lexicographic order.
  std::vector<Site> sites() const;
};

/// A finite set of distinct sites, stored sorted lexicographically.
/// Operations that enumerate configurations or polymers index sites by
/// their position in this order.
class Region {
public:
  Region() = default;
  explicit Region(std::vector<Site> sites);
  explicit Region(const Box& b) : Region(b.sites()) {}

  std::size_t size() const { return sites_.size(); }
  const Site& site(std::size_t i) const { return sites_[i]; }
  const std::vector<Site>& sites() const { return sites_; }
  int dim() const { return sites_.empty() ? 0 : sites_.front().dim(); }

  bool contains(const Site& s) const { return index_of(s).has_value(); }
  std::optional<std::size_t> index_of(const Site& s) const {
    auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
    if (it != sites_.end() && *it == s) return static_cast<std::size_t>(it - sites_.begin());
    return std::nullopt;
  }

private:
  std::vector<Site> sites_;
};

/// All nonzero integer vectors v with euclidean norm <= radius, in
/// lexicographic order. Shared by Hamiltonians, boundary fields, and
/// potential-norm sums.
const std::vector<Site>& displacements_within(int d, int radius);

/// One-dimensional convenience: chain region {from, ..., to}.
Region chain_region(int from, int to);

}  // namespace clexp
