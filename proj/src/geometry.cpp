#include "clexp/geometry.hpp"

#include <map>
#include <mutex>

namespace clexp {

std::vector<Site> Box::sites() const {
  std::vector<Site> out;
  out.reserve(static_cast<std::size_t>(volume()));
  std::vector<int> cur(d, -k);
  while (true) {
    out.emplace_back(cur);
    int i = d - 1;
    while (i >= 0 && cur[i] == k) {
      cur[i] = -k;
      --i;
    }
    if (i < 0) break;
    ++cur[i];
  }
  return out;
}

Region::Region(std::vector<Site> sites) : sites_(std::move(sites)) {
  if (sites_.empty()) throw std::invalid_argument("Region: empty site list");
  const int d = sites_.front().dim();
  for (const Site& s : sites_)
    if (s.dim() != d) throw std::invalid_argument("Region: mixed dimensions");
  std::sort(sites_.begin(), sites_.end());
  if (std::adjacent_find(sites_.begin(), sites_.end()) != sites_.end())
    throw std::invalid_argument("Region: duplicate sites");
}

const std::vector<Site>& displacements_within(int d, int radius) {
  static std::map<std::pair<int, int>, std::vector<Site>> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(d, radius);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  std::vector<Site> out;
  if (radius >= 1) {
    const long long r2 = static_cast<long long>(radius) * radius;
    std::vector<int> cur(d, -radius);
    while (true) {
      if (squared_norm(cur) > 0 && squared_norm(cur) <= r2) out.emplace_back(cur);
      int i = d - 1;
      while (i >= 0 && cur[i] == radius) {
        cur[i] = -radius;
        --i;
      }
      if (i < 0) break;
      ++cur[i];
    }
  }
  return cache.emplace(key, std::move(out)).first->second;
}

Region chain_region(int from, int to) {
  if (to < from) throw std::invalid_argument("chain_region: to < from");
  std::vector<Site> s;
  for (int i = from; i <= to; ++i) s.emplace_back(std::vector<int>{i});
  return Region(std::move(s));
}

}  // namespace clexp
