#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include <cforge/group.hpp>
#include <cforge/metric.hpp>

namespace testutil {

using namespace cforge;

// Exhaustive norm oracle: tries every generator word of length <= cap.
// Exponential; only for tiny radii.
inline int brute_force_norm(const GroupDescriptor& G, const GroupElement& g, int cap) {
  if (g.is_identity()) return 0;
  std::vector<GroupElement> gens;
  for (int i = 1; i <= G.generator_count(); ++i) {
    gens.push_back(evaluate_word(G, {static_cast<std::int32_t>(i)}));
    gens.push_back(evaluate_word(G, {static_cast<std::int32_t>(-i)}));
  }
  std::vector<GroupElement> frontier = {identity(G)};
  for (int len = 1; len <= cap; ++len) {
    std::vector<GroupElement> next;
    for (const auto& w : frontier)
      for (const auto& s : gens) {
        auto x = compose(G, w, s);
        if (x == g) return len;
        next.push_back(std::move(x));
      }
    frontier = std::move(next);
  }
  return -1;  // not within cap
}

// Partition oracle: union-find over all pairwise distances.
inline std::vector<std::vector<GroupElement>> brute_force_components(
    const ProperMetric& M, std::vector<GroupElement> pts, int r) {
  std::sort(pts.begin(), pts.end(),
            [](const GroupElement& a, const GroupElement& b) { return element_compare(a, b) < 0; });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<size_t> parent(pts.size());
  for (size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  std::function<size_t(size_t)> find = [&](size_t i) {
    return parent[i] == i ? i : parent[i] = find(parent[i]);
  };
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j)
      if (M.distance(pts[i], pts[j]) <= r) parent[find(i)] = find(j);
  std::map<size_t, std::vector<GroupElement>> blocks;
  for (size_t i = 0; i < pts.size(); ++i) blocks[find(i)].push_back(pts[i]);
  std::vector<std::vector<GroupElement>> out;
  for (auto& [root, members] : blocks) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return element_compare(a.front(), b.front()) < 0;
  });
  return out;
}

inline std::vector<GroupElement> lattice_points(const GroupDescriptor& Z,
                                                const std::vector<std::int64_t>& values) {
  std::vector<GroupElement> out;
  for (auto v : values) out.push_back(GroupElement(LatticeVec{{v}}));
  return out;
}

}  // namespace testutil
