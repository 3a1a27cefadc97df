#include "cforge/metric.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>

namespace cforge {

namespace {

bool element_pair_less(const std::pair<GroupElement, int>& a,
                       const std::pair<GroupElement, int>& b) {
  return element_compare(a.first, b.first) < 0;
}

}  // namespace

bool Ball::contains(const GroupElement& g) const { return distance_to_center(g).has_value(); }

std::optional<int> Ball::distance_to_center(const GroupElement& g) const {
  auto it = std::lower_bound(by_element_.begin(), by_element_.end(),
                             std::pair<GroupElement, int>(g, 0), element_pair_less);
  if (it != by_element_.end() && it->first == g) return it->second;
  return std::nullopt;
}

std::vector<GroupElement> Ball::elements() const {
  std::vector<GroupElement> out;
  out.reserve(by_element_.size());
  for (const auto& [g, d] : by_element_) out.push_back(g);
  return out;
}

ProperMetric ProperMetric::word_metric(const GroupDescriptor& G) {
  ProperMetric m;
  m.G_ = G;
  m.standard_ = true;
  for (int i = 1; i <= G.generator_count(); ++i) {
    m.gens_.push_back(evaluate_word(G, {static_cast<std::int32_t>(i)}));
    m.gens_.push_back(evaluate_word(G, {static_cast<std::int32_t>(-i)}));
  }
  if (G.kind() == GroupKind::Product) {
    m.factors_.push_back(word_metric(G.left()));
    m.factors_.push_back(word_metric(G.right()));
  }
  return m;
}

ProperMetric ProperMetric::word_metric(const GroupDescriptor& G,
                                       std::vector<GroupElement> generators) {
  ProperMetric m;
  m.G_ = G;
  m.standard_ = false;
  std::set<GroupElement, ElementLess> sym;
  for (const auto& g : generators) {
    if (g.is_identity()) continue;
    sym.insert(normalize(G, g));
    sym.insert(invert(G, g));
  }
  if (sym.empty()) throw std::invalid_argument("word_metric: generating set must be nonempty");
  m.gens_.assign(sym.begin(), sym.end());
  return m;
}

std::optional<int> ProperMetric::closed_norm(const GroupElement& g, const Budget& budget) const {
  if (!standard_) return std::nullopt;
  switch (G_.kind()) {
    case GroupKind::FreeGroup:
      return static_cast<int>(g.as_free().letters.size());
    case GroupKind::Lattice: {
      std::int64_t s = 0;
      for (auto c : g.as_lattice().coords) s += c < 0 ? -c : c;
      return static_cast<int>(s);
    }
    case GroupKind::Product: {
      // a word for (g, h) projects to words for g and for h whose lengths add
      // up, so the product norm is the sum of the factor norms
      int total = 0;
      for (size_t i = 0; i < 2; ++i)
        total += factors_[i].norm(g.as_product().parts[i], budget);
      return total;
    }
    default:
      return std::nullopt;
  }
}

void ProperMetric::extend_locked(Bfs& bfs, int radius, const Budget& budget) const {
  if (bfs.layers.empty()) {
    GroupElement e = identity(G_);
    bfs.layers.push_back({e});
    bfs.norms.emplace(std::move(e), 0);
    bfs.total = 1;
    bfs.completed_radius = 0;
  }
  while (bfs.completed_radius < radius) {
    const auto& frontier = bfs.layers.back();
    if (frontier.empty()) {  // group exhausted inside the previous radius
      bfs.completed_radius = radius;
      break;
    }
    std::vector<GroupElement> next;
    int d = bfs.completed_radius + 1;
    for (const auto& g : frontier) {
      for (const auto& s : gens_) {
        GroupElement n = compose(G_, g, s);
        auto [it, inserted] = bfs.norms.emplace(std::move(n), d);
        if (inserted) {
          charge_elements(budget, ++bfs.total, "ball enumeration");
          next.push_back(it->first);
        }
      }
    }
    std::sort(next.begin(), next.end(),
              [](const GroupElement& a, const GroupElement& b) { return element_compare(a, b) < 0; });
    bfs.layers.push_back(std::move(next));
    bfs.completed_radius = d;
  }
}

int ProperMetric::norm(const GroupElement& g, const Budget& budget) const {
  GroupElement n = normalize(G_, g);
  if (auto c = closed_norm(n, budget)) return *c;
  std::lock_guard<std::mutex> lock(bfs_->mu);
  auto it = bfs_->norms.find(n);
  while (it == bfs_->norms.end()) {
    int next = bfs_->completed_radius + 1;
    extend_locked(*bfs_, next, budget);
    if (!bfs_->layers.empty() && bfs_->layers.back().empty())
      throw std::invalid_argument("norm: element not generated by the chosen generating set");
    it = bfs_->norms.find(n);
  }
  return it->second;
}

int ProperMetric::distance(const GroupElement& g, const GroupElement& h,
                           const Budget& budget) const {
  return norm(compose(G_, invert(G_, g), h), budget);
}

Ball ProperMetric::ball(const GroupElement& center, int radius, const Budget& budget) const {
  if (radius < 0) throw std::invalid_argument("ball: radius must be >= 0");
  Ball out;
  out.group = G_;
  out.center = normalize(G_, center);
  out.radius = radius;
  bool centered = out.center.is_identity();

  std::lock_guard<std::mutex> lock(bfs_->mu);
  extend_locked(*bfs_, radius, budget);
  for (int d = 0; d <= radius && d < static_cast<int>(bfs_->layers.size()); ++d) {
    std::vector<std::pair<GroupElement, int>> layer;
    layer.reserve(bfs_->layers[d].size());
    for (const auto& g : bfs_->layers[d])
      layer.emplace_back(centered ? g : compose(G_, out.center, g), d);
    if (!centered) std::sort(layer.begin(), layer.end(), element_pair_less);
    out.members.insert(out.members.end(), layer.begin(), layer.end());
  }
  out.by_element_ = out.members;
  std::sort(out.by_element_.begin(), out.by_element_.end(), element_pair_less);
  return out;
}

std::vector<std::vector<GroupElement>> r_components(const ProperMetric& M,
                                                    const std::vector<GroupElement>& points,
                                                    int r, const Budget& budget) {
  if (r < 0) throw std::invalid_argument("r_components: r must be >= 0");
  std::vector<GroupElement> pts = points;
  std::sort(pts.begin(), pts.end(),
            [](const GroupElement& a, const GroupElement& b) { return element_compare(a, b) < 0; });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  std::map<GroupElement, size_t, ElementLess> index;
  for (size_t i = 0; i < pts.size(); ++i) index.emplace(pts[i], i);

  auto stencil = M.ball(identity(M.group()), r, budget).elements();
  charge_pairs(budget, static_cast<long long>(pts.size()) * stencil.size(), "r_components");

  std::vector<char> seen(pts.size(), 0);
  std::vector<std::vector<GroupElement>> blocks;
  for (size_t start = 0; start < pts.size(); ++start) {
    if (seen[start]) continue;
    std::vector<size_t> block;
    std::queue<size_t> queue;
    queue.push(start);
    seen[start] = 1;
    while (!queue.empty()) {
      size_t i = queue.front();
      queue.pop();
      block.push_back(i);
      for (const auto& s : stencil) {
        GroupElement nb = compose(M.group(), pts[i], s);
        auto it = index.find(nb);
        if (it != index.end() && !seen[it->second]) {
          seen[it->second] = 1;
          queue.push(it->second);
        }
      }
    }
    std::sort(block.begin(), block.end());
    std::vector<GroupElement> members;
    members.reserve(block.size());
    for (size_t i : block) members.push_back(pts[i]);
    blocks.push_back(std::move(members));
  }
  return blocks;
}

std::vector<GroupElement> neighborhood(const ProperMetric& M, const std::vector<GroupElement>& A,
                                       int R, const Ball& window, const Budget& budget) {
  std::set<GroupElement, ElementLess> out;
  if (R <= 0) return {};
  auto stencil = M.ball(identity(M.group()), R - 1, budget).elements();
  charge_pairs(budget, static_cast<long long>(A.size()) * stencil.size(), "neighborhood");
  for (const auto& a : A)
    for (const auto& s : stencil) {
      GroupElement x = compose(M.group(), a, s);
      if (window.contains(x)) out.insert(std::move(x));
    }
  return {out.begin(), out.end()};
}

LipschitzProfile metric_compare(const ProperMetric& M1, const ProperMetric& M2,
                                const std::vector<GroupElement>& window, const Budget& budget) {
  if (M1.group() != M2.group())
    throw std::invalid_argument("metric_compare: metrics live on different groups");
  const auto& G = M1.group();
  long long n = static_cast<long long>(window.size());
  charge_pairs(budget, n * (n + 1) / 2, "metric_compare");

  std::map<int, LipschitzProfile::Sample> samples;
  for (size_t i = 0; i < window.size(); ++i) {
    for (size_t j = i; j < window.size(); ++j) {
      GroupElement z = compose(G, invert(G, window[i]), window[j]);
      int t = M1.norm(z, budget);
      int s = M2.norm(z, budget);
      auto [it, fresh] = samples.try_emplace(t);
      auto& sample = it->second;
      if (fresh) {
        sample.t = t;
        sample.s_max = sample.s_min = s;
        sample.witness_max = sample.witness_min = {window[i], window[j]};
      } else {
        if (s > sample.s_max) {
          sample.s_max = s;
          sample.witness_max = {window[i], window[j]};
        }
        if (s < sample.s_min) {
          sample.s_min = s;
          sample.witness_min = {window[i], window[j]};
        }
      }
    }
  }

  LipschitzProfile out;
  for (auto& [t, s] : samples) out.samples.push_back(std::move(s));
  int running = 0;
  for (const auto& s : out.samples) {
    running = std::max(running, s.s_max);
    out.phi_plus.emplace_back(s.t, running);
  }
  int suffix = 0;
  std::vector<std::pair<int, int>> rev;
  for (auto it = out.samples.rbegin(); it != out.samples.rend(); ++it) {
    suffix = it == out.samples.rbegin() ? it->s_min : std::min(suffix, it->s_min);
    rev.emplace_back(it->t, suffix);
  }
  out.phi_minus.assign(rev.rbegin(), rev.rend());
  out.coarse_surjectivity = 0;
  return out;
}

}  // namespace cforge
