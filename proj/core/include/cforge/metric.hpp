#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "cforge/budget.hpp"
#include "cforge/group.hpp"

namespace cforge {

// Closed ball in a word metric.  Members are sorted by (distance, canonical
// order) and carry their distance to the center.
struct Ball {
  GroupDescriptor group;
  GroupElement center;
  int radius = 0;
  std::vector<std::pair<GroupElement, int>> members;

  bool contains(const GroupElement& g) const;
  std::optional<int> distance_to_center(const GroupElement& g) const;
  std::vector<GroupElement> elements() const;  // canonical order
  size_t size() const { return members.size(); }

 private:
  friend class ProperMetric;
  // members sorted by element, for binary-search lookups
  std::vector<std::pair<GroupElement, int>> by_element_;
};

// Word metric for a symmetric finite generating set.  Free and lattice norms
// on the standard generators use closed forms, products split into factors,
// everything else runs a breadth-first search from the identity which is
// memoized in a grow-only table shared by all copies of the metric.
class ProperMetric {
 public:
  static ProperMetric word_metric(const GroupDescriptor& G);
  static ProperMetric word_metric(const GroupDescriptor& G, std::vector<GroupElement> generators);

  const GroupDescriptor& group() const { return G_; }
  const std::vector<GroupElement>& generators() const { return gens_; }
  bool standard_generators() const { return standard_; }

  int norm(const GroupElement& g, const Budget& budget = {}) const;
  int distance(const GroupElement& g, const GroupElement& h, const Budget& budget = {}) const;
  Ball ball(const GroupElement& center, int radius, const Budget& budget = {}) const;

 private:
  ProperMetric() = default;

  struct Bfs {
    std::map<GroupElement, int, ElementLess> norms;
    std::vector<std::vector<GroupElement>> layers;
    int completed_radius = -1;
    long long total = 0;
    std::mutex mu;
  };

  void extend_locked(Bfs& bfs, int radius, const Budget& budget) const;
  std::optional<int> closed_norm(const GroupElement& g, const Budget& budget) const;

  GroupDescriptor G_;
  std::vector<GroupElement> gens_;
  bool standard_ = true;
  std::vector<ProperMetric> factors_;  // product with standard generators
  std::shared_ptr<Bfs> bfs_ = std::make_shared<Bfs>();
};

// Blocks of the partition of `points` into r-chain components (steps of word
// distance <= r).  Blocks and their members are in canonical order.
std::vector<std::vector<GroupElement>> r_components(const ProperMetric& M,
                                                    const std::vector<GroupElement>& points,
                                                    int r, const Budget& budget = {});

// Open R-neighborhood of A inside the window: { x in window : d(x, A) < R }.
std::vector<GroupElement> neighborhood(const ProperMetric& M, const std::vector<GroupElement>& A,
                                       int R, const Ball& window, const Budget& budget = {});

struct LipschitzProfile {
  struct Sample {
    int t = 0;
    int s_max = 0;
    std::pair<GroupElement, GroupElement> witness_max;
    int s_min = 0;
    std::pair<GroupElement, GroupElement> witness_min;
  };
  std::vector<Sample> samples;                // ascending in t, observed t only
  std::vector<std::pair<int, int>> phi_plus;  // nondecreasing upper envelope
  std::vector<std::pair<int, int>> phi_minus; // nondecreasing lower envelope
  std::optional<int> coarse_surjectivity;
};

// Exhaustive two-sided comparison of two word metrics on the same group over
// one window of points.
LipschitzProfile metric_compare(const ProperMetric& M1, const ProperMetric& M2,
                                const std::vector<GroupElement>& window,
                                const Budget& budget = {});

}  // namespace cforge
