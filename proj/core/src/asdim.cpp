#include "cforge/asdim.hpp"

#include <algorithm>
#include <climits>
#include <random>
#include <set>
#include <stdexcept>
#include <tuple>

namespace cforge {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

long long floordiv(long long a, long long b) {
    long long q = a / b;
    long long rem = a % b;
    if (rem != 0 && ((rem < 0) != (b < 0))) --q;
    return q;
}

// rank when the metric is the standard-generator word metric on a lattice
// (distances are closed-form l1, so box reasoning applies); 0 otherwise
int standard_lattice_rank(const ProperMetric& M) {
    if (M.group().kind() == GroupKind::Lattice && M.standard_generators()) return M.group().rank();
    return 0;
}

struct DiameterResult {
    int value = 0;
    std::optional<std::pair<GroupElement, GroupElement>> witness;
};

// Largest pairwise distance. l1 diameter equals the best coordinate-sign
// combination's range, so standard lattice sets need only 2^(rank-1)
// linear sweeps instead of a pair scan.
DiameterResult set_diameter(const ProperMetric& M, const std::vector<GroupElement>& pts,
                            const Budget& budget) {
    DiameterResult out;
    if (pts.size() < 2) return out;
    int rank = standard_lattice_rank(M);
    if (rank >= 1 && rank <= 7) {
        for (std::uint64_t mask = 0; mask < (1ull << (rank - 1)); ++mask) {
            long long lo = LLONG_MAX, hi = LLONG_MIN;
            std::size_t arg_lo = 0, arg_hi = 0;
            for (std::size_t idx = 0; idx < pts.size(); ++idx) {
                const auto& c = pts[idx].as_lattice().coords;
                long long v = c[0];
                for (int i = 1; i < rank; ++i) v += ((mask >> (i - 1)) & 1 ? -1 : 1) * c[i];
                if (v < lo) {
                    lo = v;
                    arg_lo = idx;
                }
                if (v > hi) {
                    hi = v;
                    arg_hi = idx;
                }
            }
            if (hi - lo > out.value) {
                out.value = static_cast<int>(hi - lo);
                out.witness = std::make_pair(pts[arg_lo], pts[arg_hi]);
            }
        }
        return out;
    }
    long long pairs = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            charge_pairs(budget, ++pairs, "cover diameter scan");
            int d = M.distance(pts[i], pts[j], budget);
            if (d > out.value) {
                out.value = d;
                out.witness = std::make_pair(pts[i], pts[j]);
            }
        }
    }
    return out;
}

struct BoxBounds {
    std::vector<long long> lo, hi;
};

BoxBounds box_of(const std::vector<GroupElement>& pts, int rank) {
    BoxBounds b;
    b.lo.assign(static_cast<std::size_t>(rank), LLONG_MAX);
    b.hi.assign(static_cast<std::size_t>(rank), LLONG_MIN);
    for (const GroupElement& p : pts) {
        const auto& c = p.as_lattice().coords;
        for (int i = 0; i < rank; ++i) {
            b.lo[i] = std::min(b.lo[i], static_cast<long long>(c[i]));
            b.hi[i] = std::max(b.hi[i], static_cast<long long>(c[i]));
        }
    }
    return b;
}

// l1 lower bound between two boxes: sum of per-axis gaps
long long box_gap(const BoxBounds& a, const BoxBounds& b) {
    long long gap = 0;
    for (std::size_t i = 0; i < a.lo.size(); ++i) {
        if (b.lo[i] > a.hi[i])
            gap += b.lo[i] - a.hi[i];
        else if (a.lo[i] > b.hi[i])
            gap += a.lo[i] - b.hi[i];
    }
    return gap;
}

struct ClosePair {
    GroupElement a, b;
    int d = 0;
};

// First pair (in canonical scan order) at distance < threshold, if any.
// A bounding-box lower bound skips the scan entirely for well-separated
// lattice clusters.
std::optional<ClosePair> min_distance_below(const ProperMetric& M,
                                            const std::vector<GroupElement>& A,
                                            const std::vector<GroupElement>& B, int threshold,
                                            const Budget& budget) {
    if (A.empty() || B.empty() || threshold <= 0) return std::nullopt;
    int rank = standard_lattice_rank(M);
    if (rank >= 1 && box_gap(box_of(A, rank), box_of(B, rank)) >= threshold) return std::nullopt;
    long long pairs = 0;
    for (const GroupElement& a : A) {
        for (const GroupElement& b : B) {
            charge_pairs(budget, ++pairs, "cover separation scan");
            int d = M.distance(a, b, budget);
            if (d < threshold) return ClosePair{a, b, d};
        }
    }
    return std::nullopt;
}

using SkeletonKey = std::tuple<int, long long, long long>;  // (region tag, grid a, grid b)
using SkeletonMap = std::map<SkeletonKey, std::pair<std::vector<GroupElement>, int>>;

// Assigns each point of a rank-1 or rank-2 lattice set to a cluster of the
// periodic skeleton pattern at scale r.
//
// Rank 1: alternating length-2r blocks on a 4r grid; colors 0/1; same-color
// blocks are 2r+1 apart; diameter at most 2r.
//
// Rank 2: on a 6r grid, vertex squares of half-width 2r (color 2), edge
// rectangles of thickness r between consecutive vertices (color 1), and the
// remaining face regions (color 0). Same-color regions are at least 2r
// apart and every region has l1 diameter at most 8r.
SkeletonMap skeleton_classify(const std::vector<GroupElement>& points, int rank, int r) {
    SkeletonMap clusters;
    for (const GroupElement& p : points) {
        const auto& c = p.as_lattice().coords;
        if (rank == 1) {
            long long q = floordiv(c[0], 4 * r);
            int color = (c[0] - 4 * r * q < 2 * r) ? 0 : 1;
            auto& slot = clusters[{color, q, 0}];
            slot.first.push_back(p);
            slot.second = color;
            continue;
        }
        long long ix = floordiv(c[0] + 3 * r, 6 * r), iy = floordiv(c[1] + 3 * r, 6 * r);
        long long dx = c[0] - 6 * r * ix, dy = c[1] - 6 * r * iy;
        bool near_x = std::llabs(dx) <= 2 * r, near_y = std::llabs(dy) <= 2 * r;
        SkeletonKey key;
        int color;
        if (near_x && near_y) {
            key = {0, ix, iy};
            color = 2;
        } else if (!near_x && std::llabs(dy) <= r) {
            key = {1, floordiv(c[0] - 2 * r - 1, 6 * r), iy};
            color = 1;
        } else if (!near_y && std::llabs(dx) <= r) {
            key = {2, ix, floordiv(c[1] - 2 * r - 1, 6 * r)};
            color = 1;
        } else {
            key = {3, floordiv(c[0] - r - 1, 6 * r), floordiv(c[1] - r - 1, 6 * r)};
            color = 0;
        }
        auto& slot = clusters[key];
        slot.first.push_back(p);
        slot.second = color;
    }
    return clusters;
}

// Renumbers colors to a dense 0..k range preserving relative order.
void compress_colors(std::vector<int>& colors) {
    std::set<int> used(colors.begin(), colors.end());
    std::map<int, int> remap;
    int next = 0;
    for (int c : used) remap[c] = next++;
    for (int& c : colors) c = remap[c];
}

// Greedy conflict coloring: clusters at distance < r must differ; vertices
// are colored in descending degree (construction order breaking ties) with
// the smallest free color.
std::vector<int> conflict_color(const std::vector<std::vector<GroupElement>>& clusters,
                                const ProperMetric& M, int r, const Budget& budget) {
    std::size_t n = clusters.size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (min_distance_below(M, clusters[i], clusters[j], r, budget)) {
                adj[i].push_back(j);
                adj[j].push_back(i);
            }
        }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (adj[a].size() != adj[b].size()) return adj[a].size() > adj[b].size();
        return a < b;
    });
    std::vector<int> colors(n, -1);
    for (std::size_t v : order) {
        std::set<int> used;
        for (std::size_t w : adj[v])
            if (colors[w] >= 0) used.insert(colors[w]);
        int c = 0;
        while (used.count(c)) ++c;
        colors[v] = c;
    }
    return colors;
}

// Merges conflicting cluster pairs whose union still fits the diameter
// budget. Runs to a fixpoint for small collections, one sweep otherwise.
void merge_clusters(std::vector<std::vector<GroupElement>>& clusters, const ProperMetric& M,
                    int r, int D_budget, const Budget& budget) {
    bool fixpoint = clusters.size() <= 64;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            for (std::size_t j = i + 1; j < clusters.size();) {
                bool merged = false;
                if (min_distance_below(M, clusters[i], clusters[j], r, budget)) {
                    std::vector<GroupElement> joined;
                    joined.reserve(clusters[i].size() + clusters[j].size());
                    std::merge(clusters[i].begin(), clusters[i].end(), clusters[j].begin(),
                               clusters[j].end(), std::back_inserter(joined), ElementLess{});
                    if (set_diameter(M, joined, budget).value <= D_budget) {
                        clusters[i] = std::move(joined);
                        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(j));
                        merged = true;
                        changed = true;
                    }
                }
                if (!merged) ++j;
            }
        }
        if (!fixpoint) break;
    }
}

// Clusters = balls of the given radius around seed points taken in the
// requested order; every point joins the first ball that reaches it.
std::vector<std::vector<GroupElement>> ball_clusters(const std::vector<GroupElement>& points,
                                                     const ProperMetric& M, int radius,
                                                     const std::vector<std::size_t>& ordering,
                                                     const Budget& budget) {
    std::vector<bool> assigned(points.size(), false);
    std::vector<std::vector<GroupElement>> clusters;
    long long pairs = 0;
    for (std::size_t seed : ordering) {
        if (assigned[seed]) continue;
        std::vector<GroupElement> cluster;
        for (std::size_t q = 0; q < points.size(); ++q) {
            if (assigned[q]) continue;
            charge_pairs(budget, ++pairs, "ball clustering scan");
            if (M.distance(points[seed], points[q], budget) <= radius) {
                assigned[q] = true;
                cluster.push_back(points[q]);
            }
        }
        clusters.push_back(std::move(cluster));
    }
    return clusters;
}

struct ScoredCover {
    int colors = 0;
    int D = 0;
    std::size_t index = 0;
    std::string name;
    CoverColoring cover;
};

}  // namespace

int CoverColoring::color_count() const {
    int top = -1;
    for (const auto& [members, color] : clusters) top = std::max(top, color);
    return top + 1;
}

CoverValidation validate_coloring(const CoverColoring& c, const ProperMetric& metric,
                                  const Budget& budget) {
    if (c.scale_r < 1) bad("cover scale must be at least 1");
    if (c.bound_D < 0) bad("cover diameter bound must be nonnegative");
    CoverValidation out;
    std::set<GroupElement, ElementLess> point_set(c.points.begin(), c.points.end());
    std::set<GroupElement, ElementLess> covered;

    for (std::size_t i = 0; i < c.clusters.size(); ++i) {
        const auto& [members, color] = c.clusters[i];
        if (color < 0) {
            CoverViolation v{CoverViolationKind::BadColor, static_cast<int>(i), -1, {}, {}, color};
            out.violations.push_back(std::move(v));
        }
        for (const GroupElement& m : members) {
            if (point_set.count(m) == 0) {
                CoverViolation v{CoverViolationKind::StrayMember, static_cast<int>(i), -1, m, {}, 0};
                out.violations.push_back(std::move(v));
                break;
            }
        }
        covered.insert(members.begin(), members.end());
        DiameterResult diam = set_diameter(metric, members, budget);
        if (diam.value > c.bound_D) {
            CoverViolation v{CoverViolationKind::DiameterExceeded, static_cast<int>(i), -1,
                             diam.witness->first, diam.witness->second, diam.value};
            out.violations.push_back(std::move(v));
        }
    }

    for (const GroupElement& p : c.points) {
        if (covered.count(p) == 0) {
            CoverViolation v{CoverViolationKind::Uncovered, -1, -1, p, {}, 0};
            out.violations.push_back(std::move(v));
        }
    }

    for (std::size_t i = 0; i < c.clusters.size(); ++i) {
        for (std::size_t j = i + 1; j < c.clusters.size(); ++j) {
            if (c.clusters[i].second != c.clusters[j].second) continue;
            auto close = min_distance_below(metric, c.clusters[i].first, c.clusters[j].first,
                                            c.scale_r, budget);
            if (close) {
                CoverViolation v{CoverViolationKind::SameColorTooClose, static_cast<int>(i),
                                 static_cast<int>(j), close->a, close->b, close->d};
                out.violations.push_back(std::move(v));
            }
        }
    }

    out.pass = out.violations.empty();
    return out;
}

CoverColoring lattice_cover(int n, const Ball& window, int r, const Budget& budget) {
    if (n != 1 && n != 2) bad("lattice_cover handles ranks 1 and 2");
    if (r < 1) bad("cover scale must be at least 1");
    if (window.group.kind() != GroupKind::Lattice || window.group.rank() != n)
        bad("window group must be the rank-n lattice");

    CoverColoring cover;
    cover.points = window.elements();
    cover.scale_r = r;
    cover.bound_D = (n == 1) ? 2 * r : 8 * r;
    for (auto& [key, slot] : skeleton_classify(cover.points, n, r))
        cover.clusters.emplace_back(std::move(slot.first), slot.second);

    ProperMetric M = ProperMetric::word_metric(window.group);
    CoverValidation check = validate_coloring(cover, M, budget);
    if (!check.pass) throw std::logic_error("lattice_cover produced an invalid cover");
    return cover;
}

GreedyCoverResult greedy_cover(const std::vector<GroupElement>& points, const ProperMetric& metric,
                               int r, int max_colors, int D_budget, std::uint64_t seed,
                               const Budget& budget) {
    if (r < 1) bad("cover scale must be at least 1");
    if (max_colors < 1) bad("max_colors must be at least 1");
    if (D_budget < 0) bad("diameter budget must be nonnegative");

    std::vector<GroupElement> pts = points;
    std::sort(pts.begin(), pts.end(), ElementLess{});
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const GroupElement& a, const GroupElement& b) {
                              return element_compare(a, b) == 0;
                          }),
              pts.end());

    GreedyCoverResult result;
    result.cover.points = pts;
    result.cover.scale_r = r;
    if (pts.empty()) {
        result.success = true;
        result.strategy = "empty";
        return result;
    }

    int rank = standard_lattice_rank(metric);
    std::optional<ScoredCover> best;
    std::size_t index = 0;

    auto consider = [&](const std::string& name, std::vector<std::vector<GroupElement>> clusters,
                        std::vector<int> colors, bool merge) {
        std::size_t my_index = index++;
        if (merge) merge_clusters(clusters, metric, r, D_budget, budget);
        int D_obs = 0;
        for (const auto& cl : clusters) {
            int d = set_diameter(metric, cl, budget).value;
            D_obs = std::max(D_obs, d);
            if (D_obs > D_budget) return;  // candidate does not fit the budget
        }
        if (colors.empty()) colors = conflict_color(clusters, metric, r, budget);
        compress_colors(colors);
        int color_cnt = *std::max_element(colors.begin(), colors.end()) + 1;
        if (best && std::tie(best->colors, best->D, best->index) <=
                        std::tie(color_cnt, D_obs, my_index))
            return;
        ScoredCover sc;
        sc.colors = color_cnt;
        sc.D = D_obs;
        sc.index = my_index;
        sc.name = name;
        sc.cover.points = pts;
        sc.cover.scale_r = r;
        sc.cover.bound_D = D_obs;
        for (std::size_t i = 0; i < clusters.size(); ++i)
            sc.cover.clusters.emplace_back(std::move(clusters[i]), colors[i]);
        best = std::move(sc);
    };

    if (rank == 1 || rank == 2) {
        std::vector<std::vector<GroupElement>> clusters;
        std::vector<int> colors;
        for (auto& [key, slot] : skeleton_classify(pts, rank, r)) {
            clusters.push_back(std::move(slot.first));
            colors.push_back(slot.second);
        }
        consider("skeleton", std::move(clusters), std::move(colors), false);
    }

    if (rank >= 2) {
        for (int axis = 0; axis < rank; ++axis) {
            std::map<std::pair<long long, int>, std::vector<GroupElement>> slabs;
            for (const GroupElement& p : pts) {
                long long x = p.as_lattice().coords[static_cast<std::size_t>(axis)];
                long long q = floordiv(x, 4 * r);
                int color = (x - 4 * r * q < 2 * r) ? 0 : 1;
                slabs[{q, color}].push_back(p);
            }
            std::vector<std::vector<GroupElement>> clusters;
            std::vector<int> colors;
            for (auto& [key, members] : slabs) {
                clusters.push_back(std::move(members));
                colors.push_back(key.second);
            }
            consider("axis-slabs:" + std::to_string(axis), std::move(clusters), std::move(colors),
                     false);
        }
    }

    if (rank >= 1) {
        std::map<std::vector<long long>, std::vector<GroupElement>> cells;
        for (const GroupElement& p : pts) {
            const auto& c = p.as_lattice().coords;
            std::vector<long long> key;
            key.reserve(c.size());
            for (long long x : c) key.push_back(floordiv(x, 2 * r));
            cells[key].push_back(p);
        }
        std::vector<std::vector<GroupElement>> clusters;
        for (auto& [key, members] : cells) clusters.push_back(std::move(members));
        consider("grid", std::move(clusters), {}, false);
    }

    std::vector<std::size_t> by_norm(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) by_norm[i] = i;
    {
        std::vector<int> norms(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) norms[i] = metric.norm(pts[i], budget);
        std::sort(by_norm.begin(), by_norm.end(), [&](std::size_t a, std::size_t b) {
            if (norms[a] != norms[b]) return norms[a] < norms[b];
            return a < b;
        });
    }
    int radius = D_budget / 2;
    for (int o = 0; o < 10; ++o) {
        std::vector<std::size_t> ordering;
        if (o == 0) {
            ordering = by_norm;
        } else {
            ordering.resize(pts.size());
            for (std::size_t i = 0; i < pts.size(); ++i) ordering[i] = i;
            std::mt19937_64 rng(seed * 16 + static_cast<std::uint64_t>(o));
            for (std::size_t i = pts.size(); i > 1; --i)
                std::swap(ordering[i - 1], ordering[rng() % i]);
        }
        consider("balls:" + std::to_string(o),
                 ball_clusters(pts, metric, radius, ordering, budget), {}, true);
    }

    // ball clusters have diameter at most 2*(D_budget/2), so at least one
    // candidate always fits the budget
    if (!best) throw std::logic_error("greedy_cover found no candidate within the budget");

    CoverValidation check = validate_coloring(best->cover, metric, budget);
    if (!check.pass) throw std::logic_error("greedy_cover produced an invalid cover");

    result.cover = std::move(best->cover);
    result.colors = best->colors;
    result.strategy = best->name;
    result.success = best->colors <= max_colors;
    return result;
}

UniformProfile uniform_profile(const std::vector<std::vector<GroupElement>>& family,
                               const ProperMetric& metric, int r, int max_colors, int D_budget,
                               std::uint64_t seed, const Budget& budget) {
    UniformProfile out;
    out.success = true;
    for (std::size_t i = 0; i < family.size(); ++i) {
        GreedyCoverResult g = greedy_cover(family[i], metric, r, max_colors, D_budget, seed, budget);
        out.D = std::max(out.D, g.cover.bound_D);
        out.colors = std::max(out.colors, g.colors);
        out.colorings.push_back(std::move(g.cover));
        if (!g.success && out.success) {
            out.success = false;
            out.failed_member = i;
        }
    }
    return out;
}

ControlProfile control_profile(const std::vector<std::vector<GroupElement>>& family,
                               const ProperMetric& metric, const std::vector<int>& scales,
                               int max_colors, std::uint64_t seed, const Budget& budget) {
    std::vector<int> rs = scales;
    std::sort(rs.begin(), rs.end());
    rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
    ControlProfile out;
    out.family_uniform = true;
    for (int r : rs) {
        UniformProfile prof = uniform_profile(family, metric, r, max_colors, 8 * r, seed, budget);
        out.family_uniform = out.family_uniform && prof.success;
        ControlProfileEntry entry;
        entry.r = r;
        entry.D = prof.D;
        entry.colors = prof.colors;
        entry.colorings = std::move(prof.colorings);
        out.entries.push_back(std::move(entry));
    }
    return out;
}

MapControlReport map_control_check(const Quasimorphism& f, const std::vector<GroupElement>& A,
                                   int r_X, int R_Y,
                                   const std::vector<std::vector<GroupElement>>& decomposition,
                                   int max_parts, int D_f_bound,
                                   const ProperMetric& domain_metric,
                                   const ProperMetric& codomain_metric, const Budget& budget) {
    if (r_X < 1) bad("domain scale must be at least 1");
    if (R_Y < 0) bad("image diameter cap must be nonnegative");
    if (max_parts < 1) bad("max_parts must be at least 1");
    if (D_f_bound < 0) bad("component diameter bound must be nonnegative");

    MapControlReport rep;
    std::set<GroupElement, ElementLess> images;
    for (const GroupElement& a : A) images.insert(f.eval(a));
    std::vector<GroupElement> image_list(images.begin(), images.end());
    rep.image_diameter = set_diameter(codomain_metric, image_list, budget).value;
    rep.precondition_ok = rep.image_diameter <= R_Y;

    rep.parts = static_cast<int>(decomposition.size());
    if (rep.parts > max_parts) {
        CoverViolation v{CoverViolationKind::TooManyParts, -1, -1, {}, {}, rep.parts};
        rep.violations.push_back(std::move(v));
    }

    std::set<GroupElement, ElementLess> a_set(A.begin(), A.end());
    std::set<GroupElement, ElementLess> covered;
    for (std::size_t pi = 0; pi < decomposition.size(); ++pi) {
        const std::vector<GroupElement>& part = decomposition[pi];
        for (const GroupElement& m : part) {
            if (a_set.count(m) == 0) {
                CoverViolation v{CoverViolationKind::StrayMember, static_cast<int>(pi), -1, m, {},
                                 0};
                rep.violations.push_back(std::move(v));
                break;
            }
        }
        covered.insert(part.begin(), part.end());
        for (const std::vector<GroupElement>& comp : r_components(domain_metric, part, r_X, budget)) {
            DiameterResult d = set_diameter(domain_metric, comp, budget);
            rep.D_f_observed = std::max(rep.D_f_observed, d.value);
            if (d.value > D_f_bound) {
                CoverViolation v{CoverViolationKind::DiameterExceeded, static_cast<int>(pi), -1,
                                 d.witness->first, d.witness->second, d.value};
                rep.violations.push_back(std::move(v));
            }
        }
    }
    for (const GroupElement& a : A) {
        if (covered.count(a) == 0) {
            CoverViolation v{CoverViolationKind::Uncovered, -1, -1, a, {}, 0};
            rep.violations.push_back(std::move(v));
        }
    }

    rep.pass = rep.precondition_ok && rep.violations.empty();
    return rep;
}

MapControlProfile map_control_profile(const Quasimorphism& f, const std::vector<GroupElement>& A,
                                      const std::vector<std::pair<int, int>>& requests,
                                      int max_parts, int D_budget,
                                      const ProperMetric& domain_metric,
                                      const ProperMetric& codomain_metric, std::uint64_t seed,
                                      const Budget& budget) {
    MapControlProfile profile;
    for (const auto& request : requests) {
        auto [r_X, R_Y] = request;
        // cover at the doubled scale: same-color clusters are then 2 r_X
        // apart, so r_X-chains cannot leave a cluster and every component
        // inherits the cluster diameter bound
        GreedyCoverResult g =
            greedy_cover(A, domain_metric, 2 * r_X, max_parts, D_budget, seed, budget);
        if (!g.success) {
            profile.skipped.push_back(request);
            continue;
        }
        std::vector<std::vector<GroupElement>> parts(
            static_cast<std::size_t>(g.cover.color_count()));
        for (const auto& [members, color] : g.cover.clusters) {
            auto& part = parts[static_cast<std::size_t>(color)];
            part.insert(part.end(), members.begin(), members.end());
        }
        for (auto& part : parts) std::sort(part.begin(), part.end(), ElementLess{});
        MapControlReport rep =
            map_control_check(f, A, r_X, R_Y, parts, max_parts, g.cover.bound_D, domain_metric,
                              codomain_metric, budget);
        if (!rep.pass) {
            profile.skipped.push_back(request);
            continue;
        }
        profile.entries[request] = rep.D_f_observed;
        profile.decompositions[request] = std::move(parts);
    }
    return profile;
}

namespace {

PullbackResult pullback_core(const TheoremInstance& inst, const CoverColoring& cover_Y,
                             int fiber_scale, int s_obs, std::uint64_t seed,
                             const Budget& budget) {
    if (cover_Y.scale_r < s_obs)
        bad("cover_Y scale is below the observed displacement at the fiber scale");

    const GroupDescriptor& G = inst.f.domain();
    Ball window = inst.domain_metric.ball(identity(G), inst.window_radius, budget);
    std::vector<GroupElement> elems = window.elements();
    std::vector<GroupElement> values;
    values.reserve(elems.size());
    for (const GroupElement& xi : elems) values.push_back(inst.f.eval(xi));

    // preimage of each codomain cluster, with its fiber coloring
    struct FiberPiece {
        std::vector<GroupElement> preimage;
        int y_color = 0;
        CoverColoring coloring;
    };
    std::vector<FiberPiece> pieces;
    int fiber_colors = 0;
    for (const auto& [members, y_color] : cover_Y.clusters) {
        std::set<GroupElement, ElementLess> target(members.begin(), members.end());
        FiberPiece piece;
        piece.y_color = y_color;
        for (std::size_t i = 0; i < elems.size(); ++i)
            if (target.count(values[i]) > 0) piece.preimage.push_back(elems[i]);
        if (piece.preimage.empty()) continue;
        GreedyCoverResult g = greedy_cover(piece.preimage, inst.domain_metric, fiber_scale, 16,
                                           8 * fiber_scale, seed, budget);
        if (!g.success)
            throw std::runtime_error("pullback fiber coloring needed more than 16 colors");
        fiber_colors = std::max(fiber_colors, g.colors);
        piece.coloring = std::move(g.cover);
        pieces.push_back(std::move(piece));
    }

    PullbackResult out;
    out.y_colors = cover_Y.color_count();
    out.fiber_colors = fiber_colors;
    out.cover.points = elems;
    out.cover.scale_r = fiber_scale;

    std::vector<int> colors;
    for (const FiberPiece& piece : pieces) {
        for (int cf = 0; cf < piece.coloring.color_count(); ++cf) {
            std::vector<GroupElement> part;
            for (const auto& [members, color] : piece.coloring.clusters)
                if (color == cf) part.insert(part.end(), members.begin(), members.end());
            std::sort(part.begin(), part.end(), ElementLess{});
            if (part.empty()) continue;
            for (auto& comp : r_components(inst.domain_metric, part, fiber_scale, budget)) {
                out.cover.bound_D = std::max(
                    out.cover.bound_D, set_diameter(inst.domain_metric, comp, budget).value);
                out.cover.clusters.emplace_back(std::move(comp), 0);
                colors.push_back(piece.y_color * fiber_colors + cf);
            }
        }
    }
    compress_colors(colors);
    for (std::size_t i = 0; i < colors.size(); ++i) out.cover.clusters[i].second = colors[i];

    CoverValidation check = validate_coloring(out.cover, inst.domain_metric, budget);
    out.pass = check.pass;
    out.violations = std::move(check.violations);
    return out;
}

}  // namespace

PullbackResult pullback_assembly(const TheoremInstance& inst, const CoverColoring& cover_Y,
                                 int fiber_scale, std::uint64_t seed, const Budget& budget) {
    if (fiber_scale < 1) bad("fiber scale must be at least 1");

    // observed displacement: how far f moves pairs at domain distance
    // <= fiber_scale within the window
    const GroupDescriptor& G = inst.f.domain();
    Ball window = inst.domain_metric.ball(identity(G), inst.window_radius, budget);
    std::vector<GroupElement> elems = window.elements();
    std::vector<GroupElement> values;
    values.reserve(elems.size());
    for (const GroupElement& xi : elems) values.push_back(inst.f.eval(xi));
    int s_obs = 0;
    long long pairs = 0;
    for (std::size_t i = 0; i < elems.size(); ++i) {
        for (std::size_t j = i + 1; j < elems.size(); ++j) {
            charge_pairs(budget, ++pairs, "pullback displacement scan");
            if (inst.domain_metric.distance(elems[i], elems[j], budget) > fiber_scale) continue;
            s_obs = std::max(s_obs, inst.codomain_metric.distance(values[i], values[j], budget));
        }
    }
    return pullback_core(inst, cover_Y, fiber_scale, s_obs, seed, budget);
}

HurewiczReport hurewicz_report(const TheoremInstance& inst, const std::vector<int>& scales,
                               std::uint64_t seed, const Budget& budget) {
    if (scales.empty()) bad("at least one scale is required");
    for (int s : scales)
        if (s < 1) bad("scales must be at least 1");
    std::vector<int> rs = scales;
    std::sort(rs.begin(), rs.end());
    rs.erase(std::unique(rs.begin(), rs.end()), rs.end());

    HurewiczReport rep;
    rep.instance_name = inst.name;
    rep.window_radius = inst.window_radius;

    const GroupDescriptor& G = inst.f.domain();
    const GroupDescriptor& H = inst.f.codomain();
    DefectReport defect = instance_defect(inst, budget);
    LipschitzScanReport lips = lipschitz_scan(inst, rs, defect, budget);
    std::vector<GroupElement> window_X =
        inst.domain_metric.ball(identity(G), inst.window_radius, budget).elements();
    std::vector<GroupElement> window_Y =
        inst.codomain_metric.ball(identity(H), inst.window_radius, budget).elements();
    std::vector<GroupElement> kernel = kernel_window(inst, defect, budget);

    rep.all_rows_pass = true;
    for (std::size_t si = 0; si < rs.size(); ++si) {
        int r = rs[si];
        TheoremInstance inst_r = inst;
        inst_r.scale_r = r;

        HurewiczScaleRow row;
        row.r = r;
        row.C_obs = defect.C;
        row.lipschitz_pass = lips.samples[si].pass;
        row.containment_pass = containment_almost(inst_r, defect, budget).pass;
        row.absorption_pass = r_neighborhood_absorption(inst_r, defect, budget).pass;

        GreedyCoverResult gx = greedy_cover(window_X, inst.domain_metric, r, 16, 8 * r, seed, budget);
        GreedyCoverResult gy =
            greedy_cover(window_Y, inst.codomain_metric, r, 16, 8 * r, seed, budget);
        GreedyCoverResult gk = greedy_cover(kernel, inst.domain_metric, r, 16, 8 * r, seed, budget);
        row.colors_X = gx.colors;
        row.colors_Y = gy.colors;
        row.colors_K = gk.colors;
        row.D_X = gx.cover.bound_D;
        row.D_Y = gy.cover.bound_D;
        row.D_K = gk.cover.bound_D;
        row.inequality_holds = row.colors_X <= row.colors_Y + row.colors_K - 1;

        int s_obs = lips.samples[si].s_obs;
        row.pullback_scale_Y = std::max(r, s_obs);
        PullbackResult pb;
        if (s_obs <= r) {
            pb = pullback_core(inst_r, gy.cover, r, s_obs, seed, budget);
        } else {
            GreedyCoverResult wide = greedy_cover(window_Y, inst.codomain_metric, s_obs, 16,
                                                  8 * s_obs, seed, budget);
            pb = pullback_core(inst_r, wide.cover, r, s_obs, seed, budget);
        }
        row.pullback_colors = pb.cover.color_count();
        row.pullback_D = pb.cover.bound_D;
        row.pullback_valid = pb.pass;

        rep.all_rows_pass = rep.all_rows_pass && row.inequality_holds && row.lipschitz_pass &&
                            row.containment_pass && row.absorption_pass && row.pullback_valid &&
                            gx.success && gy.success && gk.success;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

}  // namespace cforge
