#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cforge/budget.hpp"
#include "cforge/coarse_check.hpp"
#include "cforge/metric.hpp"
#include "cforge/quasimorphism.hpp"

namespace cforge {

// A colored cover of a finite point set. Valid when the clusters cover the
// points, any two distinct clusters of the same color are at distance
// >= scale_r, and every cluster has diameter <= bound_D.
struct CoverColoring {
    std::vector<GroupElement> points;  // canonical order
    std::vector<std::pair<std::vector<GroupElement>, int>> clusters;  // (members, color)
    int scale_r = 1;
    int bound_D = 0;

    // Number of colors in use (largest color index + 1).
    int color_count() const;
};

enum class CoverViolationKind {
    Uncovered,          // a point belongs to no cluster
    StrayMember,        // a cluster member is not among the points
    BadColor,           // negative color index
    SameColorTooClose,  // two same-color clusters at distance < scale_r
    DiameterExceeded,   // a cluster (or component) wider than the bound
    TooManyParts,       // a decomposition with more parts than allowed
};

struct CoverViolation {
    CoverViolationKind kind;
    int cluster_a = -1;
    int cluster_b = -1;
    std::optional<GroupElement> witness_a;
    std::optional<GroupElement> witness_b;
    int value = 0;  // offending distance, diameter, or part count
};

struct CoverValidation {
    bool pass = false;
    std::vector<CoverViolation> violations;
};

CoverValidation validate_coloring(const CoverColoring& c, const ProperMetric& metric,
                                  const Budget& budget = Budget{});

// Explicit skeleton covers of lattice windows. For n = 1: alternating
// length-2r blocks on a 4r grid (2 colors, D = 2r). For n = 2: a
// vertex/edge/face decomposition on a 6r grid (3 colors, D = 8r) with
// vertex squares of half-width 2r (color 2), edge rectangles of thickness
// r (color 1), and the remaining face regions (color 0). Self-validates.
CoverColoring lattice_cover(int n, const Ball& window, int r, const Budget& budget = Budget{});

struct GreedyCoverResult {
    bool success = false;  // best color count within max_colors
    CoverColoring cover;   // best cover found, kept even on failure
    int colors = 0;
    std::string strategy;  // winning candidate family
};

// Best-of search over deterministic candidate covers: the skeleton pattern
// and axis slabs (lattices), grid cells of pitch 2r (lattices), and
// BFS-ball clustering of radius D_budget/2 with ten seed orderings (any
// group). Clusters too close for their color are separated by greedy
// conflict coloring (descending degree, then construction order). Returns
// failure - not an error - when every candidate needs more than max_colors.
GreedyCoverResult greedy_cover(const std::vector<GroupElement>& points,
                               const ProperMetric& metric, int r, int max_colors, int D_budget,
                               std::uint64_t seed = 0, const Budget& budget = Budget{});

struct UniformProfile {
    bool success = false;
    int D = 0;       // one bound valid for every member coloring
    int colors = 0;  // largest member color count
    std::vector<CoverColoring> colorings;
    std::optional<std::size_t> failed_member;
};

// One greedy coloring per family member at a shared scale; D is the
// largest member bound, so every stored coloring is D-bounded.
UniformProfile uniform_profile(const std::vector<std::vector<GroupElement>>& family,
                               const ProperMetric& metric, int r, int max_colors, int D_budget,
                               std::uint64_t seed = 0, const Budget& budget = Budget{});

struct ControlProfileEntry {
    int r = 0;
    int D = 0;
    int colors = 0;
    std::vector<CoverColoring> colorings;  // validated witnesses, one per member
};

struct ControlProfile {
    std::vector<ControlProfileEntry> entries;  // ascending scale
    bool family_uniform = false;               // every member colored at every scale
};

// Scale sweep of uniform_profile with D budget 8r per scale.
ControlProfile control_profile(const std::vector<std::vector<GroupElement>>& family,
                               const ProperMetric& metric, const std::vector<int>& scales,
                               int max_colors, std::uint64_t seed = 0,
                               const Budget& budget = Budget{});

struct MapControlReport {
    bool pass = false;
    bool precondition_ok = false;  // diam f(A) <= R_Y
    int image_diameter = 0;
    int parts = 0;
    int D_f_observed = 0;  // largest r_X-component diameter seen
    std::vector<CoverViolation> violations;
};

// Checks that the decomposition expresses A as at most max_parts sets
// whose r_X-components are all D_f_bound-bounded, under the precondition
// that f(A) has diameter at most R_Y.
MapControlReport map_control_check(const Quasimorphism& f, const std::vector<GroupElement>& A,
                                   int r_X, int R_Y,
                                   const std::vector<std::vector<GroupElement>>& decomposition,
                                   int max_parts, int D_f_bound,
                                   const ProperMetric& domain_metric,
                                   const ProperMetric& codomain_metric,
                                   const Budget& budget = Budget{});

struct MapControlProfile {
    // (r_X, R_Y) -> observed D_f, realized by the stored decomposition.
    std::map<std::pair<int, int>, int> entries;
    std::map<std::pair<int, int>, std::vector<std::vector<GroupElement>>> decompositions;
    std::vector<std::pair<int, int>> skipped;  // precondition or search failure
};

// Builds decompositions by greedy covering at the doubled scale 2*r_X
// (same-color clusters are then 2*r_X-separated, so r_X-components stay
// inside single clusters) and records the observed D_f per entry.
MapControlProfile map_control_profile(const Quasimorphism& f, const std::vector<GroupElement>& A,
                                      const std::vector<std::pair<int, int>>& requests,
                                      int max_parts, int D_budget,
                                      const ProperMetric& domain_metric,
                                      const ProperMetric& codomain_metric,
                                      std::uint64_t seed = 0, const Budget& budget = Budget{});

struct PullbackResult {
    bool pass = false;
    CoverColoring cover;
    std::vector<CoverViolation> violations;  // nonempty signals scale_r of cover_Y too small
    int y_colors = 0;
    int fiber_colors = 0;  // k+1: largest fiber coloring color count
};

// Transports cover_Y through f: pieces are the fiber_scale-components of
// the color-parts of f^-1(U) for each cluster U of cover_Y, colored by
// (color of U, fiber color). Requires cover_Y.scale_r >= s_obs(fiber_scale).
// The result uses at most y_colors * fiber_colors colors.
PullbackResult pullback_assembly(const TheoremInstance& inst, const CoverColoring& cover_Y,
                                 int fiber_scale, std::uint64_t seed = 0,
                                 const Budget& budget = Budget{});

struct HurewiczScaleRow {
    int r = 0;
    int colors_X = 0, colors_Y = 0, colors_K = 0;
    int D_X = 0, D_Y = 0, D_K = 0;
    bool inequality_holds = false;  // colors_X <= colors_Y + colors_K - 1
    bool lipschitz_pass = false;
    bool containment_pass = false;
    bool absorption_pass = false;
    int C_obs = 0;
    int pullback_colors = 0;
    int pullback_D = 0;
    int pullback_scale_Y = 0;  // cover scale used for the transported cover
    bool pullback_valid = false;
};

struct HurewiczReport {
    std::string instance_name;
    int window_radius = 0;
    // All three color counts use the same scale r; this is a recorded
    // convention, not something the underlying statement prescribes.
    std::string scale_policy = "equal scale r for domain, codomain, and kernel windows";
    std::vector<HurewiczScaleRow> rows;
    bool all_rows_pass = false;
};

// For each scale r: greedy color counts on the domain window, the codomain
// window, and the kernel window (D budget 8r each), the color-count
// inequality colors_X <= colors_Y + colors_K - 1, the per-scale sanity
// checks (displacement scan, containment, absorption), and a transported
// cover as the weaker y_colors * fiber_colors witness. A violated
// inequality is reported as evidence against the search quality, never
// asserted as an exception.
HurewiczReport hurewicz_report(const TheoremInstance& inst, const std::vector<int>& scales,
                               std::uint64_t seed = 0, const Budget& budget = Budget{});

}  // namespace cforge
