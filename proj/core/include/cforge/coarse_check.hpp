#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cforge/approx.hpp"
#include "cforge/budget.hpp"
#include "cforge/group.hpp"
#include "cforge/metric.hpp"
#include "cforge/quasimorphism.hpp"

namespace cforge {

// A quasimorphism into the enveloping group of an approximate group,
// together with the metrics and the finite windows everything is checked
// on.  Containments compare a left side drawn from the window of radius
// `window_radius` against right-hand data computed out to four times that
// radius, so truncation never manufactures failures.
struct TheoremInstance {
    std::string name;
    Quasimorphism f;
    ApproximateGroup lambda;  // image-side approximate group, with predicate
    ProperMetric domain_metric;
    ProperMetric codomain_metric;
    int window_radius = 0;
    int scale_r = 1;
};

// Validates shapes and the sanity condition: every f-image of the window
// satisfies the image-side membership predicate.
TheoremInstance make_instance(std::string name, Quasimorphism f, ApproximateGroup lambda,
                              int window_radius, int scale_r, const Budget& budget = Budget{});

// Named example instances: "hom-z2", "floordiv-z", "floordiv-z2",
// "brooks-ab", "rolli-sign".
TheoremInstance bundled_instance(const std::string& name, int window_radius, int scale_r,
                                 const Budget& budget = Budget{});
const std::vector<std::string>& bundled_instance_names();

// One tested displacement scale.  s_obs is the largest image distance
// over window pairs at domain distance <= t; S_t the largest image norm
// over the ball of radius t; the chain bound is 3*C_obs + S_t.
struct LipschitzSample {
    int t = 0;
    int s_obs = 0;
    int S_t = 0;
    int bound = 0;
    bool pass = false;
    // Pair attaining s_obs (absent when no pair is within distance t).
    std::optional<std::pair<GroupElement, GroupElement>> witness;
};

struct LipschitzScanReport {
    int C_obs = 0;
    bool pass = false;  // every sample within its bound
    std::vector<LipschitzSample> samples;
};

LipschitzScanReport lipschitz_scan(const TheoremInstance& inst, const std::vector<int>& t_values,
                                   const Budget& budget = Budget{});

// Observed defect of the instance at its window radius: the pair scan
// shared by the displacement scan, containment, kernel extraction, and
// absorption. Callers running several checks on one instance can compute
// it once and pass it to the overloads below.
DefectReport instance_defect(const TheoremInstance& inst, const Budget& budget = Budget{});

LipschitzScanReport lipschitz_scan(const TheoremInstance& inst, const std::vector<int>& t_values,
                                   const DefectReport& defect, const Budget& budget = Budget{});

// Largest distance between f(x) and f(x^-1)^-1 over the window; bounded
// by twice the observed defect constant.
struct SymmetryGapReport {
    int gap = 0;
    int C_obs = 0;
    bool pass = false;
    std::optional<GroupElement> witness;
};

SymmetryGapReport symmetry_gap(const TheoremInstance& inst, const Budget& budget = Budget{});

// The family { {xi in window : d'(f(xi), lambda) < r} : lambda in
// f(window) }, deduplicated; each distinct set is labeled with the
// canonically smallest lambda producing it.
std::vector<std::pair<GroupElement, std::vector<GroupElement>>> fiber_family(
    const TheoremInstance& inst, const Budget& budget = Budget{});

// For every lambda in f(window), checks that the lambda-fiber lies in
// xi_lambda * f^-1(T) where T = f(e) * D^-1 * (B'(e,r) cap windowed
// square of the image group) * D, with D observed at the window radius.
// Representatives xi_lambda have minimal norm, ties broken canonically.
struct ContainmentReport {
    bool pass = false;
    int window_radius = 0;
    int scale_r = 0;
    std::vector<GroupElement> target;  // T, canonical order
    std::map<GroupElement, GroupElement, ElementLess> representatives;  // lambda -> xi_lambda
    std::vector<std::pair<GroupElement, GroupElement>> failures;        // (lambda, xi)
    // Smallest radius whose observed defect set repairs all failures,
    // when one exists within twice the window radius.
    std::optional<int> repaired_window_radius;
};

ContainmentReport containment_almost(const TheoremInstance& inst, const Budget& budget = Budget{});

// Same, with the defect set precomputed at the window radius.
ContainmentReport containment_almost(const TheoremInstance& inst, const DefectReport& defect,
                                     const Budget& budget = Budget{});

// Same check with the defect set observed at an explicit radius; the
// diagnostic loop of containment_almost calls this at growing radii.
ContainmentReport containment_with_defect_radius(const TheoremInstance& inst, int defect_radius,
                                                 const Budget& budget = Budget{});

// K = { xi in window : f(xi) in f(e) * D^-1 * D }; always contains the
// identity.
std::vector<GroupElement> kernel_window(const TheoremInstance& inst, const Budget& budget = Budget{});
std::vector<GroupElement> kernel_window(const TheoremInstance& inst, const DefectReport& defect,
                                        const Budget& budget = Budget{});

// Representatives xi_tau of the nonempty window preimages of the target
// pieces tau = f(e) * d_i^-1 * lambda_l * d_j; R is their largest norm.
// Verifies f^-1(T) within the window lies in the closed R-neighborhood
// of K (open radius R+1 absorbs the integer-metric boundary).
struct AbsorptionReport {
    bool pass = false;
    int R = 0;
    int window_radius = 0;
    int scale_r = 0;
    std::map<GroupElement, GroupElement, ElementLess> representatives;  // tau -> xi_tau
    std::vector<GroupElement> kernel;  // K on the enlarged window
    std::vector<GroupElement> failures;
};

AbsorptionReport r_neighborhood_absorption(const TheoremInstance& inst,
                                           const Budget& budget = Budget{});
AbsorptionReport r_neighborhood_absorption(const TheoremInstance& inst, const DefectReport& defect,
                                           const Budget& budget = Budget{});

}  // namespace cforge
