#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cforge/budget.hpp"
#include "cforge/group.hpp"
#include "cforge/metric.hpp"

namespace cforge {

enum class QmRule {
    Homomorphism,            // generator-image table, relations checked
    HomomorphismPlusBounded,     // homomorphism plus a bounded correction term
    Brooks,                  // counts a fixed reduced word inside reduced words
    Rolli,                   // sums an odd bounded function of syllable exponents
    FloorDivision,           // floor of one lattice coordinate over q, others pass through
    ComposeWithHom,          // homomorphism applied after another quasimorphism
};

enum class BrooksCounting { Overlapping, Disjoint };

// True for groups in which all elements commute (lattices, rank-1 free
// groups, and products of such).
bool is_abelian(const GroupDescriptor& G);

// A map between groups whose failure to be a homomorphism is confined to
// a finite defect set.  Evaluation is total and deterministic; rules that
// need algebraic side conditions check them at construction time.
class Quasimorphism {
  public:
    // Images indexed by domain generator (images[i] is the image of
    // generator i+1).  Defining relations of the domain are verified.
    static Quasimorphism homomorphism(GroupDescriptor domain, GroupDescriptor codomain,
                                      std::vector<GroupElement> images);
    // Homomorphism plus a bounded term given as a finite table with a
    // default value; the codomain must be abelian.
    static Quasimorphism homomorphism_plus_bounded(
        GroupDescriptor domain, GroupDescriptor codomain, std::vector<GroupElement> images,
        std::map<GroupElement, GroupElement, ElementLess> bounded_table,
        GroupElement default_value);
    // Counts occurrences of the reduced word w (and of its inverse) in
    // reduced words over a free domain; lands in the integers.
    static Quasimorphism brooks(GroupDescriptor domain, std::vector<std::int32_t> w,
                                BrooksCounting counting = BrooksCounting::Overlapping);
    // Sums alpha over syllable exponents; alpha is odd by construction,
    // given as a table alpha(1..n) and clamped to +-alpha(n) beyond.
    static Quasimorphism rolli(GroupDescriptor domain, std::vector<std::int64_t> alpha_table);
    // v maps to sum of the other coordinates plus floor(v[coord] / q);
    // coord is 1-based.
    static Quasimorphism floor_division(GroupDescriptor domain, std::int64_t q, int coord);
    // outer must be a homomorphism whose domain is inner's codomain.
    static Quasimorphism compose_with_hom(Quasimorphism inner, Quasimorphism outer);

    // Accepts "hom:a->a;b->e", "homplus:<hom>|<g>-><h>;...|default=<h>",
    // "brooks:w=ab[,counting=disjoint]", "rolli:sign", "rolli:table=1,2",
    // "floordiv:q=2,coord=1", "compose(<inner>;<outer hom>)".  The
    // codomain defaults to the domain for "hom"/"homplus" and to the
    // integers for the counting rules.
    static Quasimorphism parse(const std::string& text, const GroupDescriptor& domain,
                               const std::optional<GroupDescriptor>& codomain = std::nullopt);

    QmRule rule() const { return rule_; }
    const GroupDescriptor& domain() const { return domain_; }
    const GroupDescriptor& codomain() const { return codomain_; }
    BrooksCounting counting() const { return counting_; }

    GroupElement eval(const GroupElement& g) const;

    // Round-trips through parse() for the string-expressible rules.
    std::string to_string() const;

  private:
    Quasimorphism() = default;

    QmRule rule_ = QmRule::Homomorphism;
    GroupDescriptor domain_;
    GroupDescriptor codomain_;
    std::vector<GroupElement> images_;  // Homomorphism / HomomorphismPlusBounded
    std::map<GroupElement, GroupElement, ElementLess> bounded_table_;
    std::optional<GroupElement> bounded_default_;
    std::vector<std::int32_t> word_;  // Brooks
    BrooksCounting counting_ = BrooksCounting::Overlapping;
    std::vector<std::int64_t> alpha_;  // Rolli
    std::int64_t q_ = 0;               // FloorDivision
    int coord_ = 1;
    std::shared_ptr<const Quasimorphism> inner_;  // ComposeWithHom
    std::shared_ptr<const Quasimorphism> outer_;
};

// Windowed observed defect sets.  left: f(y)^-1 f(x)^-1 f(xy) over all
// window pairs; right: f(x) f(y) f(xy)^-1.  C is the largest codomain
// norm over the left set and its inverses.
struct DefectReport {
    int window_radius = 0;
    std::vector<GroupElement> left_defect;   // canonical order
    std::vector<GroupElement> right_defect;  // canonical order
    int C = 0;
    // First (x, y) pair producing each defect element, in scan order.
    std::map<GroupElement, std::pair<GroupElement, GroupElement>, ElementLess> left_witnesses;
    std::map<GroupElement, std::pair<GroupElement, GroupElement>, ElementLess> right_witnesses;
};

DefectReport defect_observed(const Quasimorphism& f, const Ball& window,
                             const ProperMetric& codomain_metric, const Budget& budget = Budget{});

// Checks f(xy) in f(x) f(y) D and f(y)^-1 f(x)^-1 in D f(xy)^-1 for every
// window pair; both reduce to the same displaced element, and both are
// evaluated literally as a self-check.
struct DefectMembershipReport {
    bool pass = false;
    std::size_t pair_count = 0;
    // (x, y, displaced element outside D)
    std::vector<std::tuple<GroupElement, GroupElement, GroupElement>> failures;
};

DefectMembershipReport check_defect_membership(const Quasimorphism& f,
                                               const std::vector<GroupElement>& D, const Ball& window,
                                               const Budget& budget = Budget{});

// Max codomain norm of the observed left defect, and max observed
// distance between f(xy) and f(x)f(y); the two agree exactly.
struct BoundedDistanceResult {
    int C_obs = 0;
    int max_pair_distance = 0;
};

BoundedDistanceResult bounded_distance_check(const Quasimorphism& f, const Ball& window,
                                             const ProperMetric& codomain_metric,
                                             const Budget& budget = Budget{});

// Observed defect sets at three consecutive radii; stable means the sets
// stopped growing.  A diagnostic, not a certificate.
struct StabilizationDiagnostic {
    std::vector<DefectReport> reports;  // radii r, r+1, r+2
    bool left_stable = false;
    bool right_stable = false;
};

StabilizationDiagnostic defect_stabilization(const Quasimorphism& f, const ProperMetric& domain_metric,
                                             const ProperMetric& codomain_metric, int radius,
                                             const Budget& budget = Budget{});

}  // namespace cforge
