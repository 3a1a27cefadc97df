#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cforge/budget.hpp"
#include "cforge/group.hpp"
#include "cforge/metric.hpp"

namespace cforge {

// Which construction an ApproximateGroup came from.
enum class ApproxKind {
    WholeGroup,      // the entire ambient group
    GeneratedPattern,    // BS(1,2): integer axis <a> together with {b, b^-1}
    CutAndProject,   // lattice points of Z^2 near the line y = x/sqrt(2)
};

// Cut-and-project data: keep (m, n) in Z^2 when |m - n*sqrt(2)| <= c,
// with c = c_num / c_den a positive rational.  Membership is decided by
// exact integer arithmetic only.
struct CutProjectSpec {
    GroupDescriptor g_part;  // always the rank-2 lattice
    BigInt c_num;
    BigInt c_den;
};

// Sign of A - B*sqrt(2) for integers A, B.  Exact: handles signs first,
// then compares A^2 against 2*B^2 (never equal when both are nonzero).
int compare_with_sqrt2_multiple(const BigInt& A, const BigInt& B);

// A symmetric, unital subset of a group given by a decidable membership
// test.  When witness_F is present, products of two members within the
// checked window stay inside (members * witness_F).
class ApproximateGroup {
  public:
    static ApproximateGroup whole(GroupDescriptor ambient);
    static ApproximateGroup bs12_pattern();
    static ApproximateGroup cut_project(BigInt c_num, BigInt c_den);

    // Accepts "whole", "bs12-pattern", "cutproject:c=1/2".  "whole" needs
    // the ambient group supplied by the caller; the other kinds fix their
    // own ambient group and ignore a mismatching hint only if absent.
    static ApproximateGroup parse(const std::string& text,
                                  const std::optional<GroupDescriptor>& ambient = std::nullopt);

    ApproxKind kind() const { return kind_; }
    const GroupDescriptor& ambient() const { return ambient_; }

    // Decidable membership; symmetric and unital by construction.
    bool contains(const GroupElement& g) const;

    const std::optional<std::vector<GroupElement>>& witness_F() const { return witness_F_; }
    void set_witness_F(std::vector<GroupElement> F);

    // Non-null only for the cut-and-project kind.
    const CutProjectSpec* cut_spec() const;

    // Round-trips through parse().
    std::string to_string() const;

  private:
    ApproximateGroup() = default;

    ApproxKind kind_ = ApproxKind::WholeGroup;
    GroupDescriptor ambient_;
    std::optional<std::vector<GroupElement>> witness_F_;
    std::optional<CutProjectSpec> cut_;
};

// Elements of `window` that are products of exactly k members of
// (Lambda intersect window); deduplicated, canonically sorted.  Since the
// identity is a member, the result grows monotonically with k whenever
// the window contains the identity.
std::vector<GroupElement> power_window(const ApproximateGroup& lambda, int k, const Ball& window,
                                       const Budget& budget = Budget{});

// Outcome of the windowed axiom check.  Failures are data, not errors.
struct TaoReport {
    bool pass = false;
    bool unital = false;
    bool symmetric = false;
    bool products_covered = false;
    long long window_radius = 0;
    std::size_t member_count = 0;  // |Lambda intersect window|
    std::size_t pair_count = 0;    // products examined
    std::size_t f_size = 0;
    // First product lambda1*lambda2 that landed outside members*F.
    std::optional<std::pair<GroupElement, GroupElement>> failing_pair;
    std::optional<GroupElement> failing_product;
    // Window element whose membership disagrees with its inverse's.
    std::optional<GroupElement> symmetry_witness;
};

// Checks, over the window: identity is a member, membership agrees with
// inversion, and every product of two members lies in members*F.
TaoReport verify_tao_axioms(const ApproximateGroup& lambda, const std::vector<GroupElement>& F,
                            const Ball& window, const Budget& budget = Budget{});

// All window elements (m, n) with |m - n*sqrt(2)| <= c, by exact tests.
std::vector<GroupElement> cut_project_members(const CutProjectSpec& spec, const Ball& window);

// Greedy search for a finite F making the windowed axiom check pass.
// Candidates are drawn from { lambda^-1 * p : lambda member, p product }
// clipped to norm <= search_radius; largest cover first, ties broken by
// smaller norm and then canonical order.  Throws std::runtime_error if
// the window cannot be covered within the search radius.
std::vector<GroupElement> find_tao_witness(const ApproximateGroup& lambda, const ProperMetric& metric,
                                           long long window_radius, long long search_radius,
                                           const Budget& budget = Budget{});

}  // namespace cforge
