#include "cforge/approx.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace cforge {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

// Parses a positive rational "p" or "p/q" into numerator/denominator.
void parse_positive_rational(const std::string& text, BigInt& num, BigInt& den) {
    auto slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            num = BigInt(text);
            den = 1;
        } else {
            num = BigInt(text.substr(0, slash));
            den = BigInt(text.substr(slash + 1));
        }
    } catch (const std::exception&) {
        bad("invalid rational: " + text);
    }
    if (num <= 0 || den <= 0) bad("window halfwidth must be positive: " + text);
}

std::string rational_to_string(const BigInt& num, const BigInt& den) {
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

}  // namespace

int compare_with_sqrt2_multiple(const BigInt& A, const BigInt& B) {
    if (B == 0) return A == 0 ? 0 : (A > 0 ? 1 : -1);
    if (A <= 0 && B > 0) return -1;
    if (A >= 0 && B < 0) return 1;
    // Same strict sign; squares decide, and A^2 == 2*B^2 cannot happen for
    // nonzero integers.
    BigInt a2 = A * A;
    BigInt b2 = 2 * B * B;
    if (A > 0) return a2 > b2 ? 1 : -1;
    return a2 > b2 ? -1 : 1;
}

ApproximateGroup ApproximateGroup::whole(GroupDescriptor ambient) {
    ApproximateGroup lam;
    lam.kind_ = ApproxKind::WholeGroup;
    lam.ambient_ = std::move(ambient);
    lam.witness_F_ = std::vector<GroupElement>{identity(lam.ambient_)};
    return lam;
}

ApproximateGroup ApproximateGroup::bs12_pattern() {
    ApproximateGroup lam;
    lam.kind_ = ApproxKind::GeneratedPattern;
    lam.ambient_ = GroupDescriptor::bs12();
    // Products of two members stay inside members * {e, b, b^-1, b^-1 a}.
    const GroupDescriptor& G = lam.ambient_;
    lam.witness_F_ = std::vector<GroupElement>{
        identity(G),
        evaluate_word(G, {2}),
        evaluate_word(G, {-2}),
        evaluate_word(G, {-2, 1}),
    };
    return lam;
}

ApproximateGroup ApproximateGroup::cut_project(BigInt c_num, BigInt c_den) {
    if (c_num <= 0 || c_den <= 0) bad("cutproject window halfwidth must be positive");
    ApproximateGroup lam;
    lam.kind_ = ApproxKind::CutAndProject;
    lam.ambient_ = GroupDescriptor::lattice(2);
    lam.cut_ = CutProjectSpec{lam.ambient_, std::move(c_num), std::move(c_den)};
    return lam;
}

ApproximateGroup ApproximateGroup::parse(const std::string& text,
                                         const std::optional<GroupDescriptor>& ambient) {
    if (text == "whole") {
        if (!ambient) bad("approximate-group spec \"whole\" needs an ambient group");
        return whole(*ambient);
    }
    if (text == "bs12-pattern") return bs12_pattern();
    const std::string prefix = "cutproject:c=";
    if (text.rfind(prefix, 0) == 0) {
        BigInt num, den;
        parse_positive_rational(text.substr(prefix.size()), num, den);
        return cut_project(std::move(num), std::move(den));
    }
    bad("unknown approximate-group spec: " + text);
}

bool ApproximateGroup::contains(const GroupElement& g) const {
    switch (kind_) {
        case ApproxKind::WholeGroup:
            normalize(ambient_, g);  // validates shape
            return true;
        case ApproxKind::GeneratedPattern: {
            GroupElement n = normalize(ambient_, g);
            const BsElem& e = n.as_bs();
            if (e.k == 0 && e.x.is_integer()) return true;
            return e.x.is_zero() && (e.k == 1 || e.k == -1);
        }
        case ApproxKind::CutAndProject: {
            GroupElement n = normalize(ambient_, g);
            const LatticeVec& v = n.as_lattice();
            const BigInt qm = cut_->c_den * v.coords[0];
            const BigInt qn = cut_->c_den * v.coords[1];
            // |m - n*sqrt(2)| <= p/q  <=>  qm - p <= qn*sqrt(2) <= qm + p
            return compare_with_sqrt2_multiple(qm - cut_->c_num, qn) <= 0 &&
                   compare_with_sqrt2_multiple(qm + cut_->c_num, qn) >= 0;
        }
    }
    bad("corrupt approximate-group kind");
}

void ApproximateGroup::set_witness_F(std::vector<GroupElement> F) {
    if (F.empty()) bad("witness set must be nonempty");
    witness_F_ = std::move(F);
}

const CutProjectSpec* ApproximateGroup::cut_spec() const {
    return cut_ ? &*cut_ : nullptr;
}

std::string ApproximateGroup::to_string() const {
    switch (kind_) {
        case ApproxKind::WholeGroup: return "whole";
        case ApproxKind::GeneratedPattern: return "bs12-pattern";
        case ApproxKind::CutAndProject:
            return "cutproject:c=" + rational_to_string(cut_->c_num, cut_->c_den);
    }
    bad("corrupt approximate-group kind");
}

std::vector<GroupElement> power_window(const ApproximateGroup& lambda, int k, const Ball& window,
                                       const Budget& budget) {
    if (k < 1) bad("power_window needs k >= 1");
    const GroupDescriptor& G = lambda.ambient();

    std::vector<GroupElement> factors;
    for (const GroupElement& g : window.elements())
        if (lambda.contains(g)) factors.push_back(g);

    std::set<GroupElement, ElementLess> current(factors.begin(), factors.end());
    long long pairs = 0;
    for (int step = 1; step < k; ++step) {
        std::set<GroupElement, ElementLess> next;
        for (const GroupElement& x : current) {
            for (const GroupElement& f : factors) {
                charge_pairs(budget, ++pairs, "approx window scan");
                next.insert(compose(G, x, f));
            }
        }
        charge_elements(budget, static_cast<long long>(next.size()), "power_window products");
        current = std::move(next);
    }

    std::vector<GroupElement> out;
    for (const GroupElement& g : current)
        if (window.contains(g)) out.push_back(g);
    return out;
}

TaoReport verify_tao_axioms(const ApproximateGroup& lambda, const std::vector<GroupElement>& F,
                            const Ball& window, const Budget& budget) {
    if (F.empty()) bad("verify_tao_axioms needs a nonempty F");
    const GroupDescriptor& G = lambda.ambient();

    TaoReport report;
    report.window_radius = window.radius;
    report.f_size = F.size();
    report.unital = lambda.contains(identity(G));

    report.symmetric = true;
    for (const GroupElement& g : window.elements()) {
        if (lambda.contains(g) != lambda.contains(invert(G, g))) {
            report.symmetric = false;
            report.symmetry_witness = g;
            break;
        }
    }

    std::vector<GroupElement> members;
    for (const GroupElement& g : window.elements())
        if (lambda.contains(g)) members.push_back(g);
    report.member_count = members.size();

    std::vector<GroupElement> inv_F;
    inv_F.reserve(F.size());
    for (const GroupElement& f : F) inv_F.push_back(invert(G, f));

    report.products_covered = true;
    long long pairs = 0;
    for (const GroupElement& l1 : members) {
        for (const GroupElement& l2 : members) {
            charge_pairs(budget, ++pairs, "approx window scan");
            ++report.pair_count;
            GroupElement p = compose(G, l1, l2);
            bool covered = false;
            for (const GroupElement& fi : inv_F) {
                if (lambda.contains(compose(G, p, fi))) {
                    covered = true;
                    break;
                }
            }
            if (!covered) {
                report.products_covered = false;
                report.failing_pair = std::make_pair(l1, l2);
                report.failing_product = std::move(p);
                break;
            }
        }
        if (!report.products_covered) break;
    }

    report.pass = report.unital && report.symmetric && report.products_covered;
    return report;
}

std::vector<GroupElement> cut_project_members(const CutProjectSpec& spec, const Ball& window) {
    ApproximateGroup lam = ApproximateGroup::cut_project(spec.c_num, spec.c_den);
    std::vector<GroupElement> out;
    for (const GroupElement& g : window.elements())
        if (lam.contains(g)) out.push_back(g);
    return out;
}

std::vector<GroupElement> find_tao_witness(const ApproximateGroup& lambda, const ProperMetric& metric,
                                           long long window_radius, long long search_radius,
                                           const Budget& budget) {
    if (window_radius < 0 || search_radius < 0) bad("find_tao_witness needs nonnegative radii");
    const GroupDescriptor& G = lambda.ambient();
    Ball window = metric.ball(identity(G), static_cast<int>(window_radius), budget);

    std::vector<GroupElement> members;
    for (const GroupElement& g : window.elements())
        if (lambda.contains(g)) members.push_back(g);

    std::set<GroupElement, ElementLess> products;
    long long pairs = 0;
    for (const GroupElement& l1 : members)
        for (const GroupElement& l2 : members) {
            charge_pairs(budget, ++pairs, "approx window scan");
            products.insert(compose(G, l1, l2));
        }

    // Every useful f has the form lambda^-1 * p; clip candidates to the
    // search radius so the reported F stays window-relative evidence.
    std::set<GroupElement, ElementLess> candidate_set;
    candidate_set.insert(identity(G));
    for (const GroupElement& l : members) {
        GroupElement li = invert(G, l);
        for (const GroupElement& p : products) {
            charge_pairs(budget, ++pairs, "approx window scan");
            GroupElement f = compose(G, li, p);
            if (metric.norm(f, budget) <= search_radius) candidate_set.insert(std::move(f));
        }
    }
    // Ranked by (norm, canonical order) so ties favor short witnesses.
    std::vector<std::pair<int, GroupElement>> candidates;
    candidates.reserve(candidate_set.size());
    for (const GroupElement& f : candidate_set)
        candidates.emplace_back(metric.norm(f, budget), f);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    std::set<GroupElement, ElementLess> uncovered = products;
    std::vector<GroupElement> F;
    while (!uncovered.empty()) {
        const GroupElement* best = nullptr;
        std::size_t best_count = 0;
        for (const auto& [norm, f] : candidates) {
            GroupElement fi = invert(G, f);
            std::size_t count = 0;
            for (const GroupElement& p : uncovered) {
                charge_pairs(budget, ++pairs, "approx window scan");
                if (lambda.contains(compose(G, p, fi))) ++count;
            }
            if (count > best_count) {  // ties keep the first in rank order
                best_count = count;
                best = &f;
            }
        }
        if (best == nullptr)
            throw std::runtime_error("no witness set within search radius " +
                                     std::to_string(search_radius) + " covers window radius " +
                                     std::to_string(window_radius));
        GroupElement chosen = *best;
        GroupElement ci = invert(G, chosen);
        for (auto it = uncovered.begin(); it != uncovered.end();) {
            if (lambda.contains(compose(G, *it, ci)))
                it = uncovered.erase(it);
            else
                ++it;
        }
        F.push_back(std::move(chosen));
    }

    std::sort(F.begin(), F.end(), ElementLess{});
    return F;
}

}  // namespace cforge
