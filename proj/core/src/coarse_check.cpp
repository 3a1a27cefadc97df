#include "cforge/coarse_check.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace cforge {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

DefectReport defect_at(const TheoremInstance& inst, int radius, const Budget& budget) {
    Ball window = inst.domain_metric.ball(identity(inst.f.domain()), radius, budget);
    return defect_observed(inst.f, window, inst.codomain_metric, budget);
}

// B'(e, r) intersected with the windowed square of the image-side set;
// factors are drawn from the enlarged codomain window.
std::vector<GroupElement> ball_cap_lambda_square(const TheoremInstance& inst,
                                                 const Budget& budget) {
    const GroupDescriptor& H = inst.f.codomain();
    Ball wide = inst.codomain_metric.ball(identity(H), 4 * inst.window_radius, budget);
    std::vector<GroupElement> out;
    for (const GroupElement& z : power_window(inst.lambda, 2, wide, budget))
        if (inst.codomain_metric.norm(z, budget) < inst.scale_r) out.push_back(z);
    return out;
}

// T = f(e) * D^-1 * core * D, deduplicated in canonical order.
std::vector<GroupElement> target_set(const TheoremInstance& inst, const std::vector<GroupElement>& D,
                                     const std::vector<GroupElement>& core) {
    const GroupDescriptor& H = inst.f.codomain();
    GroupElement fe = inst.f.eval(identity(inst.f.domain()));
    std::set<GroupElement, ElementLess> out;
    for (const GroupElement& d1 : D) {
        GroupElement head = compose(H, fe, invert(H, d1));
        for (const GroupElement& z : core) {
            GroupElement mid = compose(H, head, z);
            for (const GroupElement& d2 : D) out.insert(compose(H, mid, d2));
        }
    }
    return {out.begin(), out.end()};
}

std::vector<GroupElement> kernel_over(const TheoremInstance& inst, const Ball& window,
                                      const std::vector<GroupElement>& D) {
    std::vector<GroupElement> core{identity(inst.f.codomain())};
    std::set<GroupElement, ElementLess> target;
    for (const GroupElement& t : target_set(inst, D, core)) target.insert(t);
    std::vector<GroupElement> out;
    for (const GroupElement& xi : window.elements())
        if (target.count(inst.f.eval(xi)) > 0) out.push_back(xi);
    return out;
}

}  // namespace

TheoremInstance make_instance(std::string name, Quasimorphism f, ApproximateGroup lambda,
                              int window_radius, int scale_r, const Budget& budget) {
    if (!(lambda.ambient() == f.codomain()))
        bad("image-side set must live in the codomain of the map");
    if (window_radius < 0) bad("window radius must be nonnegative");
    if (scale_r < 1) bad("scale r must be at least 1");

    ProperMetric domain_metric = ProperMetric::word_metric(f.domain());
    ProperMetric codomain_metric = ProperMetric::word_metric(f.codomain());
    TheoremInstance inst{std::move(name),
                         std::move(f),
                         std::move(lambda),
                         std::move(domain_metric),
                         std::move(codomain_metric),
                         window_radius,
                         scale_r};

    Ball window = inst.domain_metric.ball(identity(inst.f.domain()), window_radius, budget);
    for (const GroupElement& xi : window.elements())
        if (!inst.lambda.contains(inst.f.eval(xi)))
            bad("map leaves the image-side set inside the window at " +
                format_element(inst.f.domain(), xi));
    return inst;
}

const std::vector<std::string>& bundled_instance_names() {
    static const std::vector<std::string> names{"brooks-ab", "floordiv-z", "floordiv-z2", "hom-z2",
                                                "rolli-sign"};
    return names;
}

TheoremInstance bundled_instance(const std::string& name, int window_radius, int scale_r,
                                 const Budget& budget) {
    auto Z = GroupDescriptor::lattice(1);
    auto whole_z = ApproximateGroup::whole(Z);
    if (name == "hom-z2") {
        auto Z2 = GroupDescriptor::lattice(2);
        return make_instance(name, Quasimorphism::parse("hom:a->a;b->e", Z2, Z), whole_z,
                             window_radius, scale_r, budget);
    }
    if (name == "floordiv-z")
        return make_instance(name, Quasimorphism::parse("floordiv:q=2,coord=1", Z), whole_z,
                             window_radius, scale_r, budget);
    if (name == "floordiv-z2") {
        auto Z2 = GroupDescriptor::lattice(2);
        return make_instance(name, Quasimorphism::parse("floordiv:q=2,coord=2", Z2), whole_z,
                             window_radius, scale_r, budget);
    }
    if (name == "brooks-ab") {
        auto F2 = GroupDescriptor::free_group(2);
        return make_instance(name, Quasimorphism::parse("brooks:w=ab", F2), whole_z, window_radius,
                             scale_r, budget);
    }
    if (name == "rolli-sign") {
        auto F2 = GroupDescriptor::free_group(2);
        return make_instance(name, Quasimorphism::parse("rolli:sign", F2), whole_z, window_radius,
                             scale_r, budget);
    }
    bad("unknown instance: " + name);
}

DefectReport instance_defect(const TheoremInstance& inst, const Budget& budget) {
    return defect_at(inst, inst.window_radius, budget);
}

LipschitzScanReport lipschitz_scan(const TheoremInstance& inst, const std::vector<int>& t_values,
                                   const Budget& budget) {
    return lipschitz_scan(inst, t_values, instance_defect(inst, budget), budget);
}

LipschitzScanReport lipschitz_scan(const TheoremInstance& inst, const std::vector<int>& t_values,
                                   const DefectReport& defect, const Budget& budget) {
    for (int t : t_values)
        if (t < 0) bad("displacement scales must be nonnegative");

    const GroupDescriptor& G = inst.f.domain();
    Ball window = inst.domain_metric.ball(identity(G), inst.window_radius, budget);
    const std::vector<GroupElement> elems = window.elements();
    std::vector<GroupElement> values;
    values.reserve(elems.size());
    for (const GroupElement& xi : elems) values.push_back(inst.f.eval(xi));

    // bucket the largest image distance by exact domain distance
    const int max_d = 2 * inst.window_radius;
    std::vector<int> bucket_max(static_cast<std::size_t>(max_d) + 1, -1);
    std::vector<std::pair<std::size_t, std::size_t>> bucket_arg(
        static_cast<std::size_t>(max_d) + 1, {0, 0});
    long long pairs = 0;
    for (std::size_t i = 0; i < elems.size(); ++i) {
        for (std::size_t j = i; j < elems.size(); ++j) {
            charge_pairs(budget, ++pairs, "lipschitz pair scan");
            int dd = inst.domain_metric.distance(elems[i], elems[j], budget);
            int dc = inst.codomain_metric.distance(values[i], values[j], budget);
            if (dc > bucket_max[dd]) {
                bucket_max[dd] = dc;
                bucket_arg[dd] = {i, j};
            }
        }
    }

    LipschitzScanReport report;
    report.C_obs = defect.C;
    report.pass = true;
    for (int t : t_values) {
        LipschitzSample sample;
        sample.t = t;
        int best = -1;
        std::pair<std::size_t, std::size_t> arg{0, 0};
        for (int d = 0; d <= std::min(t, max_d); ++d) {
            if (bucket_max[d] > best) {
                best = bucket_max[d];
                arg = bucket_arg[d];
            }
        }
        if (best >= 0) {
            sample.s_obs = best;
            sample.witness = std::make_pair(elems[arg.first], elems[arg.second]);
        }

        int S_t = 0;
        for (const GroupElement& x :
             inst.domain_metric.ball(identity(G), t, budget).elements())
            S_t = std::max(S_t, inst.codomain_metric.norm(inst.f.eval(x), budget));
        sample.S_t = S_t;
        sample.bound = 3 * report.C_obs + S_t;
        sample.pass = sample.s_obs <= sample.bound;
        report.pass = report.pass && sample.pass;
        report.samples.push_back(std::move(sample));
    }
    return report;
}

SymmetryGapReport symmetry_gap(const TheoremInstance& inst, const Budget& budget) {
    const GroupDescriptor& G = inst.f.domain();
    const GroupDescriptor& H = inst.f.codomain();
    Ball window = inst.domain_metric.ball(identity(G), inst.window_radius, budget);

    SymmetryGapReport report;
    report.C_obs = defect_at(inst, inst.window_radius, budget).C;
    for (const GroupElement& x : window.elements()) {
        GroupElement mirrored = invert(H, inst.f.eval(invert(G, x)));
        int d = inst.codomain_metric.distance(inst.f.eval(x), mirrored, budget);
        if (d > report.gap) {
            report.gap = d;
            report.witness = x;
        }
    }
    report.pass = report.gap <= 2 * report.C_obs;
    return report;
}

std::vector<std::pair<GroupElement, std::vector<GroupElement>>> fiber_family(
    const TheoremInstance& inst, const Budget& budget) {
    const GroupDescriptor& G = inst.f.domain();
    Ball window = inst.domain_metric.ball(identity(G), inst.window_radius, budget);
    const std::vector<GroupElement> elems = window.elements();
    std::vector<GroupElement> values;
    values.reserve(elems.size());
    std::set<GroupElement, ElementLess> images;
    for (const GroupElement& xi : elems) {
        values.push_back(inst.f.eval(xi));
        images.insert(values.back());
    }

    struct FiberLess {
        bool operator()(const std::vector<GroupElement>& a,
                        const std::vector<GroupElement>& b) const {
            return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                                ElementLess{});
        }
    };
    std::map<std::vector<GroupElement>, GroupElement, FiberLess> distinct;
    long long pairs = 0;
    for (const GroupElement& lam : images) {
        std::vector<GroupElement> fiber;
        for (std::size_t i = 0; i < elems.size(); ++i) {
            charge_pairs(budget, ++pairs, "fiber scan");
            if (inst.codomain_metric.distance(values[i], lam, budget) < inst.scale_r)
                fiber.push_back(elems[i]);
        }
        distinct.try_emplace(std::move(fiber), lam);  // first lambda is the smallest
    }

    std::vector<std::pair<GroupElement, std::vector<GroupElement>>> family;
    family.reserve(distinct.size());
    for (auto& [fiber, lam] : distinct) family.emplace_back(lam, fiber);
    std::sort(family.begin(), family.end(),
              [](const auto& a, const auto& b) { return ElementLess{}(a.first, b.first); });
    return family;
}

namespace {

ContainmentReport containment_core(const TheoremInstance& inst, const DefectReport& defect,
                                   const Budget& budget) {
    const GroupDescriptor& G = inst.f.domain();
    ContainmentReport report;
    report.window_radius = inst.window_radius;
    report.scale_r = inst.scale_r;

    report.target = target_set(inst, defect.left_defect, ball_cap_lambda_square(inst, budget));
    std::set<GroupElement, ElementLess> target(report.target.begin(), report.target.end());

    Ball left = inst.domain_metric.ball(identity(G), inst.window_radius, budget);
    Ball right = inst.domain_metric.ball(identity(G), 4 * inst.window_radius, budget);
    const std::vector<GroupElement> elems = left.elements();
    std::vector<GroupElement> values;
    values.reserve(elems.size());
    std::set<GroupElement, ElementLess> images;
    for (const GroupElement& xi : elems) {
        values.push_back(inst.f.eval(xi));
        images.insert(values.back());
    }

    // members are ordered by (norm, canonical), so the first preimage hit
    // is the minimal-norm representative
    for (const auto& [xi, dist] : right.members) {
        GroupElement lam = inst.f.eval(xi);
        if (images.count(lam) > 0) report.representatives.try_emplace(lam, xi);
    }

    report.pass = true;
    long long pairs = 0;
    for (const GroupElement& lam : images) {
        GroupElement rep_inv = invert(G, report.representatives.at(lam));
        for (std::size_t i = 0; i < elems.size(); ++i) {
            charge_pairs(budget, ++pairs, "containment scan");
            if (inst.codomain_metric.distance(values[i], lam, budget) >= inst.scale_r) continue;
            if (target.count(inst.f.eval(compose(G, rep_inv, elems[i]))) == 0) {
                report.pass = false;
                report.failures.emplace_back(lam, elems[i]);
            }
        }
    }
    return report;
}

}  // namespace

ContainmentReport containment_with_defect_radius(const TheoremInstance& inst, int defect_radius,
                                                 const Budget& budget) {
    return containment_core(inst, defect_at(inst, defect_radius, budget), budget);
}

ContainmentReport containment_almost(const TheoremInstance& inst, const DefectReport& defect,
                                     const Budget& budget) {
    ContainmentReport report = containment_core(inst, defect, budget);
    if (!report.pass) {
        for (int radius = inst.window_radius + 1; radius <= 2 * inst.window_radius; ++radius) {
            if (containment_with_defect_radius(inst, radius, budget).pass) {
                report.repaired_window_radius = radius;
                break;
            }
        }
    }
    return report;
}

ContainmentReport containment_almost(const TheoremInstance& inst, const Budget& budget) {
    return containment_almost(inst, instance_defect(inst, budget), budget);
}

std::vector<GroupElement> kernel_window(const TheoremInstance& inst, const DefectReport& defect,
                                        const Budget& budget) {
    const GroupDescriptor& G = inst.f.domain();
    Ball window = inst.domain_metric.ball(identity(G), inst.window_radius, budget);
    return kernel_over(inst, window, defect.left_defect);
}

std::vector<GroupElement> kernel_window(const TheoremInstance& inst, const Budget& budget) {
    return kernel_window(inst, instance_defect(inst, budget), budget);
}

AbsorptionReport r_neighborhood_absorption(const TheoremInstance& inst, const DefectReport& defect,
                                           const Budget& budget) {
    const GroupDescriptor& G = inst.f.domain();
    AbsorptionReport report;
    report.window_radius = inst.window_radius;
    report.scale_r = inst.scale_r;

    std::vector<GroupElement> T =
        target_set(inst, defect.left_defect, ball_cap_lambda_square(inst, budget));
    std::set<GroupElement, ElementLess> target(T.begin(), T.end());

    Ball left = inst.domain_metric.ball(identity(G), inst.window_radius, budget);
    Ball right = inst.domain_metric.ball(identity(G), 4 * inst.window_radius, budget);

    // minimal-norm representative per nonempty target piece
    for (const auto& [xi, dist] : right.members) {
        GroupElement tau = inst.f.eval(xi);
        if (target.count(tau) == 0) continue;
        if (report.representatives.try_emplace(tau, xi).second)
            report.R = std::max(report.R, dist);
    }

    report.kernel = kernel_over(inst, right, defect.left_defect);

    report.pass = true;
    long long pairs = 0;
    for (const GroupElement& xi : left.elements()) {
        if (target.count(inst.f.eval(xi)) == 0) continue;
        bool close = false;
        for (const GroupElement& k : report.kernel) {
            charge_pairs(budget, ++pairs, "absorption scan");
            if (inst.domain_metric.distance(xi, k, budget) <= report.R) {
                close = true;
                break;
            }
        }
        if (!close) {
            report.pass = false;
            report.failures.push_back(xi);
        }
    }
    return report;
}

AbsorptionReport r_neighborhood_absorption(const TheoremInstance& inst, const Budget& budget) {
    return r_neighborhood_absorption(inst, instance_defect(inst, budget), budget);
}

}  // namespace cforge
