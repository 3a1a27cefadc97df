#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "cforge/coarse_check.hpp"
#include "helpers.hpp"

using namespace cforge;

namespace {

GroupElement zpoint(int64_t v) { return GroupElement{LatticeVec{{v}}}; }
GroupElement z2point(int64_t a, int64_t b) { return GroupElement{LatticeVec{{a, b}}}; }

std::vector<int64_t> as_ints(const GroupDescriptor& G, const std::vector<GroupElement>& v) {
    std::vector<int64_t> out;
    for (const auto& g : v) out.push_back(g.as_lattice().coords[0]);
    return out;
}

}  // namespace

TEST_CASE("instance construction validates shapes and the window image") {
    CHECK(bundled_instance_names().size() == 5);
    for (const std::string& name : bundled_instance_names()) {
        TheoremInstance inst = bundled_instance(name, 2, 1);
        CHECK(inst.name == name);
        CHECK(inst.window_radius == 2);
        CHECK(inst.scale_r == 1);
        CHECK(inst.f.domain() == inst.domain_metric.group());
        CHECK(inst.f.codomain() == inst.codomain_metric.group());
    }
    CHECK_THROWS_AS(bundled_instance("no-such-instance", 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(bundled_instance("hom-z2", -1, 1), std::invalid_argument);
    CHECK_THROWS_AS(bundled_instance("hom-z2", 2, 0), std::invalid_argument);

    // ambient of the image-side set must match the codomain
    auto Z = GroupDescriptor::lattice(1);
    auto Z2 = GroupDescriptor::lattice(2);
    CHECK_THROWS_AS(make_instance("bad", Quasimorphism::parse("floordiv:q=2", Z),
                                  ApproximateGroup::whole(Z2), 4, 1),
                    std::invalid_argument);

    // the identity map on BS(1,2) leaves the generated pattern inside a
    // radius-2 window (ab is neither a power of a nor b^{+-1})
    auto BS = GroupDescriptor::bs12();
    std::vector<GroupElement> images{evaluate_word(BS, {1}), evaluate_word(BS, {2})};
    Quasimorphism ident = Quasimorphism::homomorphism(BS, BS, images);
    CHECK_THROWS_AS(
        make_instance("bad", ident, ApproximateGroup::bs12_pattern(), 2, 1),
        std::invalid_argument);
    // radius 1 is fine: e, a^{+-1}, b^{+-1} all belong to the pattern
    CHECK_NOTHROW(make_instance("ok", ident, ApproximateGroup::bs12_pattern(), 1, 1));
}

TEST_CASE("displacement scan: projection attains its bound exactly") {
    TheoremInstance inst = bundled_instance("hom-z2", 5, 1);
    LipschitzScanReport rep = lipschitz_scan(inst, {0, 1, 2, 3, 4, 5});
    CHECK(rep.C_obs == 0);
    CHECK(rep.pass);
    REQUIRE(rep.samples.size() == 6);
    for (int t = 0; t <= 5; ++t) {
        const LipschitzSample& s = rep.samples[t];
        CHECK(s.t == t);
        CHECK(s.s_obs == t);   // horizontal pairs realize the full displacement
        CHECK(s.S_t == t);
        CHECK(s.bound == t);
        CHECK(s.pass);
        REQUIRE(s.witness.has_value());
        // the recorded pair genuinely realizes s_obs within distance t
        auto [u, v] = *s.witness;
        CHECK(inst.domain_metric.distance(u, v) <= t);
        CHECK(inst.codomain_metric.distance(inst.f.eval(u), inst.f.eval(v)) == s.s_obs);
    }
}

TEST_CASE("displacement scan: halving map compresses distances") {
    TheoremInstance inst = bundled_instance("floordiv-z", 50, 1);
    LipschitzScanReport rep = lipschitz_scan(inst, {4});
    CHECK(rep.C_obs == 1);
    REQUIRE(rep.samples.size() == 1);
    CHECK(rep.samples[0].s_obs == 2);
    CHECK(rep.samples[0].S_t == 2);
    CHECK(rep.samples[0].bound == 5);
    CHECK(rep.pass);
}

TEST_CASE("displacement scan: counting map on the free group stays bounded") {
    TheoremInstance inst = bundled_instance("brooks-ab", 3, 1);
    LipschitzScanReport rep = lipschitz_scan(inst, {0, 1, 2, 3, 4, 5, 6});
    CHECK(rep.pass);
    for (const LipschitzSample& s : rep.samples) {
        CHECK(s.pass);
        CHECK(s.s_obs <= s.bound);
    }
    CHECK_THROWS_AS(lipschitz_scan(inst, {-1}), std::invalid_argument);
}

TEST_CASE("symmetry gap across the bundled instances") {
    SUBCASE("exact homomorphism has no gap") {
        SymmetryGapReport rep = symmetry_gap(bundled_instance("hom-z2", 6, 1));
        CHECK(rep.gap == 0);
        CHECK(rep.pass);
        CHECK(!rep.witness.has_value());
    }
    SUBCASE("halving map misses symmetry by one on odd points") {
        TheoremInstance inst = bundled_instance("floordiv-z", 6, 1);
        SymmetryGapReport rep = symmetry_gap(inst);
        CHECK(rep.gap == 1);
        CHECK(rep.C_obs == 1);
        CHECK(rep.pass);  // 1 <= 2 * 1
        REQUIRE(rep.witness.has_value());
        CHECK(*rep.witness == zpoint(-5));  // first odd point in canonical order
        const GroupDescriptor& G = inst.f.domain();
        const GroupDescriptor& H = inst.f.codomain();
        GroupElement mirrored = invert(H, inst.f.eval(invert(G, *rep.witness)));
        CHECK(inst.codomain_metric.distance(inst.f.eval(*rep.witness), mirrored) == 1);
    }
    SUBCASE("counting and sign maps are exactly symmetric") {
        CHECK(symmetry_gap(bundled_instance("brooks-ab", 3, 1)).gap == 0);
        CHECK(symmetry_gap(bundled_instance("rolli-sign", 3, 1)).gap == 0);
    }
}

TEST_CASE("fiber family: projection fibers are vertical strips") {
    TheoremInstance inst = bundled_instance("hom-z2", 3, 1);
    auto family = fiber_family(inst);
    REQUIRE(family.size() == 7);  // labels -3..3, all fibers distinct
    for (std::size_t i = 0; i < family.size(); ++i) {
        int64_t lam = family[i].first.as_lattice().coords[0];
        CHECK(lam == static_cast<int64_t>(i) - 3);
        for (const GroupElement& xi : family[i].second)
            CHECK(xi.as_lattice().coords[0] == lam);
    }
    // the fiber over 0 is the full vertical axis strip of the window
    const auto& axis = family[3].second;
    REQUIRE(axis.size() == 7);
    for (int64_t n = -3; n <= 3; ++n)
        CHECK(std::find(axis.begin(), axis.end(), z2point(0, n)) != axis.end());
}

TEST_CASE("fiber family: halving map groups consecutive pairs") {
    TheoremInstance inst = bundled_instance("floordiv-z", 3, 1);
    auto family = fiber_family(inst);
    REQUIRE(family.size() == 4);
    auto Z = inst.f.domain();
    CHECK(as_ints(Z, family[0].second) == std::vector<int64_t>{-3});
    CHECK(as_ints(Z, family[1].second) == std::vector<int64_t>{-2, -1});
    CHECK(as_ints(Z, family[2].second) == std::vector<int64_t>{0, 1});
    CHECK(as_ints(Z, family[3].second) == std::vector<int64_t>{2, 3});
    CHECK(family[2].first == zpoint(0));
}

TEST_CASE("fiber family: a scale beyond the diameter collapses to one member") {
    TheoremInstance inst = bundled_instance("floordiv-z", 2, 10);
    auto family = fiber_family(inst);
    REQUIRE(family.size() == 1);
    CHECK(family[0].first == zpoint(-1));  // smallest image labels the merged fiber
    CHECK(as_ints(inst.f.domain(), family[0].second) ==
          std::vector<int64_t>{-2, -1, 0, 1, 2});
}

TEST_CASE("containment: projection fibers sit inside translated preimages") {
    TheoremInstance inst = bundled_instance("hom-z2", 8, 2);
    ContainmentReport rep = containment_almost(inst);
    CHECK(rep.pass);
    CHECK(rep.failures.empty());
    CHECK(!rep.repaired_window_radius.has_value());
    CHECK(rep.window_radius == 8);
    CHECK(rep.scale_r == 2);
    // defect set is trivial, so T = B'(e, 2) = {-1, 0, 1}
    CHECK(as_ints(inst.f.codomain(), rep.target) == std::vector<int64_t>{-1, 0, 1});
    // minimal-norm representatives of small fibers
    CHECK(rep.representatives.at(zpoint(0)) == z2point(0, 0));
    CHECK(rep.representatives.at(zpoint(1)) == z2point(1, 0));
    CHECK(rep.representatives.at(zpoint(-1)) == z2point(-1, 0));
}

TEST_CASE("containment: halving map with its two-point defect set") {
    TheoremInstance inst = bundled_instance("floordiv-z", 40, 2);
    ContainmentReport rep = containment_almost(inst);
    CHECK(rep.pass);
    // D = {0, 1}, core = {-1, 0, 1}: T = -D + core + D = {-2..2}
    CHECK(as_ints(inst.f.codomain(), rep.target) ==
          std::vector<int64_t>{-2, -1, 0, 1, 2});
    // every image point within the window owns a representative
    CHECK(rep.representatives.size() == 41);  // f(ball(e,40)) = {-20..20}
    CHECK(rep.representatives.at(zpoint(-3)) == zpoint(-5));  // norm 5 beats norm 6
    CHECK(rep.representatives.at(zpoint(3)) == zpoint(6));
}

TEST_CASE("containment: plane halving map passes at scale 2") {
    TheoremInstance inst = bundled_instance("floordiv-z2", 12, 2);
    ContainmentReport rep = containment_almost(inst);
    CHECK(rep.pass);
    CHECK(rep.failures.empty());
    CHECK(rep.representatives.at(zpoint(4)) == z2point(4, 0));
}

TEST_CASE("containment: an undersized defect set fails honestly and repairs") {
    TheoremInstance inst = bundled_instance("floordiv-z", 8, 2);
    // a defect set observed only at the identity misses the carry value 1,
    // shrinking T to {-1, 0, 1}; boundary fiber points then escape
    ContainmentReport starved = containment_with_defect_radius(inst, 0);
    CHECK(!starved.pass);
    CHECK(as_ints(inst.f.codomain(), starved.target) == std::vector<int64_t>{-1, 0, 1});
    REQUIRE(starved.failures.size() == 3);
    CHECK(starved.failures.front().first == zpoint(-3));
    CHECK(starved.failures.front().second == zpoint(-8));
    // each recorded failure genuinely violates membership: f(rep^-1 xi) is
    // outside T even though xi lies in the fiber of its label
    std::set<GroupElement, ElementLess> T(starved.target.begin(), starved.target.end());
    const GroupDescriptor& G = inst.f.domain();
    for (const auto& [lam, xi] : starved.failures) {
        CHECK(inst.codomain_metric.distance(inst.f.eval(xi), lam) < inst.scale_r);
        GroupElement rel = compose(G, invert(G, starved.representatives.at(lam)), xi);
        CHECK(T.count(inst.f.eval(rel)) == 0);
    }
    // one extra unit of radius already captures the full defect set
    CHECK(containment_with_defect_radius(inst, 1).pass);
}

TEST_CASE("kernel window: halving map pulls back a six-point interval") {
    TheoremInstance inst = bundled_instance("floordiv-z", 3, 1);
    std::vector<GroupElement> K = kernel_window(inst);
    CHECK(as_ints(inst.f.domain(), K) == std::vector<int64_t>{-2, -1, 0, 1, 2, 3});
}

TEST_CASE("kernel window: projection pulls back the vertical axis") {
    TheoremInstance inst = bundled_instance("hom-z2", 3, 1);
    std::vector<GroupElement> K = kernel_window(inst);
    REQUIRE(K.size() == 7);
    for (const GroupElement& k : K) CHECK(k.as_lattice().coords[0] == 0);
    CHECK(std::find(K.begin(), K.end(), z2point(0, 0)) != K.end());
}

TEST_CASE("kernel window: plane halving map yields a bounded-width strip") {
    TheoremInstance inst = bundled_instance("floordiv-z2", 4, 1);
    std::vector<GroupElement> K = kernel_window(inst);
    CHECK(std::find(K.begin(), K.end(), z2point(0, 0)) != K.end());
    // per fixed second coordinate the strip has width at most 3 (bound: 6)
    for (int64_t n = -4; n <= 4; ++n) {
        int count = 0;
        for (const GroupElement& k : K)
            if (k.as_lattice().coords[1] == n) ++count;
        CHECK(count <= 3);
    }
    for (const GroupElement& k : K) {
        const auto& c = k.as_lattice().coords;
        int64_t image = c[0] + (c[1] >= 0 ? c[1] / 2 : (c[1] - 1) / 2);
        CHECK(image >= -1);
        CHECK(image <= 1);
    }
}

TEST_CASE("absorption: projection needs displacement one") {
    TheoremInstance inst = bundled_instance("hom-z2", 8, 2);
    AbsorptionReport rep = r_neighborhood_absorption(inst);
    CHECK(rep.pass);
    CHECK(rep.R == 1);
    CHECK(rep.failures.empty());
    // the kernel on the enlarged window is the full vertical axis
    for (const GroupElement& k : rep.kernel) CHECK(k.as_lattice().coords[0] == 0);
    CHECK(rep.kernel.size() == 65);
    CHECK(rep.representatives.at(zpoint(1)) == z2point(1, 0));
}

TEST_CASE("absorption: halving map stays within twice the scale") {
    TheoremInstance inst = bundled_instance("floordiv-z", 12, 3);
    AbsorptionReport rep = r_neighborhood_absorption(inst);
    CHECK(rep.pass);
    CHECK(rep.R == 6);        // representative of tau = 3 is 6
    CHECK(rep.R <= 2 * inst.scale_r);
    CHECK(rep.representatives.at(zpoint(3)) == zpoint(6));
    CHECK(rep.representatives.at(zpoint(-3)) == zpoint(-5));
    CHECK(as_ints(inst.f.domain(), rep.kernel) ==
          std::vector<int64_t>{-2, -1, 0, 1, 2, 3});
}

TEST_CASE("absorption: scale one leaves only the kernel itself") {
    TheoremInstance inst = bundled_instance("floordiv-z", 6, 1);
    AbsorptionReport rep = r_neighborhood_absorption(inst);
    CHECK(rep.pass);
    // core shrinks to {e}, so T = -D + D = {-1, 0, 1}
    int64_t max_tau = 0;
    for (const auto& [tau, xi] : rep.representatives)
        max_tau = std::max(max_tau, std::abs(tau.as_lattice().coords[0]));
    CHECK(max_tau == 1);
}

TEST_CASE("identity image lies in the inverted defect set for every instance") {
    for (const std::string& name : bundled_instance_names()) {
        TheoremInstance inst = bundled_instance(name, 3, 1);
        const GroupDescriptor& G = inst.f.domain();
        const GroupDescriptor& H = inst.f.codomain();
        Ball window = inst.domain_metric.ball(identity(G), 3);
        DefectReport defect = defect_observed(inst.f, window, inst.codomain_metric);
        GroupElement fe_inv = invert(H, inst.f.eval(identity(G)));
        CHECK(std::find(defect.left_defect.begin(), defect.left_defect.end(), fe_inv) !=
              defect.left_defect.end());
    }
}

TEST_CASE("translated evaluations stay within the observed defect constant") {
    for (const std::string& name : {std::string("floordiv-z2"), std::string("brooks-ab")}) {
        TheoremInstance inst = bundled_instance(name, 2, 1);
        const GroupDescriptor& G = inst.f.domain();
        const GroupDescriptor& H = inst.f.codomain();
        Ball window = inst.domain_metric.ball(identity(G), 2);
        int C = defect_observed(inst.f, window, inst.codomain_metric).C;
        for (const GroupElement& eta : window.elements()) {
            for (const GroupElement& xi : window.elements()) {
                GroupElement eta_inv = invert(G, eta);
                GroupElement lhs = compose(H, inst.f.eval(eta_inv), inst.f.eval(xi));
                GroupElement rhs = inst.f.eval(compose(G, eta_inv, xi));
                CHECK(inst.codomain_metric.distance(lhs, rhs) <= C);
            }
        }
    }
}
