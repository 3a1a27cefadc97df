#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "cforge/asdim.hpp"
#include "helpers.hpp"

using namespace cforge;

namespace {

GroupElement zpoint(int64_t v) { return GroupElement{LatticeVec{{v}}}; }
GroupElement z2point(int64_t a, int64_t b) { return GroupElement{LatticeVec{{a, b}}}; }

std::vector<GroupElement> zrange(int64_t lo, int64_t hi) {
    std::vector<GroupElement> out;
    for (int64_t v = lo; v <= hi; ++v) out.push_back(zpoint(v));
    return out;
}

// interval pattern [32k, 32k+16] clipped to [-100, 100]: one color, gaps of
// exactly 16 between consecutive intervals
CoverColoring interval_pattern(int scale_r) {
    CoverColoring c;
    c.scale_r = scale_r;
    c.bound_D = 16;
    for (int64_t k = -3; k <= 3; ++k) {
        std::vector<GroupElement> members = zrange(32 * k, std::min<int64_t>(32 * k + 16, 100));
        c.points.insert(c.points.end(), members.begin(), members.end());
        c.clusters.emplace_back(std::move(members), 0);
    }
    std::sort(c.points.begin(), c.points.end(), ElementLess{});
    return c;
}

bool same_cover(const CoverColoring& a, const CoverColoring& b) {
    if (a.clusters.size() != b.clusters.size()) return false;
    for (std::size_t i = 0; i < a.clusters.size(); ++i) {
        if (a.clusters[i].second != b.clusters[i].second) return false;
        const auto& ma = a.clusters[i].first;
        const auto& mb = b.clusters[i].first;
        if (ma.size() != mb.size()) return false;
        for (std::size_t j = 0; j < ma.size(); ++j)
            if (element_compare(ma[j], mb[j]) != 0) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("cover validator: interval pattern valid down to its exact gap") {
    auto Z = GroupDescriptor::lattice(1);
    ProperMetric M = ProperMetric::word_metric(Z);

    CHECK(validate_coloring(interval_pattern(8), M).pass);
    // consecutive intervals sit exactly 16 apart, so scale 16 still passes
    CHECK(validate_coloring(interval_pattern(16), M).pass);

    CoverValidation bad = validate_coloring(interval_pattern(17), M);
    CHECK_FALSE(bad.pass);
    REQUIRE(bad.violations.size() == 6);  // six consecutive same-color pairs
    for (const CoverViolation& v : bad.violations) {
        CHECK(v.kind == CoverViolationKind::SameColorTooClose);
        CHECK(v.value == 16);
        CHECK(v.cluster_b == v.cluster_a + 1);
        REQUIRE(v.witness_a.has_value());
        REQUIRE(v.witness_b.has_value());
        CHECK(M.distance(*v.witness_a, *v.witness_b) == 16);
    }
}

TEST_CASE("cover validator: each defect kind is reported with a witness") {
    auto Z = GroupDescriptor::lattice(1);
    ProperMetric M = ProperMetric::word_metric(Z);

    CoverColoring c;
    c.points = zrange(0, 10);
    c.scale_r = 2;
    c.bound_D = 16;

    SUBCASE("uncovered point") {
        c.clusters.emplace_back(zrange(0, 9), 0);
        CoverValidation v = validate_coloring(c, M);
        CHECK_FALSE(v.pass);
        REQUIRE(v.violations.size() == 1);
        CHECK(v.violations[0].kind == CoverViolationKind::Uncovered);
        CHECK(element_compare(*v.violations[0].witness_a, zpoint(10)) == 0);
    }
    SUBCASE("stray member") {
        c.clusters.emplace_back(zrange(0, 11), 0);
        CoverValidation v = validate_coloring(c, M);
        CHECK_FALSE(v.pass);
        REQUIRE(v.violations.size() == 1);
        CHECK(v.violations[0].kind == CoverViolationKind::StrayMember);
        CHECK(element_compare(*v.violations[0].witness_a, zpoint(11)) == 0);
    }
    SUBCASE("diameter over the bound, with the extremal pair as witness") {
        c.bound_D = 9;
        c.clusters.emplace_back(zrange(0, 10), 0);
        CoverValidation v = validate_coloring(c, M);
        CHECK_FALSE(v.pass);
        REQUIRE(v.violations.size() == 1);
        CHECK(v.violations[0].kind == CoverViolationKind::DiameterExceeded);
        CHECK(v.violations[0].value == 10);
        CHECK(element_compare(*v.violations[0].witness_a, zpoint(0)) == 0);
        CHECK(element_compare(*v.violations[0].witness_b, zpoint(10)) == 0);
    }
    SUBCASE("negative color") {
        c.clusters.emplace_back(zrange(0, 10), -1);
        CoverValidation v = validate_coloring(c, M);
        CHECK_FALSE(v.pass);
        REQUIRE(v.violations.size() == 1);
        CHECK(v.violations[0].kind == CoverViolationKind::BadColor);
    }
    SUBCASE("bad scale is a caller error") {
        c.clusters.emplace_back(zrange(0, 10), 0);
        c.scale_r = 0;
        CHECK_THROWS_AS(validate_coloring(c, M), std::invalid_argument);
    }
}

TEST_CASE("line skeleton: alternating blocks with diameter bound 2r") {
    auto Z = GroupDescriptor::lattice(1);
    ProperMetric M = ProperMetric::word_metric(Z);
    Ball w = M.ball(identity(Z), 100);

    CoverColoring c = lattice_cover(1, w, 8);
    CHECK(c.color_count() == 2);
    CHECK(c.bound_D == 16);
    CHECK(c.clusters.size() == 14);
    CHECK(c.scale_r == 8);
    CHECK(validate_coloring(c, M).pass);

    // at r=1 the blocks are {4k, 4k+1} and {4k+2, 4k+3}
    CoverColoring c1 = lattice_cover(1, w, 1);
    CHECK(c1.color_count() == 2);
    CHECK(c1.bound_D == 2);
    for (const auto& [members, color] : c1.clusters) {
        CHECK(members.size() <= 2);
        int64_t base = members.front().as_lattice().coords[0];
        int64_t rel = ((base % 4) + 4) % 4;
        CHECK(color == (rel < 2 ? 0 : 1));
    }

    CHECK_THROWS_AS(lattice_cover(1, w, 0), std::invalid_argument);
    CHECK_THROWS_AS(lattice_cover(3, w, 2), std::invalid_argument);
    CHECK_THROWS_AS(lattice_cover(2, w, 2), std::invalid_argument);  // rank mismatch
}

TEST_CASE("plane skeleton: three colors, D <= 8r, validator-clean at every scale") {
    auto Z2 = GroupDescriptor::lattice(2);
    ProperMetric M = ProperMetric::word_metric(Z2);
    Ball w = M.ball(identity(Z2), 60);

    CoverColoring c = lattice_cover(2, w, 4);
    CHECK(c.color_count() == 3);
    CHECK(c.bound_D == 32);
    CHECK(c.clusters.size() == 69);
    CHECK(validate_coloring(c, M).pass);

    for (int r = 1; r <= 6; ++r) {
        CoverColoring cr = lattice_cover(2, w, r);
        CHECK(cr.color_count() == 3);
        CHECK(cr.bound_D == 8 * r);
        // construction self-validates; check the observed diameters anyway
        CHECK(validate_coloring(cr, M).pass);
    }
}

TEST_CASE("greedy covering: skeleton wins on the line and reports honest failure") {
    auto Z = GroupDescriptor::lattice(1);
    auto Z2 = GroupDescriptor::lattice(2);
    ProperMetric MZ = ProperMetric::word_metric(Z);
    ProperMetric MZ2 = ProperMetric::word_metric(Z2);

    GreedyCoverResult line = greedy_cover(MZ.ball(identity(Z), 100).elements(), MZ, 8, 2, 32);
    CHECK(line.success);
    CHECK(line.colors == 2);
    CHECK(line.strategy == "skeleton");
    CHECK(line.cover.bound_D == 15);  // observed diameter of a 2r block

    // a window of the plane cannot be 2-colored at scale 4 with D <= 40;
    // the failure is reported, not thrown, and the best cover is kept
    GreedyCoverResult plane = greedy_cover(MZ2.ball(identity(Z2), 30).elements(), MZ2, 4, 2, 40);
    CHECK_FALSE(plane.success);
    CHECK(plane.colors == 3);
    CHECK(plane.strategy == "skeleton");
    CHECK(validate_coloring(plane.cover, MZ2).pass);

    CHECK_THROWS_AS(greedy_cover({zpoint(0)}, MZ, 0, 1, 4), std::invalid_argument);
    CHECK_THROWS_AS(greedy_cover({zpoint(0)}, MZ, 1, 0, 4), std::invalid_argument);
    CHECK_THROWS_AS(greedy_cover({zpoint(0)}, MZ, 1, 1, -1), std::invalid_argument);
}

TEST_CASE("greedy covering: small sets collapse to single clusters") {
    auto Z = GroupDescriptor::lattice(1);
    ProperMetric M = ProperMetric::word_metric(Z);

    // diameter 5 fits the budget 8, so one cluster and one color suffice
    GreedyCoverResult g = greedy_cover(zrange(-2, 3), M, 4, 1, 8);
    CHECK(g.success);
    CHECK(g.colors == 1);
    CHECK(g.cover.clusters.size() == 1);
    CHECK(g.cover.bound_D == 5);

    GreedyCoverResult single = greedy_cover({zpoint(7)}, M, 4, 1, 0);
    CHECK(single.success);
    CHECK(single.colors == 1);
    CHECK(single.cover.bound_D == 0);

    GreedyCoverResult none = greedy_cover({}, M, 4, 1, 0);
    CHECK(none.success);
    CHECK(none.colors == 0);
    CHECK(none.strategy == "empty");
}

TEST_CASE("greedy covering works without lattice structure") {
    auto F2 = GroupDescriptor::free_group(2);
    ProperMetric M = ProperMetric::word_metric(F2);
    GreedyCoverResult g = greedy_cover(M.ball(identity(F2), 3).elements(), M, 1, 16, 2);
    CHECK(g.success);
    CHECK(g.colors == 1);
    CHECK(g.cover.bound_D == 2);
    CHECK(g.cover.clusters.size() == 13);
    CHECK(validate_coloring(g.cover, M).pass);
}

TEST_CASE("greedy covering is deterministic and monotone in the scale") {
    auto Z2 = GroupDescriptor::lattice(2);
    ProperMetric M = ProperMetric::word_metric(Z2);
    std::vector<GroupElement> pts = M.ball(identity(Z2), 30).elements();

    GreedyCoverResult a = greedy_cover(pts, M, 4, 16, 40, 7);
    GreedyCoverResult b = greedy_cover(pts, M, 4, 16, 40, 7);
    CHECK(a.colors == b.colors);
    CHECK(a.strategy == b.strategy);
    CHECK(same_cover(a.cover, b.cover));

    // at a fixed diameter budget the color count cannot rise as the scale
    // shrinks; these exact counts pin the observed behavior
    std::vector<int> expected{3, 3, 2, 1};
    std::vector<int> scales{8, 4, 2, 1};
    int prev = 16;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        GreedyCoverResult g = greedy_cover(pts, M, scales[i], 16, 40);
        CHECK(g.colors == expected[i]);
        CHECK(g.colors <= prev);
        prev = g.colors;
    }
}

TEST_CASE("uniform profiles share one bound across a family") {
    auto Z2 = GroupDescriptor::lattice(2);
    ProperMetric M = ProperMetric::word_metric(Z2);

    UniformProfile singles =
        uniform_profile({{z2point(0, 0)}, {z2point(3, -2)}}, M, 4, 1, 0);
    CHECK(singles.success);
    CHECK(singles.D == 0);
    CHECK(singles.colors == 1);
    CHECK(singles.colorings.size() == 2);

    // fiber strips of the paired floor-division instance, two colors each
    TheoremInstance inst = bundled_instance("floordiv-z2", 16, 2);
    std::vector<std::vector<GroupElement>> fibers;
    for (auto& [lam, fib] : fiber_family(inst)) fibers.push_back(fib);
    CHECK(fibers.size() == 33);
    UniformProfile strips = uniform_profile(fibers, inst.domain_metric, 2, 8, 16);
    CHECK(strips.success);
    CHECK(strips.colors == 2);
    CHECK(strips.D == 16);
    for (const CoverColoring& coloring : strips.colorings) {
        CHECK(coloring.bound_D <= strips.D);
        CHECK(validate_coloring(coloring, inst.domain_metric).pass);
    }

    // an impossible member flags the profile without throwing
    UniformProfile hard =
        uniform_profile({M.ball(identity(Z2), 30).elements()}, M, 4, 2, 40);
    CHECK_FALSE(hard.success);
    REQUIRE(hard.failed_member.has_value());
    CHECK(*hard.failed_member == 0);
    CHECK(hard.colorings.size() == 1);
}

TEST_CASE("control profiles sweep scales in ascending order") {
    auto Z = GroupDescriptor::lattice(1);
    ProperMetric M = ProperMetric::word_metric(Z);
    ControlProfile cp = control_profile({M.ball(identity(Z), 60).elements()}, M, {8, 4, 2}, 4);
    CHECK(cp.family_uniform);
    REQUIRE(cp.entries.size() == 3);
    std::vector<int> rs{2, 4, 8};
    std::vector<int> Ds{3, 7, 15};
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(cp.entries[i].r == rs[i]);
        CHECK(cp.entries[i].D == Ds[i]);
        CHECK(cp.entries[i].colors == 2);
        REQUIRE(cp.entries[i].colorings.size() == 1);
        CHECK(validate_coloring(cp.entries[i].colorings[0], M).pass);
    }
}

TEST_CASE("map control: preimage of a small ball decomposes into bounded parts") {
    TheoremInstance inst = bundled_instance("floordiv-z2", 16, 2);
    Ball window = inst.domain_metric.ball(identity(inst.f.domain()), 16);
    std::vector<GroupElement> A;
    for (const GroupElement& xi : window.elements())
        if (inst.codomain_metric.norm(inst.f.eval(xi)) <= 2) A.push_back(xi);
    CHECK(A.size() == 110);

    MapControlProfile prof = map_control_profile(inst.f, A, {{2, 4}}, 4, 16,
                                                 inst.domain_metric, inst.codomain_metric);
    CHECK(prof.skipped.empty());
    REQUIRE(prof.entries.size() == 1);
    CHECK(prof.entries.begin()->second == 12);
    REQUIRE(prof.decompositions.size() == 1);
    CHECK(prof.decompositions.begin()->second.size() == 2);

    MapControlReport rep =
        map_control_check(inst.f, A, 2, 4, prof.decompositions.begin()->second, 4, 12,
                          inst.domain_metric, inst.codomain_metric);
    CHECK(rep.pass);
    CHECK(rep.precondition_ok);
    CHECK(rep.image_diameter == 4);
    CHECK(rep.parts == 2);
    CHECK(rep.D_f_observed == 12);
}

TEST_CASE("map control: precondition failures are reported apart from defects") {
    auto Z = GroupDescriptor::lattice(1);
    auto Z2 = GroupDescriptor::lattice(2);
    ProperMetric MZ = ProperMetric::word_metric(Z);
    ProperMetric MZ2 = ProperMetric::word_metric(Z2);
    Quasimorphism proj = Quasimorphism::parse("hom:a->a;b->e", Z2, Z);

    std::vector<GroupElement> line;
    for (int64_t m = -16; m <= 16; ++m) line.push_back(z2point(m, 0));

    // the image is too wide for the cap: precondition fails, yet the
    // decomposition itself is clean
    MapControlReport wide = map_control_check(proj, line, 2, 4, {line}, 1, 40, MZ2, MZ);
    CHECK_FALSE(wide.pass);
    CHECK_FALSE(wide.precondition_ok);
    CHECK(wide.image_diameter == 32);
    CHECK(wide.violations.empty());

    // with a generous cap the precondition holds but the single part is one
    // long chain component, exceeding its diameter bound
    MapControlReport chain = map_control_check(proj, line, 2, 40, {line}, 1, 10, MZ2, MZ);
    CHECK_FALSE(chain.pass);
    CHECK(chain.precondition_ok);
    CHECK(chain.D_f_observed == 32);
    REQUIRE(chain.violations.size() == 1);
    CHECK(chain.violations[0].kind == CoverViolationKind::DiameterExceeded);
    CHECK(chain.violations[0].value == 32);

    // part-count, coverage, and stray-member defects
    std::vector<GroupElement> a{z2point(0, 0)}, b{z2point(5, 0)}, c{z2point(10, 0)};
    MapControlReport parts = map_control_check(proj, line, 2, 40, {a, b, c}, 2, 40, MZ2, MZ);
    CHECK_FALSE(parts.pass);
    bool too_many = false, uncovered = false;
    for (const CoverViolation& v : parts.violations) {
        too_many = too_many || (v.kind == CoverViolationKind::TooManyParts && v.value == 3);
        uncovered = uncovered || v.kind == CoverViolationKind::Uncovered;
    }
    CHECK(too_many);
    CHECK(uncovered);

    MapControlReport stray =
        map_control_check(proj, a, 2, 40, {{z2point(0, 0), z2point(1, 1)}}, 1, 40, MZ2, MZ);
    CHECK_FALSE(stray.pass);
    REQUIRE(stray.violations.size() == 1);
    CHECK(stray.violations[0].kind == CoverViolationKind::StrayMember);
}

TEST_CASE("pullback assembly transports a line cover through the map") {
    TheoremInstance inst = bundled_instance("floordiv-z2", 16, 2);
    auto Z = GroupDescriptor::lattice(1);
    Ball yball = inst.codomain_metric.ball(identity(Z), 16);

    PullbackResult pb = pullback_assembly(inst, lattice_cover(1, yball, 2), 2);
    CHECK(pb.pass);
    CHECK(pb.violations.empty());
    CHECK(pb.y_colors == 2);
    CHECK(pb.fiber_colors == 2);
    CHECK(pb.cover.color_count() == 4);
    CHECK(pb.cover.color_count() <= pb.y_colors * pb.fiber_colors);
    CHECK(pb.cover.scale_r == 2);
    CHECK(pb.cover.bound_D == 19);
    CHECK(validate_coloring(pb.cover, inst.domain_metric).pass);

    // a cover at scale 1 sits below the observed displacement of scale-2
    // moves, which the precondition rejects
    CHECK_THROWS_AS(pullback_assembly(inst, lattice_cover(1, yball, 1), 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(pullback_assembly(inst, lattice_cover(1, yball, 2), 0),
                    std::invalid_argument);
}

TEST_CASE("pullback of a constant map collapses to the fiber coloring") {
    auto Z = GroupDescriptor::lattice(1);
    auto Z2 = GroupDescriptor::lattice(2);
    Quasimorphism zero = Quasimorphism::parse("hom:a->e;b->e", Z2, Z);
    TheoremInstance flat =
        make_instance("flat", std::move(zero), ApproximateGroup::whole(Z), 8, 2);
    Ball yball = flat.codomain_metric.ball(identity(Z), 8);

    PullbackResult pb = pullback_assembly(flat, lattice_cover(1, yball, 2), 2);
    CHECK(pb.pass);
    // only one codomain cluster meets the image, so the combined coloring
    // is exactly the fiber coloring of the whole window
    CHECK(pb.cover.color_count() == pb.fiber_colors);
    CHECK(pb.fiber_colors == 1);
}

TEST_CASE("hurewicz rows: line instance stays at two against two plus one") {
    TheoremInstance inst = bundled_instance("floordiv-z", 60, 2);
    HurewiczReport rep = hurewicz_report(inst, {2, 4, 8});
    CHECK(rep.all_rows_pass);
    CHECK(rep.instance_name == "floordiv-z");
    CHECK(rep.window_radius == 60);
    CHECK_FALSE(rep.scale_policy.empty());
    REQUIRE(rep.rows.size() == 3);
    for (const HurewiczScaleRow& row : rep.rows) {
        CHECK(row.colors_X == 2);
        CHECK(row.colors_Y == 2);
        CHECK(row.colors_K == 1);
        CHECK(row.inequality_holds);
        CHECK(row.lipschitz_pass);
        CHECK(row.containment_pass);
        CHECK(row.absorption_pass);
        CHECK(row.pullback_valid);
        CHECK(row.pullback_colors == 2);
        CHECK(row.C_obs == 1);
        CHECK(row.D_K == 5);  // the kernel {-2..3} is one cluster
        CHECK(row.pullback_scale_Y == row.r);
    }
    CHECK(rep.rows[0].D_X == 3);
    CHECK(rep.rows[1].D_X == 7);
    CHECK(rep.rows[2].D_X == 15);

    CHECK_THROWS_AS(hurewicz_report(inst, {}), std::invalid_argument);
    CHECK_THROWS_AS(hurewicz_report(inst, {0}), std::invalid_argument);
}

TEST_CASE("hurewicz rows: projection instance needs three colors at scale four") {
    TheoremInstance inst = bundled_instance("hom-z2", 24, 2);
    HurewiczReport rep = hurewicz_report(inst, {2, 4, 2});  // duplicates collapse
    CHECK(rep.all_rows_pass);
    REQUIRE(rep.rows.size() == 2);

    CHECK(rep.rows[0].r == 2);
    CHECK(rep.rows[0].colors_X == 2);  // a checkerboard works at scale 2
    CHECK(rep.rows[0].colors_Y == 2);
    CHECK(rep.rows[0].colors_K == 2);
    CHECK(rep.rows[0].pullback_colors == 4);

    CHECK(rep.rows[1].r == 4);
    CHECK(rep.rows[1].colors_X == 3);
    CHECK(rep.rows[1].colors_Y == 2);
    CHECK(rep.rows[1].colors_K == 2);
    CHECK(rep.rows[1].inequality_holds);  // 3 <= 2 + 2 - 1
    CHECK(rep.rows[1].pullback_colors == 4);
    CHECK(rep.rows[1].D_Y == 7);
    CHECK(rep.rows[1].C_obs == 0);
}

TEST_CASE("hurewicz rows: paired floor division matches the projection bound") {
    TheoremInstance inst = bundled_instance("floordiv-z2", 40, 2);
    HurewiczReport rep = hurewicz_report(inst, {2, 4});
    CHECK(rep.all_rows_pass);
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[0].colors_X == 2);
    CHECK(rep.rows[0].colors_K == 2);
    CHECK(rep.rows[1].colors_X == 3);
    CHECK(rep.rows[1].colors_Y == 2);
    CHECK(rep.rows[1].colors_K == 2);
    CHECK(rep.rows[1].inequality_holds);
    CHECK(rep.rows[1].C_obs == 1);
    for (const HurewiczScaleRow& row : rep.rows) {
        CHECK(row.pullback_valid);
        CHECK(row.pullback_colors == 4);
        CHECK(row.pullback_scale_Y == row.r);
    }
}
