#include <doctest.h>

#include <cforge/metric.hpp>

#include "helpers.hpp"

using namespace cforge;
using testutil::brute_force_components;
using testutil::brute_force_norm;

TEST_CASE("norms match the word examples") {
  auto F2 = GroupDescriptor::free_group(2);
  auto MF = ProperMetric::word_metric(F2);
  CHECK(MF.norm(parse_element(F2, "a b -a")) == 3);

  auto BS = GroupDescriptor::bs12();
  auto MB = ProperMetric::word_metric(BS);
  auto half = parse_element(BS, "(1/2, 0)");
  CHECK(MB.norm(half) == 3);
  CHECK(brute_force_norm(BS, half, 4) == 3);

  auto Z2 = GroupDescriptor::lattice(2);
  auto MZ = ProperMetric::word_metric(Z2);
  CHECK(MZ.norm(parse_element(Z2, "(2,-1)")) == 3);

  auto P = GroupDescriptor::parse("product(lattice:2,bs12)");
  auto MP = ProperMetric::word_metric(P);
  auto g = parse_element(P, "((2,-1); (1/2, 0))");
  CHECK(MP.norm(g) == 6);
  CHECK(brute_force_norm(P, g, 6) == 6);
}

TEST_CASE("ball cardinalities match closed forms") {
  auto Z2 = GroupDescriptor::lattice(2);
  auto MZ = ProperMetric::word_metric(Z2);
  for (int r = 0; r <= 12; ++r)
    CHECK(MZ.ball(identity(Z2), r).size() == static_cast<size_t>(2 * r * r + 2 * r + 1));
  CHECK(MZ.ball(identity(Z2), 2).size() == 13);

  auto F2 = GroupDescriptor::free_group(2);
  auto MF = ProperMetric::word_metric(F2);
  // |B(r)| = 2*3^r - 1 in the free group of rank 2
  size_t pow3 = 1;
  for (int r = 0; r <= 6; ++r) {
    CHECK(MF.ball(identity(F2), r).size() == 2 * pow3 - 1);
    pow3 *= 3;
  }
  CHECK(MF.ball(identity(F2), 2).size() == 17);
}

TEST_CASE("balls are left translates and symmetric") {
  auto Z2 = GroupDescriptor::lattice(2);
  auto MZ = ProperMetric::word_metric(Z2);
  auto c = parse_element(Z2, "(3,-2)");
  auto b0 = MZ.ball(identity(Z2), 3);
  auto bc = MZ.ball(c, 3);
  REQUIRE(b0.size() == bc.size());
  // translate-and-compare, plus the inversion symmetry m -> c (c^-1 m)^-1
  for (const auto& [m, d] : bc.members) {
    auto pulled = compose(Z2, invert(Z2, c), m);
    CHECK(b0.distance_to_center(pulled) == d);
    auto mirrored = compose(Z2, c, invert(Z2, pulled));
    CHECK(bc.contains(mirrored));
    CHECK(bc.distance_to_center(mirrored) == d);
  }
  CHECK_THROWS_AS(MZ.ball(identity(Z2), -1), std::invalid_argument);
}

TEST_CASE("bs12 ball respects the brute-force norm oracle") {
  auto BS = GroupDescriptor::bs12();
  auto M = ProperMetric::word_metric(BS);
  auto ball = M.ball(identity(BS), 4);
  for (const auto& [g, d] : ball.members) CHECK(brute_force_norm(BS, g, 4) == d);
}

TEST_CASE("triangle inequality on small windows") {
  for (const char* name : {"lattice:2", "bs12", "free:2"}) {
    auto G = GroupDescriptor::parse(name);
    auto M = ProperMetric::word_metric(G);
    auto pts = M.ball(identity(G), name == std::string("free:2") ? 3 : 4).elements();
    for (size_t i = 0; i < pts.size(); i += 7)
      for (size_t j = 0; j < pts.size(); j += 5)
        for (size_t k = 0; k < pts.size(); k += 3) {
          int dij = M.distance(pts[i], pts[j]);
          int djk = M.distance(pts[j], pts[k]);
          int dik = M.distance(pts[i], pts[k]);
          CHECK(dik <= dij + djk);
        }
  }
}

TEST_CASE("r_components splits the documented example") {
  auto Z = GroupDescriptor::lattice(1);
  auto M = ProperMetric::word_metric(Z);
  auto pts = testutil::lattice_points(Z, {0, 1, 2, 10, 11});
  auto blocks = r_components(M, pts, 1);
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0] == testutil::lattice_points(Z, {0, 1, 2}));
  CHECK(blocks[1] == testutil::lattice_points(Z, {10, 11}));

  auto oracle = brute_force_components(M, pts, 1);
  CHECK(blocks == oracle);

  // one block at a scale bridging the gap
  CHECK(r_components(M, pts, 8).size() == 1);
  CHECK_THROWS_AS(r_components(M, pts, -1), std::invalid_argument);
}

TEST_CASE("r_components agrees with the union-find oracle off the line") {
  auto Z2 = GroupDescriptor::lattice(2);
  auto M = ProperMetric::word_metric(Z2);
  std::vector<GroupElement> pts;
  for (int x = -4; x <= 4; ++x)
    for (int y = -4; y <= 4; ++y)
      if ((x * x + y * y) % 3 != 1)
        pts.push_back(GroupElement(LatticeVec{{x, y}}));
  for (int r = 1; r <= 3; ++r)
    CHECK(r_components(M, pts, r) == brute_force_components(M, pts, r));
}

TEST_CASE("open neighborhoods") {
  auto Z = GroupDescriptor::lattice(1);
  auto M = ProperMetric::word_metric(Z);
  auto window = M.ball(identity(Z), 5);
  auto zero = testutil::lattice_points(Z, {0});
  CHECK(neighborhood(M, zero, 1, window) == testutil::lattice_points(Z, {0}));
  CHECK(neighborhood(M, zero, 2, window) == testutil::lattice_points(Z, {-1, 0, 1}));
  CHECK(neighborhood(M, zero, 0, window).empty());
  auto two = testutil::lattice_points(Z, {-5, 5});
  CHECK(neighborhood(M, two, 2, window) == testutil::lattice_points(Z, {-5, -4, 4, 5}));
}

TEST_CASE("metric_compare against a doubled generating set") {
  auto Z = GroupDescriptor::lattice(1);
  auto M1 = ProperMetric::word_metric(Z);
  auto M2 = ProperMetric::word_metric(
      Z, {parse_element(Z, "(1)"), parse_element(Z, "(2)")});
  auto window = M1.ball(identity(Z), 20).elements();
  auto profile = metric_compare(M1, M2, window);
  REQUIRE(!profile.samples.empty());
  for (const auto& [t, lo] : profile.phi_minus) CHECK(lo >= (t + 1) / 2);
  for (const auto& s : profile.samples) CHECK(s.s_max == (s.t + 1) / 2);
  CHECK(profile.coarse_surjectivity == 0);
}

TEST_CASE("metric_compare upper envelope shrinks when generators are added") {
  auto F2 = GroupDescriptor::free_group(2);
  auto M1 = ProperMetric::word_metric(F2);
  auto M2 = ProperMetric::word_metric(
      F2, {parse_element(F2, "a"), parse_element(F2, "b"), parse_element(F2, "ab")});
  auto window = M1.ball(identity(F2), 3).elements();
  auto profile = metric_compare(M1, M2, window);
  for (const auto& [t, hi] : profile.phi_plus) CHECK(hi <= t);
  // and the envelopes are monotone
  for (size_t i = 1; i < profile.phi_plus.size(); ++i) {
    CHECK(profile.phi_plus[i].second >= profile.phi_plus[i - 1].second);
    CHECK(profile.phi_minus[i].second >= profile.phi_minus[i - 1].second);
  }
  CHECK_THROWS_AS(metric_compare(M1, ProperMetric::word_metric(GroupDescriptor::lattice(1)), window),
                  std::invalid_argument);
}

TEST_CASE("norm on custom generators falls back to search") {
  auto Z = GroupDescriptor::lattice(1);
  auto M = ProperMetric::word_metric(Z, {parse_element(Z, "(2)"), parse_element(Z, "(3)")});
  CHECK(M.norm(parse_element(Z, "(1)")) == 2);   // 3 - 2
  CHECK(M.norm(parse_element(Z, "(6)")) == 2);   // 3 + 3
  CHECK(M.norm(parse_element(Z, "(12)")) == 4);
}

TEST_CASE("budgets stop runaway enumeration") {
  auto F2 = GroupDescriptor::free_group(2);
  auto M = ProperMetric::word_metric(F2);
  Budget tiny;
  tiny.max_elements = 10;
  CHECK_THROWS_AS(M.ball(identity(F2), 6, tiny), BudgetExceeded);
  Budget pairs;
  pairs.max_pairs = 3;
  auto window = ProperMetric::word_metric(GroupDescriptor::lattice(1))
                    .ball(identity(GroupDescriptor::lattice(1)), 4)
                    .elements();
  auto MZ = ProperMetric::word_metric(GroupDescriptor::lattice(1));
  CHECK_THROWS_AS(metric_compare(MZ, MZ, window, pairs), BudgetExceeded);
}
