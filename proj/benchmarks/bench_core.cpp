#include <benchmark/benchmark.h>

#include <cforge/asdim.hpp>
#include <cforge/coarse_check.hpp>

using namespace cforge;

namespace {

// Ball enumeration on the plane lattice: closed-form norms, so this
// measures member generation and canonical ordering.
void BM_ball_lattice2(benchmark::State& state) {
    GroupDescriptor G = GroupDescriptor::parse("lattice:2");
    ProperMetric M = ProperMetric::word_metric(G);
    const int radius = static_cast<int>(state.range(0));
    for (auto _ : state) {
        Ball b = M.ball(identity(G), radius);
        benchmark::DoNotOptimize(b.members.size());
    }
    state.counters["elements"] = static_cast<double>(M.ball(identity(G), radius).members.size());
}
BENCHMARK(BM_ball_lattice2)->Arg(20)->Arg(40)->Arg(60);

// Ball enumeration by breadth-first search on the affine group, where no
// closed form applies.
void BM_ball_bs12(benchmark::State& state) {
    GroupDescriptor G = GroupDescriptor::parse("bs12");
    ProperMetric M = ProperMetric::word_metric(G);
    const int radius = static_cast<int>(state.range(0));
    for (auto _ : state) {
        Ball b = M.ball(identity(G), radius);
        benchmark::DoNotOptimize(b.members.size());
    }
    state.counters["elements"] = static_cast<double>(M.ball(identity(G), radius).members.size());
}
BENCHMARK(BM_ball_bs12)->Arg(6)->Arg(8)->Arg(10);

// The quadratic pair scan behind every defect set.
void BM_defect_scan(benchmark::State& state) {
    GroupDescriptor Z = GroupDescriptor::parse("lattice:1");
    ProperMetric M = ProperMetric::word_metric(Z);
    Quasimorphism f = Quasimorphism::parse("floordiv:q=2", Z);
    const int radius = static_cast<int>(state.range(0));
    Ball window = M.ball(identity(Z), radius);
    for (auto _ : state) {
        DefectReport rep = defect_observed(f, window, M);
        benchmark::DoNotOptimize(rep.C);
    }
}
BENCHMARK(BM_defect_scan)->Arg(20)->Arg(40)->Arg(80);

// Counting-rule evaluation dominates free-group instances.
void BM_defect_scan_counting(benchmark::State& state) {
    GroupDescriptor F2 = GroupDescriptor::parse("free:2");
    ProperMetric M = ProperMetric::word_metric(F2);
    Quasimorphism f = Quasimorphism::parse("brooks:w=ab", F2);
    ProperMetric Mcod = ProperMetric::word_metric(f.codomain());
    const int radius = static_cast<int>(state.range(0));
    Ball window = M.ball(identity(F2), radius);
    for (auto _ : state) {
        DefectReport rep = defect_observed(f, window, Mcod);
        benchmark::DoNotOptimize(rep.C);
    }
}
BENCHMARK(BM_defect_scan_counting)->Arg(3)->Arg(4)->Arg(5);

// Fixed-pattern plane cover; linear in the window.
void BM_lattice_cover(benchmark::State& state) {
    GroupDescriptor Z2 = GroupDescriptor::parse("lattice:2");
    ProperMetric M = ProperMetric::word_metric(Z2);
    Ball window = M.ball(identity(Z2), 60);
    const int r = static_cast<int>(state.range(0));
    for (auto _ : state) {
        CoverColoring c = lattice_cover(2, window, r);
        benchmark::DoNotOptimize(c.clusters.size());
    }
}
BENCHMARK(BM_lattice_cover)->Arg(4)->Arg(8)->Arg(16);

// Best-of greedy cover search, the dominant cost of per-scale reports.
void BM_greedy_cover(benchmark::State& state) {
    GroupDescriptor Z2 = GroupDescriptor::parse("lattice:2");
    ProperMetric M = ProperMetric::word_metric(Z2);
    const int radius = static_cast<int>(state.range(0));
    std::vector<GroupElement> points = M.ball(identity(Z2), radius).elements();
    for (auto _ : state) {
        GreedyCoverResult res = greedy_cover(points, M, 4, 3, 32);
        benchmark::DoNotOptimize(res.colors);
    }
}
BENCHMARK(BM_greedy_cover)->Arg(12)->Arg(20)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
