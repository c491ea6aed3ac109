#include <benchmark/benchmark.h>

#include <random>

#include "sightline/viewopt.hpp"

using namespace sightline;

namespace {

OptimizationProblem ring_problem(int occluders) {
    std::vector<Cuboid> target{Cuboid::make({0, 0, 3}, {3, 3, 3})};
    std::vector<Cuboid> ring;
    for (int i = 0; i < occluders; ++i) {
        const double a = 2.0 * 3.14159265358979 * i / occluders;
        ring.push_back(
            Cuboid::make({15 * std::cos(a), 15 * std::sin(a), 4}, {2, 3, 4}, a / 3));
    }
    return OptimizationProblem::build(target, ring, EnergyConfig{});
}

void BM_total_energy(benchmark::State& state) {
    const OptimizationProblem problem = ring_problem(static_cast<int>(state.range(0)));
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> coord(-20.0, 20.0);
    for (auto _ : state) {
        const Point3 p{coord(rng), coord(rng), std::abs(coord(rng)) + 1.0};
        benchmark::DoNotOptimize(total_energy(p, problem));
    }
}
BENCHMARK(BM_total_energy)->Arg(2)->Arg(8)->Arg(24);

void BM_optimize_viewpoint(benchmark::State& state) {
    const OptimizationProblem problem = ring_problem(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        const ViewpointResult r = optimize_viewpoint(problem);
        benchmark::DoNotOptimize(r.energy);
    }
}
BENCHMARK(BM_optimize_viewpoint)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_convex_hull(benchmark::State& state) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> coord(-50.0, 50.0);
    std::vector<Vec2> pts;
    for (int i = 0; i < state.range(0); ++i) pts.push_back({coord(rng), coord(rng)});
    for (auto _ : state) {
        Polygon2 hull = convex_hull(pts);
        benchmark::DoNotOptimize(hull.vertices.data());
    }
}
BENCHMARK(BM_convex_hull)->Arg(40)->Arg(400);

void BM_signed_distance(benchmark::State& state) {
    const Polygon2 poly = convex_hull([] {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> coord(-30.0, 30.0);
        std::vector<Vec2> pts;
        for (int i = 0; i < 64; ++i) pts.push_back({coord(rng), coord(rng)});
        return pts;
    }());
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> coord(-60.0, 60.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(signed_distance({coord(rng), coord(rng)}, poly));
    }
}
BENCHMARK(BM_signed_distance);

}  // namespace
