#include <benchmark/benchmark.h>

#include "sightline/raster.hpp"

using namespace sightline;

namespace {

Building box(const std::string& id, Role role, const Point3& c, const Vec3& h) {
    Building b;
    b.id = id;
    b.role = role;
    b.cuboids.push_back(Cuboid::make(c, h));
    return b;
}

Scene city_block(int occluders) {
    Scene scene;
    scene.origin = {1.35, 103.82};
    scene.buildings.push_back(box("target", Role::Landmark, {0, 0, 15}, {6, 6, 15}));
    for (int i = 0; i < occluders; ++i) {
        const double a = 2.0 * 3.14159265358979 * i / occluders;
        scene.buildings.push_back(box("b" + std::to_string(i), Role::Static,
                                      {40 * std::cos(a), 40 * std::sin(a), 10},
                                      {4, 6, 10}));
    }
    return scene;
}

void BM_render_mask(benchmark::State& state) {
    const Scene scene = city_block(12);
    Camera cam;
    cam.position = {120, 30, 25};
    cam.look_at = {0, 0, 15};
    const int resolution = static_cast<int>(state.range(0));
    for (auto _ : state) {
        MaskBuffer mask =
            render_mask(scene, cam, "target", RenderMode::FullScene, resolution);
        benchmark::DoNotOptimize(mask.pixels.data());
    }
    state.SetItemsProcessed(state.iterations() * resolution * resolution);
}
BENCHMARK(BM_render_mask)->Arg(250)->Arg(500)->Arg(1000);

void BM_count_pixels(benchmark::State& state) {
    const Scene scene = city_block(12);
    Camera cam;
    cam.position = {120, 30, 25};
    cam.look_at = {0, 0, 15};
    const int resolution = static_cast<int>(state.range(0));
    const MaskBuffer alone =
        render_mask(scene, cam, "target", RenderMode::TargetOnly, resolution);
    const MaskBuffer full =
        render_mask(scene, cam, "target", RenderMode::FullScene, resolution);
    for (auto _ : state) {
        PixelCounts counts = count_pixels(alone, full);
        benchmark::DoNotOptimize(counts.target_only);
    }
    state.SetItemsProcessed(state.iterations() * resolution * resolution);
}
BENCHMARK(BM_count_pixels)->Arg(500)->Arg(1000);

void BM_visibility(benchmark::State& state) {
    const Scene scene = city_block(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        const double v = visibility(scene, {120, 30, 25}, "target", 500);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(BM_visibility)->Arg(4)->Arg(12)->Arg(24);

}  // namespace
