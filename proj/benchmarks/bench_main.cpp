// Microbenchmarks for the hot paths: hull construction, polygon overlap,
// grid search, settling, and the spatial descent.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "scenesmith/asset.hpp"
#include "scenesmith/geometry.hpp"
#include "scenesmith/occupancy.hpp"
#include "scenesmith/physics.hpp"
#include "scenesmith/predicate.hpp"
#include "scenesmith/rng.hpp"
#include "scenesmith/scene.hpp"
#include "scenesmith/spatial.hpp"

namespace {

using namespace scenesmith;

const AssetCatalog& catalog() {
    static const AssetCatalog cat = load_catalog(std::string(SCENESMITH_FIXTURE_DIR) + "/catalog.json");
    return cat;
}

PlacedObject table_object(const std::string& id, const std::string& asset_id, double x, double y,
                          double yaw = 0.0) {
    PlacedObject obj;
    obj.id = id;
    obj.asset = catalog().find(asset_id);
    obj.pose.position = {x, y, 0.75 - obj.asset->local_aabb().min.z};
    obj.pose.yaw = yaw;
    return obj;
}

SceneState bench_scene() {
    SceneState scene;
    scene.bounds = {-0.5, 0.5, -0.5, 0.5, 0.75};
    scene.objects = {
        table_object("b0", "book_a", -0.2, -0.1),   table_object("b1", "book_a", 0.1, 0.2, 0.4),
        table_object("plate", "plate_a", 0.25, -0.2), table_object("cube", "cube_small", -0.1, 0.25),
        table_object("cup", "cup_a", 0.0, 0.0),
    };
    return scene;
}

void BM_ConvexHull(benchmark::State& state) {
    Rng rng(11);
    std::vector<Vec2> points(static_cast<size_t>(state.range(0)));
    for (Vec2& p : points) p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(convex_hull_2d(points));
    }
}
BENCHMARK(BM_ConvexHull)->Arg(16)->Arg(256);

void BM_OverlapArea(benchmark::State& state) {
    const AssetRecord* book = catalog().find("book_a");
    const Footprint a = book->footprint_world({{0.0, 0.0, 0.75}, 0.3});
    const Footprint b = book->footprint_world({{0.05, 0.04, 0.75}, 1.2});
    for (auto _ : state) {
        benchmark::DoNotOptimize(overlap_area(a, b));
    }
}
BENCHMARK(BM_OverlapArea);

void BM_Voxelize(benchmark::State& state) {
    const AssetRecord* box = catalog().find("box_open");
    for (auto _ : state) {
        benchmark::DoNotOptimize(voxelize(*box, Pose{{0, 0, 0.75}, 0.2}, 0.01));
    }
}
BENCHMARK(BM_Voxelize);

void BM_FeasibleOffsets(benchmark::State& state) {
    const SceneState scene = bench_scene();
    OccupancyGrid grid = OccupancyGrid::make({-0.5, -0.5, 0.73}, 0.01, 100, 100, 16);
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.ny; ++j)
            for (int k = 0; k < 2; ++k) grid.set(i, j, k);
    const OccupancyGrid object = voxelize(*catalog().find("book_a"), Pose{{0, 0, 0.75}, 0.0}, 0.01);
    for (auto _ : state) {
        benchmark::DoNotOptimize(feasible_offsets(grid, object));
    }
}
BENCHMARK(BM_FeasibleOffsets);

void BM_Settle(benchmark::State& state) {
    const SceneState base = bench_scene();
    QuasiStaticBackend backend(0.01);
    for (auto _ : state) {
        SceneState scene = base;
        benchmark::DoNotOptimize(backend.settle(scene, 400));
    }
}
BENCHMARK(BM_Settle);

void BM_SpatialOptimize(benchmark::State& state) {
    const PredicateProgram program = parse_program(R"([
        ["b0", "a hardcover book"], ["b1", "a hardcover book"], ["b2", "a hardcover book"],
        ["b3", "a hardcover book"], ["b4", "a hardcover book"],
        ["b0", "PLACE-ON-BASE", "root", {"x": 0.0, "y": 0.0}],
        ["b1", "PLACE-ON-BASE", "root", {"x": 0.05, "y": 0.0}],
        ["b2", "PLACE-ON-BASE", "root", {"x": -0.05, "y": 0.02}],
        ["b3", "PLACE-ON-BASE", "root", {"x": 0.02, "y": -0.04}],
        ["b4", "PLACE-ON-BASE", "root", {"x": 0.0, "y": 0.05}]
    ])");
    const Bounds2D bounds{-0.5, 0.5, -0.5, 0.5, 0.75};
    for (auto _ : state) {
        benchmark::DoNotOptimize(optimize(program, catalog(), bounds, 17, SolveConfig{}));
    }
}
BENCHMARK(BM_SpatialOptimize);

}  // namespace

BENCHMARK_MAIN();
