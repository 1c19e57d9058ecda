#include <benchmark/benchmark.h>

#include "apple/planner/dwa.hpp"
#include "apple/planner/global_planner.hpp"
#include "apple/planner/params.hpp"
#include "apple/world/clearance.hpp"
#include "apple/world/environment.hpp"
#include "apple/world/lidar.hpp"

using namespace apple;

namespace {

const world::OccupancyGrid& arena() {
    static const auto g = world::generate_environment(7, world::CaConfig{});
    return g;
}

void BM_Raycast(benchmark::State& state) {
    const auto& g = arena();
    const auto pose = g.center_pose(g.start());
    for (auto _ : state) benchmark::DoNotOptimize(world::raycast(g, pose, 5.0));
}
BENCHMARK(BM_Raycast);

void BM_ClearanceField(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(world::ClearanceField(arena()));
}
BENCHMARK(BM_ClearanceField);

void BM_GlobalPath(benchmark::State& state) {
    const auto& g = arena();
    const world::ClearanceField field(g);
    for (auto _ : state) {
        const planner::CostToGo ctg(field, g.goal(), 0.21);
        benchmark::DoNotOptimize(ctg.path_from(g.center_pose(g.start())));
    }
}
BENCHMARK(BM_GlobalPath);

/// One DWA decision per library entry (sample counts differ by entry).
void BM_DwaPlan(benchmark::State& state) {
    const auto& g = arena();
    const world::ClearanceField field(g);
    const planner::CostToGo ctg(field, g.goal(), 0.21);
    const auto pose = g.center_pose(g.start());
    const auto path = ctg.path_from(pose);
    const auto lib = planner::ParameterLibrary::table();
    const auto& params = lib.at(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        try {
            benchmark::DoNotOptimize(planner::dwa_plan(field, pose, path, params));
        } catch (const planner::NoFeasibleMotion&) {
        }
    }
    state.SetLabel(lib.name(static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_DwaPlan)->DenseRange(0, 6);

}  // namespace
