#include <benchmark/benchmark.h>

#include <vector>

#include "sgf/caption_pipeline.hpp"
#include "sgf/graph_builder.hpp"
#include "sgf/ingest.hpp"
#include "sgf/synthetic.hpp"

namespace {

sgf::SyntheticScene make_scene(std::size_t total_points) {
  sgf::SyntheticOptions opts;
  opts.min_objects = 10;
  opts.max_objects = 12;
  opts.total_points = total_points;
  return sgf::generate_scene(7, 0, opts);
}

void BM_BuildGraph(benchmark::State& state) {
  const auto s = make_scene(0);
  const sgf::GraphConfig cfg;
  const auto refinement = sgf::RefinementMap::builtin();
  for (auto _ : state) benchmark::DoNotOptimize(sgf::build_scene_graph(s.scene, cfg, refinement));
  state.counters["nodes"] = static_cast<double>(s.scene.instances.size());
}
BENCHMARK(BM_BuildGraph)->Unit(benchmark::kMicrosecond);

void BM_Subsample(benchmark::State& state) {
  const auto s = make_scene(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sgf::subsample(s.scene, 240000, 1));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Subsample)->Arg(300000)->Unit(benchmark::kMillisecond);

void BM_DepthBuffer(benchmark::State& state) {
  const auto s = make_scene(50000);
  std::vector<sgf::Vec3> pts;
  for (const auto& p : s.scene.points) pts.push_back(p.position());
  for (auto _ : state) benchmark::DoNotOptimize(sgf::DepthBuffer(s.cameras.front(), pts));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * pts.size()));
}
BENCHMARK(BM_DepthBuffer)->Unit(benchmark::kMicrosecond);

void BM_CaptionContext(benchmark::State& state) {
  const auto s = make_scene(50000);
  for (auto _ : state) benchmark::DoNotOptimize(sgf::CaptionContext(s.scene, s.cameras, {}));
}
BENCHMARK(BM_CaptionContext)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
