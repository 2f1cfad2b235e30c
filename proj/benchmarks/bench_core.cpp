#include <benchmark/benchmark.h>

#include "ehg/hyperbolic.hpp"
#include "ehg/knn.hpp"
#include "ehg/network.hpp"
#include "ehg/pipeline.hpp"
#include "ehg/random.hpp"
#include "ehg/scene.hpp"

using namespace ehg;

namespace {

std::vector<double> random_ball_point(Rng& rng, std::size_t dim, double c) {
  std::vector<double> x(dim);
  for (auto& v : x) v = rng.uniform(-1, 1);
  const double s = 0.8 / std::sqrt(c * hyperbolic::squared_norm<double>(x));
  for (auto& v : x) v *= s;
  return x;
}

EventWindow scene_window(std::size_t objects, double noise_rate) {
  SceneSpec spec;
  spec.sensor = {128, 128};
  spec.duration = 0.05;
  spec.noise_rate = noise_rate;
  spec.seed = 1;
  for (std::size_t i = 0; i < objects; ++i) {
    const double y = 16.0 + 96.0 * static_cast<double>(i) / static_cast<double>(objects);
    spec.objects.push_back({10.0, y, 900.0, 200.0, 6.0, 6000.0});
  }
  const auto s = synthesize_scene(spec);
  return whole_window(s.events, spec.sensor);
}

void BM_MobiusAdd(benchmark::State& state) {
  Rng rng(1);
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto x = random_ball_point(rng, dim, 1.0);
  const auto y = random_ball_point(rng, dim, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(hyperbolic::mobius_add<double>(x, y, 1.0));
}
BENCHMARK(BM_MobiusAdd)->Arg(2)->Arg(16)->Arg(64);

void BM_ExpLogOrigin(benchmark::State& state) {
  Rng rng(2);
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto x = random_ball_point(rng, dim, 1.0);
  for (auto _ : state) {
    auto v = hyperbolic::log_map_origin<double>(x, 1.0);
    benchmark::DoNotOptimize(hyperbolic::exp_map_origin<double>(v, 1.0));
  }
}
BENCHMARK(BM_ExpLogOrigin)->Arg(2)->Arg(16)->Arg(64);

void BM_MobiusMatvec(benchmark::State& state) {
  Rng rng(3);
  const auto dim = static_cast<std::size_t>(state.range(0));
  Matrix w(dim, dim);
  for (auto& e : w.data) e = rng.uniform(-1, 1);
  const hyperbolic::ManifoldPoint x{random_ball_point(rng, dim, 1.0), hyperbolic::Curvature(1.0)};
  for (auto _ : state) benchmark::DoNotOptimize(hyperbolic::mobius_matvec(w, x));
}
BENCHMARK(BM_MobiusMatvec)->Arg(16)->Arg(64);

void BM_KnnQueryAll(benchmark::State& state) {
  Rng rng(4);
  std::vector<Point3> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pts) p = {rng.uniform(0, 128), rng.uniform(0, 128), rng.uniform(0, 128)};
  const KnnIndex index(pts);
  for (auto _ : state) {
    for (std::size_t i = 0; i < index.size(); ++i) benchmark::DoNotOptimize(index.query(i, 8));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KnnQueryAll)->Arg(500)->Arg(5000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_Sample(benchmark::State& state) {
  const auto w = scene_window(static_cast<std::size_t>(state.range(0)), 20000.0);
  SamplingConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(sample(w, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.size()));
}
BENCHMARK(BM_Sample)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Hyperedges(benchmark::State& state) {
  const auto w = scene_window(static_cast<std::size_t>(state.range(0)), 20000.0);
  SamplingConfig sc;
  const auto s = sample(w, sc);
  const auto feats = motion_features(s);
  MvfConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(build_hyperedges(feats, s, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.retained().size()));
}
BENCHMARK(BM_Hyperedges)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_PrepareAndPredict(benchmark::State& state) {
  MotionDatasetSpec ds;
  ds.per_class = 1;
  ds.seed = 3;
  const auto data = make_motion_dataset(ds);
  NetworkConfig nc;
  nc.aggregation_source = AggregationSource::hypergraph;
  const auto model = Model::initialize(nc);
  PipelineConfig pc;
  for (auto _ : state) {
    const auto p = prepare_window(data[0].window, pc, nc.aggregation_source, 1);
    benchmark::DoNotOptimize(predict_logits(model, p.input));
  }
}
BENCHMARK(BM_PrepareAndPredict)->Unit(benchmark::kMillisecond);

void BM_Gradient(benchmark::State& state) {
  MotionDatasetSpec ds;
  ds.per_class = 1;
  ds.seed = 3;
  const auto data = make_motion_dataset(ds);
  NetworkConfig nc;
  const auto model = Model::initialize(nc);
  const auto p = prepare_window(data[0].window, PipelineConfig{}, nc.aggregation_source, 1);
  for (auto _ : state) benchmark::DoNotOptimize(gradients(model, p.input, data[0].label));
}
BENCHMARK(BM_Gradient)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
