#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ehg/checkpoint.hpp"
#include "ehg/error.hpp"
#include "ehg/pipeline.hpp"

using namespace ehg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("ehg-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

MotionDatasetSpec tiny_spec() {
  MotionDatasetSpec s;
  s.per_class = 4;
  s.seed = 12;
  return s;
}

}  // namespace

TEST_CASE("motion dataset shape and determinism") {
  const auto spec = tiny_spec();
  const auto a = make_motion_dataset(spec);
  REQUIRE(a.size() == 12);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].label == i % 3);
    CHECK(a[i].window.duration() == 50000);
    CHECK(is_stream_ordered(a[i].window.events));
    CHECK(a[i].window.size() > 50);
  }
  const auto b = make_motion_dataset(spec);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].window.events == b[i].window.events);

  auto bad = spec;
  bad.classes = 5;
  CHECK_THROWS_AS(make_motion_dataset(bad), ParameterError);
}

TEST_CASE("object polarity separates the motion directions") {
  // Leading-edge polarity makes mean(p * x) follow the horizontal direction.
  auto spec = tiny_spec();
  spec.noise_rate = 0.0;
  const auto data = make_motion_dataset(spec);
  for (const auto& lw : data) {
    double px = 0.0, py = 0.0;
    double mx = 0.0, my = 0.0;
    for (const auto& e : lw.window.events) {
      mx += e.x;
      my += e.y;
    }
    mx /= static_cast<double>(lw.window.size());
    my /= static_cast<double>(lw.window.size());
    for (const auto& e : lw.window.events) {
      px += e.p * (e.x - mx);
      py += e.p * (e.y - my);
    }
    if (lw.label == 0) CHECK(px > 0.0);
    if (lw.label == 1) CHECK(px < 0.0);
    if (lw.label == 2) CHECK(py < 0.0);
  }
}

TEST_CASE("dataset directory round trip") {
  const auto dir = scratch("dataset");
  const auto data = make_motion_dataset(tiny_spec());
  write_dataset(dir, data);
  const auto back = read_dataset(dir);
  REQUIRE(back.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(back[i].label == data[i].label);
    CHECK(back[i].window.events == data[i].window.events);
    CHECK(back[i].window.t_end == data[i].window.t_end);
    CHECK(back[i].window.sensor.width == 64);
  }
  CHECK_THROWS_AS(read_dataset(dir / "missing"), IoError);
  {
    std::ofstream m(dir / "manifest.csv", std::ios::app);
    m << "w00000.csv,oops\n";
  }
  CHECK_THROWS_AS(read_dataset(dir), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("truncation") {
  EventWindow w;
  for (int i = 0; i < 10; ++i) w.events.push_back({i, 0, i * 10, 1});
  w.t_end = 100;
  const auto p = truncate_window(w, 4, Truncation::prefix, 0);
  REQUIRE(p.size() == 4);
  CHECK(p.events.back().t == 30);
  CHECK(p.t_end == 100);
  const auto r = truncate_window(w, 4, Truncation::random, 3);
  REQUIRE(r.size() == 4);
  CHECK(is_stream_ordered(r.events));
  CHECK(r.events == truncate_window(w, 4, Truncation::random, 3).events);
  CHECK(truncate_window(w, 20, Truncation::random, 3).events == w.events);
  CHECK(truncate_window(w, 0, Truncation::prefix, 3).empty());
}

TEST_CASE("prepared windows are consistent") {
  const auto data = make_motion_dataset(tiny_spec());
  PipelineConfig cfg;
  for (auto src : {AggregationSource::pairwise, AggregationSource::hypergraph, AggregationSource::both}) {
    const auto p = prepare_window(data[0].window, cfg, src, 1);
    const auto m = p.sampled.retained().size();
    REQUIRE(m > 0);
    CHECK(p.input.features.size() == m);
    CHECK(p.input.local.size() == m);
    CHECK(p.input.global.size() == m);
    CHECK(p.hypergraph.num_vertices() == m);
    for (const auto& f : p.input.features) {
      CHECK(f.size() == 4);
      CHECK(std::abs(f[0]) == 1.0);
      CHECK(f[1] > 0.0);
      CHECK(f[1] <= 1.0);
    }
  }
  EventWindow empty;
  empty.t_end = 10;
  CHECK(prepare_window(empty, cfg, AggregationSource::pairwise, 0).input.features.empty());
}

TEST_CASE("checkpoint round trip preserves predictions") {
  const auto dir = scratch("checkpoint");
  NetworkConfig nc;
  nc.seed = 4;
  nc.cross_layer_fusion = true;
  nc.aggregation_source = AggregationSource::both;
  Checkpoint ck{Model::initialize(nc), PipelineConfig{}};
  ck.pipeline.sampling.alpha = 33.5;
  ck.model.params[3] = 0.1 + 1e-17;  // needs full precision
  save_checkpoint(dir / "m.json", ck);
  const auto back = load_checkpoint(dir / "m.json");
  CHECK(back.model.params == ck.model.params);
  CHECK(back.model.config.cross_layer_fusion);
  CHECK(back.model.config.aggregation_source == AggregationSource::both);
  CHECK(back.pipeline.sampling.alpha == 33.5);

  const auto data = make_motion_dataset(tiny_spec());
  const auto p = prepare_window(data[1].window, ck.pipeline, nc.aggregation_source, 9);
  CHECK(predict_logits(back.model, p.input) == predict_logits(ck.model, p.input));

  {
    std::ofstream bad(dir / "bad.json");
    bad << "{\"format\": \"something-else\"}";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.json"), FormatError);
  {
    std::ofstream bad(dir / "bad.json");
    bad << "{ not json";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.json"), FormatError);
  CHECK_THROWS_AS(load_checkpoint(dir / "absent.json"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("ablation switches") {
  PipelineConfig pc;
  NetworkConfig nc;
  apply_ablation(false, true, false, pc, nc);
  CHECK(pc.sampling.mode == SamplingMode::uniform);
  CHECK(nc.aggregation_source == AggregationSource::hypergraph);
  CHECK(nc.space == Space::euclidean);
  apply_ablation(true, false, true, pc, nc);
  CHECK(pc.sampling.mode == SamplingMode::adaptive);
  CHECK(nc.aggregation_source == AggregationSource::pairwise);
  CHECK(nc.space == Space::dual);
}
