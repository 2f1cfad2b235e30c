#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "ehg/error.hpp"
#include "ehg/events.hpp"
#include "ehg/random.hpp"
#include "ehg/scene.hpp"

using namespace ehg;

TEST_CASE("parse_events sorts by time") {
  const auto ev = parse_events("3,4,1000,1\n1,2,500,-1");
  REQUIRE(ev.size() == 2);
  CHECK(ev[0] == Event{1, 2, 500, -1});
  CHECK(ev[1] == Event{3, 4, 1000, 1});
}

TEST_CASE("parse_events on empty input") {
  CHECK(parse_events("").empty());
  CHECK(parse_events("\n\n").empty());
}

TEST_CASE("parse_events rejects bad polarity with its line number") {
  try {
    parse_events("3,4,1000,2");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 1);
  }
  try {
    parse_events("1,1,1,1\n1,1,2,0\n");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("parse_events error paths") {
  CHECK_THROWS_AS(parse_events("1,2,3"), FormatError);
  CHECK_THROWS_AS(parse_events("1,2,3,1,5"), FormatError);
  CHECK_THROWS_AS(parse_events("a,2,3,1"), FormatError);
  CHECK_THROWS_AS(parse_events("-1,2,3,1"), FormatError);
  CHECK_THROWS_AS(parse_events("1,2,-3,1"), FormatError);
}

TEST_CASE("zero-one polarity needs the explicit option") {
  ParseOptions opts;
  opts.polarity_zero_one = true;
  const auto ev = parse_events("0,0,5,0\n0,0,6,1\n", opts);
  CHECK(ev[0].p == -1);
  CHECK(ev[1].p == 1);
  CHECK_THROWS_AS(parse_events("0,0,5,-1\n", opts), FormatError);
}

TEST_CASE("jsonl ingestion") {
  ParseOptions opts;
  opts.format = EventFormat::jsonl;
  const auto ev = parse_events("{\"x\":3,\"y\":4,\"t\":9,\"p\":1}\n{\"x\":1,\"y\":2,\"t\":7,\"p\":-1}\n", opts);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0] == Event{1, 2, 7, -1});
  CHECK_THROWS_AS(parse_events("{\"x\":3,\"y\":4,\"t\":9}\n", opts), FormatError);
  CHECK_THROWS_AS(parse_events("{\"x\":3,\"y\":4,\"t\":9,\"p\":0.5}\n", opts), FormatError);
  CHECK_THROWS_AS(parse_events("not json\n", opts), FormatError);
}

TEST_CASE("ties are broken by x, y, p") {
  const auto ev = parse_events("5,1,10,1\n2,9,10,1\n2,3,10,1\n2,3,10,-1\n");
  CHECK(ev[0] == Event{2, 3, 10, -1});
  CHECK(ev[1] == Event{2, 3, 10, 1});
  CHECK(ev[2] == Event{2, 9, 10, 1});
  CHECK(ev[3] == Event{5, 1, 10, 1});
}

TEST_CASE("ingestion is idempotent under serialize/parse") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::ostringstream text;
    const auto n = rng.below(50);
    for (std::uint64_t i = 0; i < n; ++i) {
      text << rng.below(64) << ',' << rng.below(64) << ',' << rng.below(1000) << ','
           << (rng.bernoulli(0.5) ? 1 : -1) << '\n';
    }
    for (auto fmt : {EventFormat::csv, EventFormat::jsonl}) {
      const auto first = parse_events(text.str());
      std::ostringstream out;
      write_events(out, first, fmt);
      ParseOptions opts;
      opts.format = fmt;
      CHECK(parse_events(out.str(), opts) == first);
    }
  }
}

TEST_CASE("window_stream examples") {
  const std::vector<Event> a{{0, 0, 0, 1}, {0, 0, 5, 1}, {0, 0, 10, 1}};
  auto w = window_stream(a, 10);
  REQUIRE(w.size() == 2);
  CHECK(w[0].t_start == 0);
  CHECK(w[0].t_end == 10);
  CHECK(w[0].size() == 2);
  CHECK(w[1].size() == 1);

  w = window_stream({{1, 1, 123, 1}}, 7);
  REQUIRE(w.size() == 1);
  CHECK(w[0].size() == 1);

  w = window_stream({{0, 0, 0, 1}, {0, 0, 30, 1}}, 10);
  REQUIRE(w.size() == 4);
  CHECK(w[1].empty());
  CHECK(w[2].empty());
  CHECK(w[3].size() == 1);
  CHECK(w[3].t_start == 30);

  CHECK(window_stream({}, 10).empty());
  CHECK_THROWS_AS(window_stream(a, 0), ParameterError);
  CHECK_THROWS_AS(window_stream(a, -5), ParameterError);
  CHECK_THROWS_AS(window_stream({{200, 0, 0, 1}}, 10, SensorDims{128, 128}), DomainError);
}

TEST_CASE("windowing partitions the stream") {
  Rng rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<Event> ev;
    const auto n = 1 + rng.below(200);
    for (std::uint64_t i = 0; i < n; ++i) {
      ev.push_back({static_cast<std::int32_t>(rng.below(128)), static_cast<std::int32_t>(rng.below(128)),
                    static_cast<std::int64_t>(rng.below(100000)), rng.bernoulli(0.5) ? std::int8_t{1} : std::int8_t{-1}});
    }
    std::sort(ev.begin(), ev.end());
    const auto dt = static_cast<std::int64_t>(1 + rng.below(20000));
    std::vector<Event> joined;
    for (const auto& w : window_stream(ev, dt)) {
      CHECK(w.duration() == dt);
      for (const auto& e : w.events) {
        CHECK(e.t >= w.t_start);
        CHECK(e.t < w.t_end);
      }
      joined.insert(joined.end(), w.events.begin(), w.events.end());
    }
    CHECK(joined == ev);
  }
}

namespace {

SceneSpec one_object_scene(std::uint64_t seed) {
  SceneSpec s;
  s.sensor = {128, 128};
  s.duration = 0.1;
  s.seed = seed;
  s.objects.push_back({20.0, 64.0, 500.0, 40.0, 4.0, 5000.0});
  return s;
}

}  // namespace

TEST_CASE("single-object scene stays inside the moving disc") {
  const auto spec = one_object_scene(5);
  const auto out = synthesize_scene(spec);
  REQUIRE(out.events.size() > 100);
  CHECK(out.events.size() == out.labels.size());
  CHECK(is_stream_ordered(out.events));
  const auto& o = spec.objects[0];
  for (const auto& e : out.events) {
    // Timestamps are floored to microseconds, so allow one microsecond of travel.
    const double t = static_cast<double>(e.t) * 1e-6;
    const double best = std::min(std::hypot(e.x - (o.x0 + o.vx * t), e.y - (o.y0 + o.vy * t)),
                                 std::hypot(e.x - (o.x0 + o.vx * (t + 1e-6)), e.y - (o.y0 + o.vy * (t + 1e-6))));
    CHECK(best <= o.radius + 1e-3);
  }
}

TEST_CASE("moving object polarity marks the leading edge") {
  auto spec = one_object_scene(9);
  spec.objects[0].vy = 0.0;
  const auto out = synthesize_scene(spec);
  const auto& o = spec.objects[0];
  int agree = 0, total = 0;
  for (const auto& e : out.events) {
    const double t = static_cast<double>(e.t) * 1e-6;
    const double off = e.x - (o.x0 + o.vx * t);
    if (std::abs(off) < 0.6) continue;
    ++total;
    agree += (off > 0) == (e.p > 0);
  }
  CHECK(agree == total);
}

TEST_CASE("noise count is Poisson-concentrated") {
  SceneSpec s;
  s.sensor = {64, 64};
  s.noise_rate = 20000.0;
  s.duration = 0.5;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    s.seed = seed;
    const double mean = s.noise_rate * s.duration;
    const auto n = static_cast<double>(synthesize_scene(s).events.size());
    CHECK(std::abs(n - mean) <= 4.0 * std::sqrt(mean));
  }
}

TEST_CASE("scene generation is deterministic under seed") {
  auto spec = one_object_scene(42);
  spec.noise_rate = 3000.0;
  const auto a = synthesize_scene(spec);
  const auto b = synthesize_scene(spec);
  std::ostringstream sa, sb;
  write_events(sa, a.events);
  write_events(sb, b.events);
  CHECK(sa.str() == sb.str());
  CHECK(a.labels == b.labels);
  spec.seed = 43;
  CHECK(synthesize_scene(spec).events != a.events);
}

TEST_CASE("events leaving the sensor are dropped") {
  SceneSpec s;
  s.sensor = {32, 32};
  s.duration = 0.1;
  s.objects.push_back({30.0, 16.0, 400.0, 0.0, 2.0, 4000.0});
  const auto out = synthesize_scene(s);
  for (const auto& e : out.events) {
    CHECK(e.x < 32);
    CHECK(e.y < 32);
  }
  CHECK(out.events.size() < 400);
}

TEST_CASE("scene spec file round trip and validation") {
  const std::string text =
      "# two objects\nsensor_width = 64\nsensor_height = 48\nduration = 0.25\n"
      "noise_rate = 100\nseed = 17\nobject = 10 20 30 -40 3 1000\nobject = 1 2 3 4 5 6\n";
  const auto spec = parse_scene_spec(text);
  CHECK(spec.sensor.width == 64);
  CHECK(spec.sensor.height == 48);
  CHECK(spec.duration == doctest::Approx(0.25));
  CHECK(spec.seed == 17);
  REQUIRE(spec.objects.size() == 2);
  CHECK(spec.objects[0].vy == doctest::Approx(-40));
  std::ostringstream out;
  write_scene_spec(out, spec);
  const auto again = parse_scene_spec(out.str());
  CHECK(again.objects.size() == 2);
  CHECK(again.objects[1].event_rate == doctest::Approx(6));

  CHECK_THROWS_AS(parse_scene_spec("colour = red\n"), FormatError);
  CHECK_THROWS_AS(parse_scene_spec("object = 1 2 3\n"), FormatError);
  CHECK_THROWS_AS(synthesize_scene(parse_scene_spec("duration = 0\n")), ParameterError);
  CHECK_THROWS_AS(synthesize_scene(parse_scene_spec("noise_rate = -1\n")), ParameterError);
}
