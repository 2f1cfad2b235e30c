#include <cmath>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "ehg/error.hpp"
#include "ehg/hypergraph.hpp"
#include "ehg/knn.hpp"
#include "ehg/random.hpp"
#include "ehg/scene.hpp"

using namespace ehg;

namespace {

MotionFeature feature(std::array<double, 3> dir, double s) {
  MotionFeature f;
  f.direction = dir;
  f.s = s;
  for (int d = 0; d < 3; ++d) f.v[d] = dir[d] * s;
  f.valid = true;
  return f;
}

SampledStream stream_of(std::vector<Event> ev, double time_scale, std::int64_t t_end = 1000,
                        SensorDims dims = {64, 64}) {
  SampledStream s;
  s.window.events = std::move(ev);
  s.window.t_start = 0;
  s.window.t_end = t_end;
  s.window.sensor = dims;
  s.time_scale = time_scale;
  return s;
}

SampledStream random_stream(Rng& rng, std::size_t n) {
  std::vector<Event> ev;
  for (std::size_t i = 0; i < n; ++i) {
    ev.push_back({static_cast<std::int32_t>(rng.below(32)), static_cast<std::int32_t>(rng.below(32)),
                  static_cast<std::int64_t>(rng.below(5000)), 1});
  }
  std::sort(ev.begin(), ev.end());
  return stream_of(std::move(ev), 0.01, 5000, {32, 32});
}

}  // namespace

TEST_CASE("transition probability examples") {
  MvfConfig cfg;
  cfg.sigma_v = 1.0;
  cfg.sigma_s = 1.0;
  const auto x = feature({1, 0, 0}, 1.0);
  CHECK(transition_prob(x, x, cfg) == 1.0);
  CHECK(transition_prob(x, feature({0, 1, 0}, 1.0), cfg) ==
        doctest::Approx(0.36787944117144232).epsilon(1e-14));
  CHECK(transition_prob(x, feature({-1, 0, 0}, 1.0), cfg) ==
        doctest::Approx(0.13533528323661269).epsilon(1e-14));
  cfg.sigma_s = 2.0;
  CHECK(transition_prob(x, feature({1, 0, 0}, 3.0), cfg) ==
        doctest::Approx(0.36787944117144232).epsilon(1e-14));
  CHECK_THROWS_AS(transition_prob(x, MotionFeature{}, cfg), DomainError);
}

TEST_CASE("transition probability properties") {
  Rng rng(21);
  auto unit = [&] {
    std::array<double, 3> d{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double n = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    for (auto& v : d) v /= n;
    return d;
  };
  for (int t = 0; t < 200; ++t) {
    MvfConfig cfg;
    cfg.sigma_v = rng.uniform(0.1, 3.0);
    cfg.sigma_s = rng.uniform(0.1, 3.0);
    const auto a = feature(unit(), rng.uniform(0.1, 10));
    const auto b = feature(unit(), rng.uniform(0.1, 10));
    const double g = transition_prob(a, b, cfg);
    CHECK(g > 0.0);
    CHECK(g <= 1.0);
    CHECK(g == transition_prob(b, a, cfg));
    MvfConfig wider = cfg;
    wider.sigma_v *= 1.5;
    wider.sigma_s *= 1.5;
    CHECK(transition_prob(a, b, wider) >= g);
  }
}

TEST_CASE("motion features point back to the nearest earlier event") {
  const auto s = stream_of({{0, 0, 0, 1}, {1, 0, 10, 1}, {3, 0, 20, 1}}, 0.1);
  const auto f = motion_features(s);
  REQUIRE(f.size() == 3);
  CHECK(!f[0].valid);
  REQUIRE(f[1].valid);
  CHECK(f[1].v[0] == doctest::Approx(1.0));
  CHECK(f[1].v[2] == doctest::Approx(1.0));
  CHECK(f[1].s == doctest::Approx(std::sqrt(2.0)));
  REQUIRE(f[2].valid);
  CHECK(f[2].v[0] == doctest::Approx(2.0));
  CHECK(f[2].direction[0] == doctest::Approx(2.0 / std::sqrt(5.0)));

  // Simultaneous events have no earlier neighbour.
  const auto same = motion_features(stream_of({{0, 0, 5, 1}, {4, 4, 5, 1}}, 0.1));
  CHECK(!same[0].valid);
  CHECK(!same[1].valid);
}

TEST_CASE("hyperedges are exactly the components of above-threshold candidate links") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_stream(rng, 40 + rng.below(200));
    const auto f = motion_features(s);
    MvfConfig cfg;
    cfg.gamma = rng.uniform(0.05, 0.9);
    cfg.candidate_k = 1 + rng.below(10);
    const auto g = build_hyperedges(f, s, cfg);

    // Oracle: brute-force candidate pairs, then label propagation to a fixed point.
    std::vector<std::uint32_t> valid;
    for (std::uint32_t i = 0; i < f.size(); ++i) {
      if (f[i].valid) valid.push_back(i);
    }
    std::vector<Point3> pts;
    const auto all = embed_events(s.retained(), s.time_scale);
    for (auto v : valid) pts.push_back(all[v]);
    std::vector<std::uint32_t> comp(f.size());
    std::iota(comp.begin(), comp.end(), 0U);
    std::set<std::pair<std::uint32_t, std::uint32_t>> linked;
    for (std::size_t a = 0; a < valid.size(); ++a) {
      for (const auto& nb : brute_force_knn(pts, a, cfg.candidate_k)) {
        const auto i = valid[a], j = valid[nb.index];
        if (transition_prob(f[i], f[j], cfg) > cfg.gamma) linked.insert(std::minmax(i, j));
      }
    }
    for (bool changed = true; changed;) {
      changed = false;
      for (auto [i, j] : linked) {
        const auto m = std::min(comp[i], comp[j]);
        if (comp[i] != m || comp[j] != m) {
          comp[i] = comp[j] = m;
          changed = true;
        }
      }
    }
    std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
    for (auto v : valid) groups[comp[v]].push_back(v);
    std::vector<std::vector<std::uint32_t>> expected;
    for (auto& [k, members] : groups) {
      if (members.size() >= 2) expected.push_back(members);
    }
    std::sort(expected.begin(), expected.end());
    CHECK(g.hyperedges == expected);

    CHECK(g.links.size() == linked.size());
    for (const auto& l : g.links) {
      CHECK(l.gamma > cfg.gamma);
      CHECK(linked.count({l.i, l.j}) == 1);
    }
    for (std::uint32_t h = 0; h < g.num_hyperedges(); ++h) {
      CHECK(g.hyperedges[h].size() >= 2);
      for (auto v : g.hyperedges[h]) {
        CHECK(f[v].valid);
        REQUIRE(g.incidence[v].size() == 1);
        CHECK(g.incidence[v][0] == h);
      }
    }
  }
}

TEST_CASE("raising the threshold only splits hyperedges") {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_stream(rng, 150);
    const auto f = motion_features(s);
    MvfConfig lo;
    lo.gamma = rng.uniform(0.05, 0.5);
    MvfConfig hi = lo;
    hi.gamma = lo.gamma + rng.uniform(0.0, 0.4);
    const auto coarse = build_hyperedges(f, s, lo);
    const auto fine = build_hyperedges(f, s, hi);
    for (const auto& e : fine.hyperedges) {
      REQUIRE(!coarse.incidence[e[0]].empty());
      const auto h = coarse.incidence[e[0]][0];
      for (auto v : e) {
        REQUIRE(coarse.incidence[v].size() == 1);
        CHECK(coarse.incidence[v][0] == h);
      }
    }
  }
}

TEST_CASE("a threshold of one admits no links") {
  Rng rng(2);
  const auto s = random_stream(rng, 100);
  MvfConfig cfg;
  cfg.gamma = 1.0;
  const auto g = build_hyperedges(motion_features(s), s, cfg);
  CHECK(g.links.empty());
  CHECK(g.hyperedges.empty());

  cfg.gamma = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("two separated objects are not merged") {
  SceneSpec spec;
  spec.sensor = {64, 64};
  spec.duration = 0.05;
  spec.seed = 3;
  spec.objects.push_back({10.0, 12.0, 600.0, 0.0, 3.0, 3000.0});
  spec.objects.push_back({54.0, 52.0, -600.0, 0.0, 3.0, 3000.0});
  const auto scene = synthesize_scene(spec);
  auto s = stream_of(scene.events, 0.0, 50000, spec.sensor);
  s.time_scale = spec.sensor.diagonal() / 50000.0;
  const auto g = build_hyperedges(motion_features(s), s, MvfConfig{});
  REQUIRE(g.num_hyperedges() > 0);
  for (double p : hyperedge_purity(g, scene.labels)) CHECK(p == 1.0);
}

TEST_CASE("pairwise graph example and symmetry") {
  const auto s = stream_of({{0, 0, 0, 1}, {1, 0, 0, 1}, {5, 0, 0, 1}}, 1.0);
  const auto adj = build_pairwise_graph(s, 1);
  CHECK(adj.rows[0] == std::vector<std::uint32_t>{0, 1});
  CHECK(adj.rows[1] == std::vector<std::uint32_t>{0, 1, 2});
  CHECK(adj.rows[2] == std::vector<std::uint32_t>{1, 2});
  CHECK(adj.nnz() == 7);

  CHECK(build_pairwise_graph(stream_of({{3, 3, 3, 1}}, 1.0), 4).rows[0] ==
        std::vector<std::uint32_t>{0});

  Rng rng(9);
  const auto r = random_stream(rng, 300);
  const auto big = build_pairwise_graph(r, 6);
  for (std::uint32_t i = 0; i < big.size(); ++i) {
    CHECK(big.contains(i, i));
    CHECK(big.rows[i].size() >= 7);
    for (auto j : big.rows[i]) CHECK(big.contains(j, i));
  }
}

TEST_CASE("initial node and edge features") {
  const auto s = stream_of({{2, 3, 10, 1}, {4, 6, 30, -1}}, 1.0, 100, {8, 12});
  SparseAdjacency adj;
  adj.rows = {{0, 1}, {0, 1}};
  const auto f = init_features(s, adj);
  REQUIRE(f.nodes.size() == 2);
  CHECK(f.nodes[0] == std::array<double, 4>{1.0, 0.5, 0.25, 0.25});
  CHECK(f.nodes[1] == std::array<double, 4>{-1.0, 1.0, 0.5, 0.5});
  REQUIRE(f.edges.size() == 4);
  CHECK(f.edges[1].i == 0);
  CHECK(f.edges[1].j == 1);
  CHECK(f.edges[1].delta[0] == doctest::Approx(0.25));
  CHECK(f.edges[1].delta[1] == doctest::Approx(0.25));
  CHECK(f.edges[1].delta[2] == doctest::Approx(0.2));
  CHECK(f.edges[0].delta == std::array<double, 3>{0, 0, 0});
}

TEST_CASE("purity and jsonl output") {
  Hypergraph g;
  g.vertices.resize(5);
  g.hyperedges = {{0, 1, 2}, {3, 4}};
  const std::vector<int> labels{0, 0, 1, 2, 2};
  const auto p = hyperedge_purity(g, labels);
  CHECK(p[0] == doctest::Approx(2.0 / 3.0));
  CHECK(p[1] == 1.0);
  CHECK(*mean_purity(g, labels) == doctest::Approx(5.0 / 6.0));
  CHECK_THROWS_AS(hyperedge_purity(g, {0, 1}), ParameterError);
  CHECK(!mean_purity(Hypergraph{}, {}));

  std::ostringstream out;
  write_hypergraph_jsonl(out, g, 7);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  const auto header = nlohmann::json::parse(line);
  CHECK(header["M"] == 5);
  CHECK(header["zeta"] == 2);
  CHECK(header["window"] == 7);
  std::getline(in, line);
  CHECK(nlohmann::json::parse(line) == nlohmann::json({0, 1, 2}));
}
