#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "loopsoup/config_io.hpp"
#include "loopsoup/loop_config.hpp"
#include "support.hpp"

using namespace loopsoup;
using loopsoup::oracle::KindMix;

namespace {

std::vector<double> sorted_lengths(const LoopDecomposition& d) {
  auto l = d.loop_lengths;
  std::sort(l.begin(), l.end());
  return l;
}

int full_delta(LoopConfig cfg, Vertex a, Vertex b, double t, EventKind kind) {
  const auto before = trace_loops(cfg).loop_count();
  cfg.insert_event(a, b, t, kind);
  return static_cast<int>(trace_loops(cfg).loop_count()) - static_cast<int>(before);
}

}  // namespace

TEST(LoopConfig, InsertAndRemove) {
  LoopConfig cfg(build_path(3), 2.0);
  const auto id = cfg.insert_event(1, 0, 0.5, EventKind::bar);
  EXPECT_EQ(cfg.event_count(), 1u);
  EXPECT_EQ(cfg.event(id).edge, (Edge{0, 1}));
  EXPECT_TRUE(cfg.has_time(0, 0.5));
  EXPECT_TRUE(cfg.has_time(1, 0.5));
  EXPECT_FALSE(cfg.has_time(2, 0.5));
  EXPECT_THROW(cfg.insert_event(0, 2, 0.7, EventKind::bar), std::invalid_argument);
  EXPECT_THROW(cfg.insert_event(0, 1, 2.0, EventKind::bar), std::invalid_argument);
  EXPECT_THROW(cfg.insert_event(0, 1, -0.1, EventKind::bar), std::invalid_argument);
  EXPECT_THROW(cfg.insert_event(1, 2, 0.5, EventKind::crossing), TimeCollision);
  cfg.insert_event(1, 2, 0.6, EventKind::crossing);
  cfg.remove_event(id);
  EXPECT_EQ(cfg.event_count(), 1u);
  EXPECT_FALSE(cfg.contains(id));
  EXPECT_THROW(cfg.remove_event(id), std::out_of_range);
  EXPECT_THROW(LoopConfig(build_path(2), 0.0), std::invalid_argument);
}

TEST(LoopConfig, IntervalBookkeeping) {
  LoopConfig cfg(build_path(2), 1.0);
  EXPECT_EQ(cfg.interval_containing(0, 0.3), 0u);
  EXPECT_EQ(cfg.interval_length(0, 0), 1.0);
  cfg.insert_event(0, 1, 0.2, EventKind::bar);
  cfg.insert_event(0, 1, 0.7, EventKind::bar);
  EXPECT_EQ(cfg.interval_containing(0, 0.5), 0u);
  EXPECT_EQ(cfg.interval_containing(0, 0.9), 1u);
  EXPECT_EQ(cfg.interval_containing(0, 0.1), 1u);
  EXPECT_NEAR(cfg.interval_length(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(cfg.interval_length(0, 1), 0.5, 1e-15);
}

TEST(TraceLoops, EmptyConfigurationHasOneLoopPerVertex) {
  const auto d = trace_loops(LoopConfig(build_path(3), 1.0));
  EXPECT_EQ(d.loop_count(), 3u);
  EXPECT_EQ(sorted_lengths(d), (std::vector<double>{1.0, 1.0, 1.0}));
}

TEST(TraceLoops, SingleCrossingJoinsTwoSites) {
  LoopConfig cfg(build_path(2), 1.0);
  cfg.insert_event(0, 1, 0.4, EventKind::crossing);
  const auto d = trace_loops(cfg);
  ASSERT_EQ(d.loop_count(), 1u);
  EXPECT_DOUBLE_EQ(d.loop_lengths[0], 2.0);
}

// Grid tracer with 10 cells, bars on boundaries 2 and 7: two loops of 10 cells.
TEST(TraceLoops, TwoBarsGiveTwoLoopsOfUnitLength) {
  LoopConfig cfg(build_path(2), 1.0);
  cfg.insert_event(0, 1, 0.2, EventKind::bar);
  cfg.insert_event(0, 1, 0.7, EventKind::bar);
  const auto d = trace_loops(cfg);
  ASSERT_EQ(d.loop_count(), 2u);
  EXPECT_NEAR(sorted_lengths(d)[0], 1.0, 1e-12);
  EXPECT_NEAR(sorted_lengths(d)[1], 1.0, 1e-12);
  const auto grid = oracle::trace_grid(2, 10, {{0, 1, 2, false}, {0, 1, 7, false}});
  EXPECT_EQ(grid.sizes, (std::vector<long>{10, 10}));
  EXPECT_FALSE(oracle::compare_with_grid(cfg, d, 10, grid));
}

TEST(TraceLoops, ParityOfCrossingsAndCountOfBarsOnTwoSites) {
  for (int k = 0; k <= 8; ++k) {
    LoopConfig crossings(build_path(2), 1.0), bars(build_path(2), 1.0);
    std::vector<oracle::GridEvent> gx, gb;
    for (int i = 0; i < k; ++i) {
      crossings.insert_event(0, 1, (i + 1) / 10.0, EventKind::crossing);
      bars.insert_event(0, 1, (i + 1) / 10.0, EventKind::bar);
      gx.push_back({0, 1, i + 1, true});
      gb.push_back({0, 1, i + 1, false});
    }
    const auto dx = trace_loops(crossings), db = trace_loops(bars);
    EXPECT_EQ(dx.loop_count(), k % 2 == 0 ? 2u : 1u) << k;
    EXPECT_EQ(db.loop_count(), k == 0 ? 2u : static_cast<std::size_t>(k)) << k;
    EXPECT_FALSE(oracle::compare_with_grid(crossings, dx, 10, oracle::trace_grid(2, 10, gx)));
    EXPECT_FALSE(oracle::compare_with_grid(bars, db, 10, oracle::trace_grid(2, 10, gb)));
  }
}

TEST(TraceLoops, LoopAtAndPairEvent) {
  LoopConfig cfg(build_path(2), 1.0);
  EXPECT_EQ(pair_event(cfg, 0, 1), PairEvent::different_loops);
  const auto id = cfg.insert_event(0, 1, 0.4, EventKind::crossing);
  cfg.insert_event(0, 1, 0.8, EventKind::crossing);
  // Two crossings: each loop uses both sites, one piece on each.
  const auto d = trace_loops(cfg);
  EXPECT_EQ(d.loop_count(), 2u);
  EXPECT_EQ(loop_at(cfg, d, 0, 0.1).loop, loop_at(cfg, d, 1, 0.5).loop);
  EXPECT_NE(loop_at(cfg, d, 0, 0.1).loop, loop_at(cfg, d, 0, 0.5).loop);
  EXPECT_EQ(pair_event(cfg, 0, 1), PairEvent::different_loops);
  EXPECT_THROW(loop_at(cfg, d, 0, 0.4), std::invalid_argument);
  EXPECT_THROW(loop_at(cfg, d, 0, 1.0), std::invalid_argument);

  cfg.remove_event(id);
  EXPECT_EQ(pair_event(cfg, 0, 1), PairEvent::same_direction);

  LoopConfig bar(build_path(2), 1.0);
  bar.insert_event(0, 1, 0.5, EventKind::bar);
  EXPECT_EQ(pair_event(bar, 0, 1), PairEvent::opposite_direction);
}

TEST(DeltaLoops, Examples) {
  LoopConfig cfg(build_path(2), 1.0);
  EXPECT_EQ(delta_loops(cfg, 0, 1, 0.5, EventKind::crossing), -1);
  EXPECT_EQ(delta_loops(cfg, 0, 1, 0.5, EventKind::bar), -1);
  cfg.insert_event(0, 1, 0.3, EventKind::crossing);
  EXPECT_EQ(delta_loops(cfg, 0, 1, 0.6, EventKind::crossing), 1);
  EXPECT_EQ(delta_loops(cfg, 0, 1, 0.7, EventKind::bar), 0);
  EXPECT_EQ(full_delta(cfg, 0, 1, 0.7, EventKind::bar), 0);
  EXPECT_EQ(cfg.event_count(), 1u);
  EXPECT_THROW(delta_loops(cfg, 0, 1, 0.3, EventKind::bar), TimeCollision);
}

TEST(DeltaLoops, RemovalExamples) {
  LoopConfig cfg(build_path(2), 1.0);
  const auto first = cfg.insert_event(0, 1, 0.3, EventKind::crossing);
  EXPECT_EQ(delta_loops_removal(cfg, first), 1);
  const auto second = cfg.insert_event(0, 1, 0.6, EventKind::crossing);
  EXPECT_EQ(delta_loops_removal(cfg, second), -1);
  EXPECT_THROW(delta_loops_removal(cfg, 99), std::out_of_range);
}

TEST(LoopProperties, AgreeWithGridTracer) {
  Rng rng(11);
  const std::vector<Graph> graphs{build_path(2), build_path(4), build_cycle(3), build_cycle(4), build_torus({3, 3}),
                                  build_complete(4)};
  for (const auto& g : graphs) {
    for (auto mix : {KindMix::crossings, KindMix::bars, KindMix::mixed}) {
      for (int rep = 0; rep < 20; ++rep) {
        const int cells = 24;
        const auto events = oracle::random_grid_events(g, cells, rng.index(3 * g.size() + 1), mix, rng);
        const auto cfg = oracle::config_from_grid(g, 1.5, cells, events);
        const auto mismatch = oracle::compare_with_grid(cfg, trace_loops(cfg), cells, oracle::trace_grid(g.size(), cells, events));
        EXPECT_FALSE(mismatch) << g.spec() << ": " << mismatch.value_or("");
      }
    }
  }
}

TEST(LoopProperties, ConservationDeltaAndOrderInvariance) {
  Rng rng(12);
  std::mt19937 shuffler(5);
  const std::vector<Graph> graphs{build_path(2), build_path(5), build_cycle(4), build_cycle(5), build_torus({3, 4})};
  for (const auto& g : graphs) {
    for (double beta : {0.5, 1.0, 3.0}) {
      for (int rep = 0; rep < 30; ++rep) {
        const auto cfg = oracle::random_config(g, beta, rng.index(4 * g.size()), KindMix::mixed, rng);
        const auto d = trace_loops(cfg);
        EXPECT_NEAR(oracle::total_length(d), beta * g.size(), 1e-9 * beta * g.size());

        std::vector<Event> events(cfg.events().begin(), cfg.events().end());
        std::shuffle(events.begin(), events.end(), shuffler);
        LoopConfig again(g, beta);
        for (const auto& e : events) again.insert_event(e.edge.b, e.edge.a, e.time, e.kind);
        EXPECT_TRUE(again == cfg);
        EXPECT_EQ(sorted_lengths(trace_loops(again)), sorted_lengths(d));

        const Edge e = g.edges()[rng.index(g.edge_count())];
        const double t = beta * rng.uniform_positive() * 0.999;
        const auto kind = rng.bernoulli(0.5) ? EventKind::crossing : EventKind::bar;
        if (cfg.has_time(e.a, t) || cfg.has_time(e.b, t)) continue;
        EXPECT_EQ(delta_loops(cfg, e.a, e.b, t, kind), full_delta(cfg, e.a, e.b, t, kind));

        for (const auto& ev : cfg.events()) {
          LoopConfig removed = cfg;
          removed.remove_event(ev.id);
          EXPECT_EQ(delta_loops_removal(cfg, ev.id),
                    static_cast<int>(trace_loops(removed).loop_count()) - static_cast<int>(d.loop_count()));
        }
      }
    }
  }
}

TEST(LoopProperties, PureTypeInsertionsSplitOrMerge) {
  Rng rng(13);
  const std::vector<Graph> graphs{build_path(2), build_path(4), build_cycle(4), build_torus({4, 4}), build_cycle(5)};
  for (const auto& g : graphs) {
    for (int rep = 0; rep < 60; ++rep) {
      const bool crossings = rep % 2 == 0;
      if (!crossings && !is_bipartite(g)) continue;
      const auto mix = crossings ? KindMix::crossings : KindMix::bars;
      const auto cfg = oracle::random_config(g, 2.0, rng.index(3 * g.size()), mix, rng);
      const Edge e = g.edges()[rng.index(g.edge_count())];
      const double t = 2.0 * rng.uniform();
      if (cfg.has_time(e.a, t) || cfg.has_time(e.b, t)) continue;
      const int delta = delta_loops(cfg, e.a, e.b, t, crossings ? EventKind::crossing : EventKind::bar);
      EXPECT_TRUE(delta == 1 || delta == -1) << g.spec();
    }
  }
}

// On an odd cycle a bar can connect two pieces of one loop traversed in the
// same direction, which rewires the loop without splitting it.
TEST(LoopProperties, BarsOnlyCanGiveZeroOnATriangle) {
  Rng rng(14);
  const auto g = build_cycle(3);
  bool found = false;
  for (int rep = 0; rep < 2000 && !found; ++rep) {
    const auto cfg = oracle::random_config(g, 1.0, rng.index(6), KindMix::bars, rng);
    const Edge e = g.edges()[rng.index(3)];
    const double t = rng.uniform();
    if (cfg.has_time(e.a, t) || cfg.has_time(e.b, t)) continue;
    if (delta_loops(cfg, e.a, e.b, t, EventKind::bar) == 0) {
      EXPECT_EQ(full_delta(cfg, e.a, e.b, t, EventKind::bar), 0);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(ConfigIo, RoundTripIsBitExact) {
  Rng rng(15);
  const auto g = build_torus({3, 3});
  const auto cfg = oracle::random_config(g, 1.0 / 3.0, 25, KindMix::mixed, rng);
  const std::string text = dump_config(cfg);
  const auto back = load_config(text);
  EXPECT_TRUE(back == cfg);
  EXPECT_EQ(dump_config(back), text);
  EXPECT_EQ(text.substr(0, text.find('\n')), "beta=0.33333333333333331 graph=torus:3x3");
  EXPECT_THROW(load_config("beta=1 graph=path:2\n0 1 0.5 Y\n"), std::runtime_error);
  EXPECT_THROW(load_config("graph=path:2\n"), std::runtime_error);
}
