#pragma once

// Shared test helpers: random configurations and the comparison against the
// cell-by-cell grid tracer.

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "discrete_tracer.hpp"
#include "loopsoup/loop_config.hpp"
#include "loopsoup/statistics.hpp"

namespace loopsoup::oracle {

enum class KindMix { crossings, bars, mixed };

inline EventKind draw_kind(KindMix mix, Rng& rng) {
  switch (mix) {
    case KindMix::crossings: return EventKind::crossing;
    case KindMix::bars: return EventKind::bar;
    default: return rng.bernoulli(0.5) ? EventKind::crossing : EventKind::bar;
  }
}

/// Uniform events on random edges at continuous times.
inline LoopConfig random_config(const Graph& g, double beta, std::size_t n_events, KindMix mix, Rng& rng) {
  LoopConfig cfg(g, beta);
  if (g.edge_count() == 0) return cfg;
  while (cfg.event_count() < n_events) {
    const Edge e = g.edges()[rng.index(g.edge_count())];
    const double t = beta * rng.uniform_positive();
    if (t >= beta || cfg.has_time(e.a, t) || cfg.has_time(e.b, t)) continue;
    cfg.insert_event(e.a, e.b, t, draw_kind(mix, rng));
  }
  return cfg;
}

/// Events on grid boundaries, at most one per (vertex, boundary).
inline std::vector<GridEvent> random_grid_events(const Graph& g, int cells, std::size_t n_events, KindMix mix, Rng& rng) {
  std::vector<GridEvent> out;
  std::set<std::pair<Vertex, int>> used;
  std::size_t attempts = 0;
  while (out.size() < n_events && attempts++ < 100 * (n_events + 1)) {
    const Edge e = g.edges()[rng.index(g.edge_count())];
    const int k = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(cells - 1)));
    if (used.contains({e.a, k}) || used.contains({e.b, k})) continue;
    used.insert({e.a, k});
    used.insert({e.b, k});
    out.push_back({e.a, e.b, k, draw_kind(mix, rng) == EventKind::crossing});
  }
  return out;
}

inline LoopConfig config_from_grid(const Graph& g, double beta, int cells, const std::vector<GridEvent>& events) {
  LoopConfig cfg(g, beta);
  const double h = beta / cells;
  for (const auto& e : events) cfg.insert_event(e.a, e.b, e.boundary * h, e.crossing ? EventKind::crossing : EventKind::bar);
  return cfg;
}

/// Empty when the library decomposition agrees with the grid tracer: same
/// loop partition of the cells, one relative orientation per loop, and equal
/// lengths. Otherwise a description of the first mismatch.
inline std::optional<std::string> compare_with_grid(const LoopConfig& cfg, const LoopDecomposition& dec, int cells,
                                                    const GridLoops& grid) {
  const std::size_t n = cfg.graph().size();
  const double h = cfg.beta() / cells;
  if (dec.loop_count() != grid.sizes.size())
    return "loop count " + std::to_string(dec.loop_count()) + " vs grid " + std::to_string(grid.sizes.size());
  std::vector<long> to_lib(grid.sizes.size(), -1);
  std::vector<int> orientation(grid.sizes.size(), 0);
  std::vector<long> from_lib(dec.loop_count(), -1);
  for (Vertex v = 0; v < n; ++v) {
    for (int c = 0; c < cells; ++c) {
      const auto p = loop_at(cfg, dec, v, (c + 0.5) * h);
      const int gl = grid.loop_of[v * cells + c];
      const int rel = static_cast<int>(p.dir) * grid.dir_of[v * cells + c];
      if (to_lib[gl] == -1) {
        if (from_lib[p.loop] != -1) return std::string("two grid loops map to one library loop");
        to_lib[gl] = p.loop;
        from_lib[p.loop] = gl;
        orientation[gl] = rel;
      }
      if (to_lib[gl] != static_cast<long>(p.loop)) return "cell (" + std::to_string(v) + "," + std::to_string(c) + ") in a different loop";
      if (orientation[gl] != rel) return "cell (" + std::to_string(v) + "," + std::to_string(c) + ") has the wrong direction";
    }
  }
  for (std::size_t l = 0; l < grid.sizes.size(); ++l) {
    const double expected = static_cast<double>(grid.sizes[l]) * h;
    if (std::abs(dec.loop_lengths[to_lib[l]] - expected) > 1e-9 * std::max(1.0, expected))
      return "loop length " + std::to_string(dec.loop_lengths[to_lib[l]]) + " vs grid " + std::to_string(expected);
  }
  return std::nullopt;
}

inline double total_length(const LoopDecomposition& dec) {
  double s = 0.0;
  for (double l : dec.loop_lengths) s += l;
  return s;
}

}  // namespace loopsoup::oracle
