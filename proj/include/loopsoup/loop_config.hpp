#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "loopsoup/graph.hpp"

namespace loopsoup {

enum class EventKind : std::uint8_t { crossing, bar };

/// Vertical direction of travel along a time circle.
enum class Direction : std::int8_t { up = 1, down = -1 };

constexpr Direction flipped(Direction d) { return d == Direction::up ? Direction::down : Direction::up; }

using EventId = std::uint64_t;

struct Event {
  Edge edge;
  double time;
  EventKind kind;
  EventId id;
};

/// One side of an event as seen from a vertex's time circle.
struct Endpoint {
  double time;
  Vertex other;
  EventKind kind;
  EventId id;
};

/// Raised when an insertion would put two events at the same time on a
/// vertex. The continuous process never does this; samplers redraw the time.
class TimeCollision : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Realization of the marked Poisson process on E x [0, beta).
///
/// Events live in a dense array (uniform selection in O(1)) and every vertex
/// keeps its incident endpoints sorted by time. Times are unique per vertex.
class LoopConfig {
 public:
  LoopConfig(Graph graph, double beta) : graph_(std::move(graph)), beta_(beta), endpoints_(graph_.size()) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("LoopConfig: beta must be positive and finite");
  }

  const Graph& graph() const { return graph_; }
  double beta() const { return beta_; }
  std::size_t event_count() const { return events_.size(); }
  std::span<const Event> events() const { return events_; }
  const Event& event_at(std::size_t index) const { return events_.at(index); }
  std::span<const Endpoint> endpoints(Vertex v) const { return endpoints_.at(v); }

  const Event& event(EventId id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) throw std::out_of_range("LoopConfig: unknown event id");
    return events_[it->second];
  }

  bool contains(EventId id) const { return index_.contains(id); }

  bool has_time(Vertex v, double time) const {
    const auto& eps = endpoints_.at(v);
    const auto it = lower_bound(eps, time);
    return it != eps.end() && it->time == time;
  }

  /// Throws std::invalid_argument for a non-edge or a time outside [0,beta),
  /// TimeCollision when the time is already used at a or b.
  void check_insertable(Vertex a, Vertex b, double time) const {
    if (!graph_.has_edge(a, b)) throw std::invalid_argument("insert_event: not an edge of the graph");
    if (!(time >= 0.0 && time < beta_)) throw std::invalid_argument("insert_event: time outside [0, beta)");
    if (has_time(a, time) || has_time(b, time)) throw TimeCollision("insert_event: time already used at an endpoint");
  }

  EventId insert_event(Vertex a, Vertex b, double time, EventKind kind) {
    check_insertable(a, b, time);
    if (a > b) std::swap(a, b);
    const EventId id = next_id_++;
    index_.emplace(id, events_.size());
    events_.push_back({{a, b}, time, kind, id});
    insert_endpoint(a, {time, b, kind, id});
    insert_endpoint(b, {time, a, kind, id});
    return id;
  }

  void remove_event(EventId id) {
    const auto it = index_.find(id);
    if (it == index_.end()) throw std::out_of_range("remove_event: unknown event id");
    const std::size_t pos = it->second;
    const Event ev = events_[pos];
    erase_endpoint(ev.edge.a, ev.time);
    erase_endpoint(ev.edge.b, ev.time);
    index_.erase(it);
    if (pos + 1 != events_.size()) {
      events_[pos] = events_.back();
      index_[events_[pos].id] = pos;
    }
    events_.pop_back();
  }

  /// Index of the event at the given time in v's sorted endpoint list.
  std::size_t endpoint_index(Vertex v, double time) const {
    const auto& eps = endpoints_[v];
    const auto it = lower_bound(eps, time);
    assert(it != eps.end() && it->time == time);
    return static_cast<std::size_t>(it - eps.begin());
  }

  /// Interval of v's time circle that contains `time` (which must not be an
  /// event time at v). Interval j runs upward from endpoint j to endpoint j+1;
  /// the last one wraps through beta. An event-free vertex has interval 0.
  std::size_t interval_containing(Vertex v, double time) const {
    const auto& eps = endpoints_.at(v);
    if (eps.empty()) return 0;
    const auto below = static_cast<std::size_t>(lower_bound(eps, time) - eps.begin());
    return below == 0 ? eps.size() - 1 : below - 1;
  }

  std::size_t interval_count(Vertex v) const { return std::max<std::size_t>(1, endpoints_[v].size()); }

  double interval_length(Vertex v, std::size_t j) const {
    const auto& eps = endpoints_[v];
    if (eps.size() <= 1) return beta_;
    if (j + 1 < eps.size()) return eps[j + 1].time - eps[j].time;
    return eps.front().time + beta_ - eps.back().time;
  }

  /// Equal graphs, beta and event sets (kinds and times); ids are ignored.
  friend bool operator==(const LoopConfig& lhs, const LoopConfig& rhs) {
    if (!(lhs.graph_ == rhs.graph_) || lhs.beta_ != rhs.beta_) return false;
    for (Vertex v = 0; v < lhs.endpoints_.size(); ++v) {
      const auto& l = lhs.endpoints_[v];
      const auto& r = rhs.endpoints_[v];
      if (l.size() != r.size()) return false;
      for (std::size_t i = 0; i < l.size(); ++i)
        if (l[i].time != r[i].time || l[i].other != r[i].other || l[i].kind != r[i].kind) return false;
    }
    return true;
  }

 private:
  static std::vector<Endpoint>::const_iterator lower_bound(const std::vector<Endpoint>& eps, double time) {
    return std::lower_bound(eps.begin(), eps.end(), time, [](const Endpoint& e, double t) { return e.time < t; });
  }

  void insert_endpoint(Vertex v, const Endpoint& ep) {
    auto& eps = endpoints_[v];
    eps.insert(eps.begin() + (lower_bound(eps, ep.time) - eps.begin()), ep);
  }

  void erase_endpoint(Vertex v, double time) {
    auto& eps = endpoints_[v];
    eps.erase(eps.begin() + (lower_bound(eps, time) - eps.begin()));
  }

  Graph graph_;
  double beta_;
  std::vector<Event> events_;
  std::unordered_map<EventId, std::size_t> index_;
  std::vector<std::vector<Endpoint>> endpoints_;
  EventId next_id_ = 0;
};

/// Position of a walker: traversing interval `interval` of `vertex` in
/// direction `dir`.
struct WalkState {
  Vertex vertex;
  std::size_t interval;
  Direction dir;

  friend bool operator==(const WalkState&, const WalkState&) = default;
};

/// The endpoint at which a walker in state s leaves its interval.
inline const Endpoint& exit_endpoint(const LoopConfig& cfg, const WalkState& s) {
  const auto eps = cfg.endpoints(s.vertex);
  const std::size_t k = eps.size();
  return s.dir == Direction::up ? eps[(s.interval + 1) % k] : eps[s.interval];
}

/// Jump through the exit event: a crossing keeps the vertical direction, a
/// bar reverses it. Requires the current vertex to carry at least one event.
inline WalkState step(const LoopConfig& cfg, const WalkState& s) {
  const Endpoint& ep = exit_endpoint(cfg, s);
  const Vertex w = ep.other;
  const std::size_t p = cfg.endpoint_index(w, ep.time);
  const std::size_t k = cfg.endpoints(w).size();
  const Direction d = ep.kind == EventKind::crossing ? s.dir : flipped(s.dir);
  return {w, d == Direction::up ? p : (p + k - 1) % k, d};
}

/// Loop membership of one vertical interval.
struct Segment {
  std::uint32_t loop;
  Direction dir;
};

/// Partition of Lambda x [0, beta) into loops.
///
/// Each loop is traced starting upward from its first interval in
/// (vertex, interval) order, so directions are relative to that start.
struct LoopDecomposition {
  double beta = 0.0;
  std::vector<double> loop_lengths;
  std::vector<std::size_t> offsets;  // per vertex, into segments; size |Lambda|+1
  std::vector<Segment> segments;

  std::size_t loop_count() const { return loop_lengths.size(); }
  const Segment& segment(Vertex v, std::size_t interval) const { return segments[offsets[v] + interval]; }
};

inline void trace_loops(const LoopConfig& cfg, LoopDecomposition& out) {
  constexpr auto unassigned = std::numeric_limits<std::uint32_t>::max();
  const Graph& g = cfg.graph();
  out.beta = cfg.beta();
  out.loop_lengths.clear();
  out.offsets.resize(g.size() + 1);
  out.offsets[0] = 0;
  for (Vertex v = 0; v < g.size(); ++v) out.offsets[v + 1] = out.offsets[v] + cfg.interval_count(v);
  out.segments.assign(out.offsets.back(), Segment{unassigned, Direction::up});

  for (Vertex v = 0; v < g.size(); ++v) {
    for (std::size_t j = 0; j < cfg.interval_count(v); ++j) {
      if (out.segment(v, j).loop != unassigned) continue;
      const auto id = static_cast<std::uint32_t>(out.loop_lengths.size());
      const WalkState start{v, j, Direction::up};
      WalkState s = start;
      double length = 0.0;
      do {
        out.segments[out.offsets[s.vertex] + s.interval] = {id, s.dir};
        length += cfg.interval_length(s.vertex, s.interval);
        if (cfg.endpoints(s.vertex).empty()) break;
        s = step(cfg, s);
      } while (!(s == start));
      out.loop_lengths.push_back(length);
    }
  }
}

inline LoopDecomposition trace_loops(const LoopConfig& cfg) {
  LoopDecomposition d;
  trace_loops(cfg, d);
  return d;
}

struct LoopPoint {
  std::uint32_t loop;
  Direction dir;
  double length;
};

/// Loop through (v, time). Throws when `time` is an event time at v, where
/// the direction is undefined.
inline LoopPoint loop_at(const LoopConfig& cfg, const LoopDecomposition& dec, Vertex v, double time) {
  if (v >= cfg.graph().size()) throw std::out_of_range("loop_at: vertex out of range");
  if (!(time >= 0.0 && time < cfg.beta())) throw std::invalid_argument("loop_at: time outside [0, beta)");
  if (cfg.has_time(v, time)) throw std::invalid_argument("loop_at: query at an event time");
  const Segment& s = dec.segment(v, cfg.interval_containing(v, time));
  return {s.loop, s.dir, dec.loop_lengths[s.loop]};
}

inline LoopPoint loop_at(const LoopConfig& cfg, Vertex v, double time) { return loop_at(cfg, trace_loops(cfg), v, time); }

enum class PairEvent { same_direction, opposite_direction, different_loops };

/// Classifies (x,0) and (y,0): same loop with equal vertical directions,
/// same loop with opposite directions, or different loops.
inline PairEvent pair_event(const LoopConfig& cfg, const LoopDecomposition& dec, Vertex x, Vertex y) {
  const auto px = loop_at(cfg, dec, x, 0.0);
  const auto py = loop_at(cfg, dec, y, 0.0);
  if (px.loop != py.loop) return PairEvent::different_loops;
  return px.dir == py.dir ? PairEvent::same_direction : PairEvent::opposite_direction;
}

inline PairEvent pair_event(const LoopConfig& cfg, Vertex x, Vertex y) { return pair_event(cfg, trace_loops(cfg), x, y); }

namespace detail {

// Local moves rewire the four interval ends around one edge-time (a,b,t):
// below/above t at a and at b. The rest of the configuration pairs those ends
// into one of three matchings; the event pairs them too (nothing: a-a and
// b-b, crossing: a_below-b_above, bar: a_below-b_below). The two matchings
// close into two loops when they agree and one loop otherwise.
enum class Matching { vertical, crossing, bar };

inline int loops_through(Matching inner, Matching outer) { return inner == outer ? 2 : 1; }

inline Matching matching_of(EventKind k) { return k == EventKind::crossing ? Matching::crossing : Matching::bar; }

// Partner of the a-above end along the outside, decoded from the direction
// in which the walker comes back to a or b.
inline Matching outer_from_arrival(bool at_a, Direction dir) {
  if (at_a) {
    assert(dir == Direction::up);
    return Matching::vertical;
  }
  return dir == Direction::up ? Matching::crossing : Matching::bar;
}

}  // namespace detail

/// Change in loop count if (a,b,time,kind) were inserted; cfg is untouched.
/// Walks only the loop through (a,time).
inline int delta_loops(const LoopConfig& cfg, Vertex a, Vertex b, double time, EventKind kind) {
  cfg.check_insertable(a, b, time);
  using detail::Matching;
  Matching outer = Matching::vertical;
  if (!cfg.endpoints(a).empty()) {
    const std::size_t ja = cfg.interval_containing(a, time);
    const std::size_t jb = cfg.interval_containing(b, time);
    WalkState s{a, ja, Direction::up};
    while (true) {
      s = step(cfg, s);
      if (s.vertex == a && s.interval == ja) {
        outer = detail::outer_from_arrival(true, s.dir);
        break;
      }
      if (s.vertex == b && s.interval == jb) {
        outer = detail::outer_from_arrival(false, s.dir);
        break;
      }
    }
  }
  return detail::loops_through(detail::matching_of(kind), outer) - detail::loops_through(Matching::vertical, outer);
}

/// Change in loop count if the event were removed; cfg is untouched.
inline int delta_loops_removal(const LoopConfig& cfg, EventId id) {
  const Event& ev = cfg.event(id);
  const Vertex a = ev.edge.a;
  WalkState s{a, cfg.endpoint_index(a, ev.time), Direction::up};
  detail::Matching outer;
  while (true) {
    const Endpoint& ep = exit_endpoint(cfg, s);
    if (ep.id == id) {
      outer = detail::outer_from_arrival(s.vertex == a, s.dir);
      break;
    }
    s = step(cfg, s);
  }
  using detail::Matching;
  return detail::loops_through(Matching::vertical, outer) - detail::loops_through(detail::matching_of(ev.kind), outer);
}

}  // namespace loopsoup
