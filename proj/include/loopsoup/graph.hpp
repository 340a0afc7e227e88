#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace loopsoup {

using Vertex = std::size_t;

struct Edge {
  Vertex a;
  Vertex b;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Finite simple graph with dense vertex indices 0..n-1.
///
/// Builders record a textual spec ("path:N", "cycle:N", "torus:AxBxC",
/// "complete:N") so that configurations and results can name their graph.
class Graph {
 public:
  Graph() = default;

  explicit Graph(std::size_t n_vertices, std::string spec = {})
      : adjacency_(n_vertices), spec_(std::move(spec)) {}

  /// Adds {a,b}. Self-loops throw; a duplicate edge is ignored and reported
  /// through the return value.
  bool add_edge(Vertex a, Vertex b) {
    if (a >= size() || b >= size()) throw std::out_of_range("add_edge: vertex index out of range");
    if (a == b) throw std::invalid_argument("add_edge: self-loops are not allowed");
    if (has_edge(a, b)) return false;
    if (a > b) std::swap(a, b);
    edges_.push_back({a, b});
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
    return true;
  }

  std::size_t size() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Vertex>& neighbors(Vertex v) const { return adjacency_.at(v); }
  const std::string& spec() const { return spec_; }

  bool has_edge(Vertex a, Vertex b) const {
    if (a >= size() || b >= size()) return false;
    const auto& na = adjacency_[a];
    return std::find(na.begin(), na.end(), b) != na.end();
  }

  std::size_t max_degree() const {
    std::size_t d = 0;
    for (const auto& n : adjacency_) d = std::max(d, n.size());
    return d;
  }

  friend bool operator==(const Graph& lhs, const Graph& rhs) {
    return lhs.adjacency_.size() == rhs.adjacency_.size() && lhs.edges_ == rhs.edges_;
  }

 private:
  std::vector<std::vector<Vertex>> adjacency_;
  std::vector<Edge> edges_;
  std::string spec_;
};

inline Graph build_path(std::size_t n) {
  if (n == 0) throw std::invalid_argument("build_path: need at least one vertex");
  Graph g(n, "path:" + std::to_string(n));
  for (Vertex v = 0; v + 1 < n; ++v) g.add_edge(v, v + 1);
  return g;
}

/// Periodic box. Vertex index of coordinates (c0, c1, ...) is
/// c0 + L0*(c1 + L1*(c2 + ...)), first coordinate fastest.
/// Side length 2 would produce the same edge twice; it is kept once.
inline Graph build_torus(const std::vector<std::size_t>& sides) {
  if (sides.empty()) throw std::invalid_argument("build_torus: empty dimension list");
  std::size_t n = 1;
  std::string spec = "torus:";
  for (std::size_t i = 0; i < sides.size(); ++i) {
    if (sides[i] < 2) throw std::invalid_argument("build_torus: side lengths must be >= 2");
    n *= sides[i];
    spec += (i ? "x" : "") + std::to_string(sides[i]);
  }
  Graph g(n, std::move(spec));
  for (Vertex v = 0; v < n; ++v) {
    std::size_t stride = 1;
    for (std::size_t side : sides) {
      const std::size_t coord = (v / stride) % side;
      const Vertex w = v - coord * stride + ((coord + 1) % side) * stride;
      g.add_edge(v, w);
      stride *= side;
    }
  }
  return g;
}

inline Graph build_cycle(std::size_t n) {
  if (n < 2) throw std::invalid_argument("build_cycle: need at least 2 vertices");
  Graph g(n, "cycle:" + std::to_string(n));
  for (Vertex v = 0; v < n; ++v) g.add_edge(v, (v + 1) % n);
  return g;
}

inline Graph build_complete(std::size_t n) {
  if (n == 0) throw std::invalid_argument("build_complete: need at least one vertex");
  Graph g(n, "complete:" + std::to_string(n));
  for (Vertex a = 0; a < n; ++a)
    for (Vertex b = a + 1; b < n; ++b) g.add_edge(a, b);
  return g;
}

/// Torus coordinates for a vertex index (inverse of the builder's map).
inline std::vector<std::size_t> torus_coordinates(Vertex v, const std::vector<std::size_t>& sides) {
  std::vector<std::size_t> c;
  for (std::size_t side : sides) {
    c.push_back(v % side);
    v /= side;
  }
  return c;
}

inline Vertex torus_index(const std::vector<std::size_t>& coords, const std::vector<std::size_t>& sides) {
  Vertex v = 0;
  std::size_t stride = 1;
  for (std::size_t i = 0; i < sides.size(); ++i) {
    v += (coords.at(i) % sides[i]) * stride;
    stride *= sides[i];
  }
  return v;
}

/// Breadth-first edge count between x and y; nullopt when unreachable.
inline std::optional<std::size_t> graph_distance(const Graph& g, Vertex x, Vertex y) {
  if (x >= g.size() || y >= g.size()) throw std::out_of_range("graph_distance: vertex index out of range");
  if (x == y) return 0;
  std::vector<std::size_t> dist(g.size(), static_cast<std::size_t>(-1));
  std::deque<Vertex> queue{x};
  dist[x] = 0;
  while (!queue.empty()) {
    const Vertex v = queue.front();
    queue.pop_front();
    for (Vertex w : g.neighbors(v)) {
      if (dist[w] != static_cast<std::size_t>(-1)) continue;
      dist[w] = dist[v] + 1;
      if (w == y) return dist[w];
      queue.push_back(w);
    }
  }
  return std::nullopt;
}

/// Vertex at maximal distance from x (smallest index on ties).
inline Vertex farthest_vertex(const Graph& g, Vertex x) {
  Vertex best = x;
  std::size_t best_d = 0;
  for (Vertex y = 0; y < g.size(); ++y) {
    const auto d = graph_distance(g, x, y);
    if (d && *d > best_d) {
      best_d = *d;
      best = y;
    }
  }
  return best;
}

/// Two-colourability check (used to decide when bars-only configurations
/// obey the strict split/merge law).
inline bool is_bipartite(const Graph& g) {
  std::vector<int> colour(g.size(), -1);
  for (Vertex s = 0; s < g.size(); ++s) {
    if (colour[s] != -1) continue;
    colour[s] = 0;
    std::deque<Vertex> queue{s};
    while (!queue.empty()) {
      const Vertex v = queue.front();
      queue.pop_front();
      for (Vertex w : g.neighbors(v)) {
        if (colour[w] == -1) {
          colour[w] = 1 - colour[v];
          queue.push_back(w);
        } else if (colour[w] == colour[v]) {
          return false;
        }
      }
    }
  }
  return true;
}

namespace detail {

inline std::size_t parse_count(std::string_view text, std::string_view what) {
  if (text.empty()) throw std::invalid_argument("graph spec: missing size in " + std::string(what));
  std::size_t value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw std::invalid_argument("graph spec: bad number '" + std::string(text) + "'");
    value = value * 10 + static_cast<std::size_t>(c - '0');
  }
  return value;
}

inline std::vector<std::size_t> parse_sides(std::string_view text, std::string_view spec) {
  std::vector<std::size_t> sides;
  std::size_t start = 0;
  while (true) {
    const auto x = text.find('x', start);
    sides.push_back(parse_count(text.substr(start, x == std::string_view::npos ? x : x - start), spec));
    if (x == std::string_view::npos) break;
    start = x + 1;
  }
  return sides;
}

}  // namespace detail

/// Parses "path:N", "cycle:N", "torus:AxBxC" or "complete:N".
inline Graph parse_graph_spec(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("graph spec: expected kind:size, got '" + std::string(spec) + "'");
  const auto kind = spec.substr(0, colon);
  const auto rest = spec.substr(colon + 1);
  if (kind == "path") return build_path(detail::parse_count(rest, spec));
  if (kind == "complete") return build_complete(detail::parse_count(rest, spec));
  if (kind == "cycle") return build_cycle(detail::parse_count(rest, spec));
  if (kind == "torus") return build_torus(detail::parse_sides(rest, spec));
  throw std::invalid_argument("graph spec: unknown kind '" + std::string(kind) + "'");
}

/// Side lengths of a "torus:..." or "cycle:..." spec; empty for other kinds.
inline std::vector<std::size_t> torus_sides(std::string_view spec) {
  if (spec.starts_with("cycle:")) return {detail::parse_count(spec.substr(6), spec)};
  if (spec.starts_with("torus:")) return detail::parse_sides(spec.substr(6), spec);
  return {};
}

}  // namespace loopsoup
