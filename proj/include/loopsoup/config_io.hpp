#pragma once

#include <algorithm>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopsoup/loop_config.hpp"

namespace loopsoup {

// Text dump, one event per line:
//
//   beta=<float> graph=<spec>
//   <u> <v> <time> <X|B>
//
// Times use 17 significant digits so a reload is bit-exact. Lines are
// ordered by time, then by edge.

inline void write_config(std::ostream& os, const LoopConfig& cfg) {
  if (cfg.graph().spec().empty()) throw std::invalid_argument("write_config: graph has no spec string");
  std::vector<Event> events(cfg.events().begin(), cfg.events().end());
  std::sort(events.begin(), events.end(), [](const Event& l, const Event& r) {
    if (l.time != r.time) return l.time < r.time;
    if (l.edge.a != r.edge.a) return l.edge.a < r.edge.a;
    return l.edge.b < r.edge.b;
  });
  std::ostringstream out;
  out << std::setprecision(17);
  out << "beta=" << cfg.beta() << " graph=" << cfg.graph().spec() << '\n';
  for (const Event& e : events)
    out << e.edge.a << ' ' << e.edge.b << ' ' << e.time << ' ' << (e.kind == EventKind::crossing ? 'X' : 'B') << '\n';
  os << out.str();
}

inline std::string dump_config(const LoopConfig& cfg) {
  std::ostringstream os;
  write_config(os, cfg);
  return os.str();
}

inline LoopConfig read_config(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("read_config: missing header line");
  std::istringstream hs(header);
  std::string beta_field, graph_field;
  hs >> beta_field >> graph_field;
  if (!beta_field.starts_with("beta=") || !graph_field.starts_with("graph="))
    throw std::runtime_error("read_config: header must be 'beta=<float> graph=<spec>'");
  const double beta = std::stod(beta_field.substr(5));
  LoopConfig cfg(parse_graph_spec(graph_field.substr(6)), beta);

  std::string line;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Vertex a = 0, b = 0;
    double time = 0.0;
    std::string kind;
    if (!(ls >> a >> b >> time >> kind) || (kind != "X" && kind != "B"))
      throw std::runtime_error("read_config: malformed event on line " + std::to_string(line_no));
    cfg.insert_event(a, b, time, kind == "X" ? EventKind::crossing : EventKind::bar);
  }
  return cfg;
}

inline LoopConfig load_config(const std::string& text) {
  std::istringstream is(text);
  return read_config(is);
}

}  // namespace loopsoup
