#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "loopsoup/loop_config.hpp"
#include "loopsoup/statistics.hpp"

namespace loopsoup {

/// Crossings occur with intensity (1+u)/2 and bars with (1-u)/2 per unit
/// edge-time; the two add up to one.
struct ModelParams {
  double u = 1.0;
  double beta = 1.0;

  ModelParams(double u_, double beta_) : u(u_), beta(beta_) {
    if (!(u >= -1.0 && u <= 1.0)) throw std::invalid_argument("ModelParams: u must lie in [-1, 1]");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("ModelParams: beta must be positive");
  }

  double crossing_intensity() const { return 0.5 * (1.0 + u); }
  double bar_intensity() const { return 0.5 * (1.0 - u); }
  double intensity(EventKind k) const { return k == EventKind::crossing ? crossing_intensity() : bar_intensity(); }
};

namespace detail {

inline EventKind draw_kind(const ModelParams& p, Rng& rng) {
  if (p.u >= 1.0) return EventKind::crossing;
  if (p.u <= -1.0) return EventKind::bar;
  return rng.uniform() < p.crossing_intensity() ? EventKind::crossing : EventKind::bar;
}

// Uniform time in (0, beta) that is unused at both endpoints. Time 0 is kept
// free so that equal-time observables at t=0 are always defined.
inline double draw_free_time(const LoopConfig& cfg, Vertex a, Vertex b, Rng& rng) {
  while (true) {
    const double t = rng.uniform() * cfg.beta();
    if (t > 0.0 && t < cfg.beta() && !cfg.has_time(a, t) && !cfg.has_time(b, t)) return t;
  }
}

}  // namespace detail

/// Draw from the unweighted marked Poisson law: on every edge a rate-1
/// process on [0,beta), each point a crossing with probability (1+u)/2.
inline LoopConfig sample_poisson(const Graph& g, const ModelParams& p, Rng& rng) {
  LoopConfig cfg(g, p.beta);
  for (const Edge& e : g.edges()) {
    double t = rng.exponential(1.0);
    while (t < p.beta) {
      if (!cfg.has_time(e.a, t) && !cfg.has_time(e.b, t)) cfg.insert_event(e.a, e.b, t, detail::draw_kind(p, rng));
      t += rng.exponential(1.0);
    }
  }
  return cfg;
}

/// Z~ = E_rho[2^|L|] by direct Poisson sampling. Variance grows quickly with
/// beta*|E|; meant for desk-size systems.
inline EstimatorResult direct_weight_estimate(const Graph& g, const ModelParams& p, std::uint64_t n_samples, Rng& rng,
                                              RunEcho echo = {}) {
  if (n_samples < 2) throw std::invalid_argument("direct_weight_estimate: need at least two samples");
  double sum = 0.0, sum_sq = 0.0;
  LoopDecomposition dec;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    trace_loops(sample_poisson(g, p, rng), dec);
    const double w = std::ldexp(1.0, static_cast<int>(dec.loop_count()));
    sum += w;
    sum_sq += w * w;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  return {"weight_partition_function", mean, std::sqrt(var / n), n_samples, std::move(echo), std::nullopt};
}

struct ChainCounters {
  std::uint64_t steps = 0;
  std::uint64_t proposed_insertions = 0;
  std::uint64_t accepted_insertions = 0;
  std::uint64_t proposed_removals = 0;
  std::uint64_t accepted_removals = 0;
  std::uint64_t empty_removals = 0;  // removal proposed on an empty configuration

  double acceptance_rate() const {
    const auto proposed = proposed_insertions + proposed_removals + empty_removals;
    return proposed ? static_cast<double>(accepted_insertions + accepted_removals) / static_cast<double>(proposed) : 0.0;
  }
};

/// Mutable state of one Markov chain. loop_count always equals the number of
/// loops of `config`.
struct ChainState {
  ChainState(LoopConfig cfg, std::uint64_t seed) : config(std::move(cfg)), rng(seed) {
    loop_count = trace_loops(config).loop_count();
  }

  LoopConfig config;
  std::size_t loop_count = 0;
  Rng rng;
  ChainCounters counters;
  double clock = 0.0;  // elapsed continuous time (Gillespie variant only)
};

enum class Move { none, insertion, removal };

struct StepRecord {
  Move move = Move::none;
  int delta_loops = 0;
  double acceptance = 0.0;
  bool accepted = false;
};

/// Metropolis-Hastings acceptance of adding one event to a configuration of
/// m events: stationary weight 2^dL times the Poisson (Janossy) density
/// ratio, over the proposal ratio.
inline double insertion_acceptance(int delta, double beta, std::size_t n_edges, std::size_t m) {
  return std::min(1.0, std::ldexp(1.0, delta) * beta * static_cast<double>(n_edges) / static_cast<double>(m + 1));
}

/// Reverse move: removing one of m events.
inline double removal_acceptance(int delta, double beta, std::size_t n_edges, std::size_t m) {
  return std::min(1.0, std::ldexp(1.0, delta) * static_cast<double>(m) / (beta * static_cast<double>(n_edges)));
}

/// One birth-death step targeting 2^|L| d rho: with probability 1/2 propose
/// a uniform edge-time with kind drawn by intensity, otherwise propose to
/// delete a uniformly chosen event.
inline StepRecord mh_step(ChainState& s, const ModelParams& p) {
  ++s.counters.steps;
  LoopConfig& cfg = s.config;
  const Graph& g = cfg.graph();
  StepRecord rec;
  if (g.edge_count() == 0) return rec;
  const std::size_t m = cfg.event_count();
  if (s.rng.uniform() < 0.5) {
    const Edge& e = g.edges()[s.rng.index(g.edge_count())];
    const double t = detail::draw_free_time(cfg, e.a, e.b, s.rng);
    const EventKind kind = detail::draw_kind(p, s.rng);
    rec.move = Move::insertion;
    ++s.counters.proposed_insertions;
    rec.delta_loops = delta_loops(cfg, e.a, e.b, t, kind);
    rec.acceptance = insertion_acceptance(rec.delta_loops, p.beta, g.edge_count(), m);
    if (s.rng.uniform() < rec.acceptance) {
      cfg.insert_event(e.a, e.b, t, kind);
      rec.accepted = true;
      ++s.counters.accepted_insertions;
    }
  } else {
    rec.move = Move::removal;
    if (m == 0) {
      ++s.counters.empty_removals;
      return rec;
    }
    ++s.counters.proposed_removals;
    const EventId id = cfg.event_at(s.rng.index(m)).id;
    rec.delta_loops = delta_loops_removal(cfg, id);
    rec.acceptance = removal_acceptance(rec.delta_loops, p.beta, g.edge_count(), m);
    if (s.rng.uniform() < rec.acceptance) {
      cfg.remove_event(id);
      rec.accepted = true;
      ++s.counters.accepted_removals;
    }
  }
  if (rec.accepted) s.loop_count = static_cast<std::size_t>(static_cast<long long>(s.loop_count) + rec.delta_loops);
  return rec;
}

/// Continuous-time rate of a move changing the loop count by delta:
/// sqrt(2) for a split, 1/sqrt(2) for a merge, 1 for a rewiring. Insertions
/// are additionally scaled by the kind's intensity.
inline double transition_rate(int delta) { return std::exp2(0.5 * delta); }

struct GillespieRecord {
  double dt = 0.0;
  StepRecord transition;
};

namespace detail {

inline double gillespie_bound_mass(const ChainState& s, const ModelParams& p) {
  return p.beta * static_cast<double>(s.config.graph().edge_count()) + static_cast<double>(s.config.event_count());
}

// Thinned candidate move; the holding time has already been drawn.
inline StepRecord gillespie_transition(ChainState& s, const ModelParams& p) {
  LoopConfig& cfg = s.config;
  const Graph& g = cfg.graph();
  const double insertion_mass = p.beta * static_cast<double>(g.edge_count());
  const std::size_t m = cfg.event_count();
  StepRecord rec;
  if (s.rng.uniform() * (insertion_mass + static_cast<double>(m)) < insertion_mass) {
    const Edge& e = g.edges()[s.rng.index(g.edge_count())];
    const double t = draw_free_time(cfg, e.a, e.b, s.rng);
    const EventKind kind = draw_kind(p, s.rng);
    rec.move = Move::insertion;
    ++s.counters.proposed_insertions;
    rec.delta_loops = delta_loops(cfg, e.a, e.b, t, kind);
    rec.acceptance = transition_rate(rec.delta_loops) / std::sqrt(2.0);
    if (s.rng.uniform() < rec.acceptance) {
      cfg.insert_event(e.a, e.b, t, kind);
      rec.accepted = true;
      ++s.counters.accepted_insertions;
    }
  } else {
    rec.move = Move::removal;
    ++s.counters.proposed_removals;
    const EventId id = cfg.event_at(s.rng.index(m)).id;
    rec.delta_loops = delta_loops_removal(cfg, id);
    rec.acceptance = transition_rate(rec.delta_loops) / std::sqrt(2.0);
    if (s.rng.uniform() < rec.acceptance) {
      cfg.remove_event(id);
      rec.accepted = true;
      ++s.counters.accepted_removals;
    }
  }
  if (rec.accepted) s.loop_count = static_cast<std::size_t>(static_cast<long long>(s.loop_count) + rec.delta_loops);
  return rec;
}

}  // namespace detail

/// One event of the uniformized continuous-time chain. Candidate moves arrive
/// at the bound rate sqrt(2)*(beta|E| + m) and are thinned to their true
/// rates, so null candidates advance the clock without changing the state.
inline GillespieRecord gillespie_step(ChainState& s, const ModelParams& p) {
  ++s.counters.steps;
  GillespieRecord out;
  const double mass = detail::gillespie_bound_mass(s, p);
  if (mass <= 0.0) return out;
  out.dt = s.rng.exponential(std::sqrt(2.0) * mass);
  s.clock += out.dt;
  out.transition = detail::gillespie_transition(s, p);
  return out;
}

/// Run length in sweeps (burn-in included). One sweep is
/// max(1, ceil(beta*|E|)) attempted steps.
struct Schedule {
  std::uint64_t sweeps = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t thin = 1;

  void validate() const {
    if (thin == 0) throw std::invalid_argument("Schedule: thin must be positive");
    if (sweeps < burn_in) throw std::invalid_argument("Schedule: sweeps must not be smaller than burn_in");
  }

  std::uint64_t measurements() const { return (sweeps - burn_in) / thin; }
};

inline std::uint64_t steps_per_sweep(const Graph& g, double beta) {
  const double mass = beta * static_cast<double>(g.edge_count());
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(mass)));
}

/// Advances `state` through the schedule, calling hook(state) every `thin`
/// sweeps after burn-in.
template <typename Hook>
void run_chain(ChainState& state, const ModelParams& p, const Schedule& schedule, Hook&& hook) {
  schedule.validate();
  if (state.config.beta() != p.beta) throw std::invalid_argument("run_chain: configuration beta differs from params");
  const std::uint64_t per_sweep = steps_per_sweep(state.config.graph(), p.beta);
  for (std::uint64_t sweep = 1; sweep <= schedule.sweeps; ++sweep) {
    for (std::uint64_t i = 0; i < per_sweep; ++i) mh_step(state, p);
    if (sweep > schedule.burn_in && (sweep - schedule.burn_in) % schedule.thin == 0) hook(std::as_const(state));
  }
}

/// Fresh chain from the empty configuration with the given seed.
template <typename Hook>
ChainState run_chain(const Graph& g, const ModelParams& p, const Schedule& schedule, std::uint64_t seed, Hook&& hook) {
  schedule.validate();
  ChainState state(LoopConfig(g, p.beta), seed);
  run_chain(state, p, schedule, std::forward<Hook>(hook));
  return state;
}

/// Continuous-time chain observed at times burn_in_time + k*interval.
template <typename Hook>
ChainState run_gillespie(const Graph& g, const ModelParams& p, double burn_in_time, double interval,
                         std::uint64_t n_samples, std::uint64_t seed, Hook&& hook) {
  if (!(interval > 0.0) || burn_in_time < 0.0) throw std::invalid_argument("run_gillespie: bad observation grid");
  ChainState state(LoopConfig(g, p.beta), seed);
  const double mass_edges = p.beta * static_cast<double>(g.edge_count());
  if (mass_edges <= 0.0) throw std::invalid_argument("run_gillespie: graph has no edges");
  double next = burn_in_time;
  std::uint64_t taken = 0;
  while (taken < n_samples) {
    ++state.counters.steps;
    const double dt = state.rng.exponential(std::sqrt(2.0) * detail::gillespie_bound_mass(state, p));
    const double until = state.clock + dt;
    for (; next < until && taken < n_samples; next += interval, ++taken) hook(std::as_const(state));
    state.clock = until;
    detail::gillespie_transition(state, p);
  }
  return state;
}

}  // namespace loopsoup
