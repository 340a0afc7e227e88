#pragma once

// Batch front end. Needs the vendored CLI11 and nlohmann/json headers.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "loopsoup/config_io.hpp"
#include "loopsoup/observables.hpp"
#include "loopsoup/partitions.hpp"
#include "loopsoup/sampler.hpp"
#include "loopsoup/verification.hpp"

namespace loopsoup::cli {

using Json = nlohmann::ordered_json;

/// Everything that determines a run's output.
struct RunSpec {
  std::string mode = "sample";  // sample | verify | scan | pd
  std::string graph = "path:2";
  double u = 1.0;
  double beta = 1.0;
  std::uint64_t sweeps = 100000;
  std::uint64_t burn_in = 1000;
  std::uint64_t thin = 1;
  std::uint64_t chains = 1;
  std::uint64_t seed = 1;
  std::uint64_t samples = 100000;  // direct draws (verify) or partitions (pd)
  double theta = 1.0;
  std::vector<double> cutoffs;     // empty: default_cutoffs
  std::vector<double> betas;       // scan grid; empty: {beta}
  std::vector<double> us;          // scan grid; empty: {u}
  std::vector<std::string> observables;  // record-name filter; empty: all
  std::string out;                 // empty: stdout
  std::string dump;                // write chain 0's final configuration here
  std::string restore;             // start every chain from this configuration
  std::string partitions;          // pd mode: CSV of sampled partitions
};

inline Json to_json(const RunSpec& s) {
  return Json{{"mode", s.mode},       {"graph", s.graph},     {"u", s.u},
              {"beta", s.beta},       {"sweeps", s.sweeps},   {"burn_in", s.burn_in},
              {"thin", s.thin},       {"chains", s.chains},   {"seed", s.seed},
              {"samples", s.samples}, {"theta", s.theta},     {"cutoffs", s.cutoffs},
              {"betas", s.betas},     {"us", s.us},           {"observables", s.observables},
              {"out", s.out},         {"dump", s.dump},       {"restore", s.restore},
              {"partitions", s.partitions}};
}

/// Non-negative integer from text that may use scientific notation ("1e6").
inline std::uint64_t parse_count(const std::string& text, const std::string& flag) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(v >= 0.0) || v != std::floor(v) || v > 9.0e18)
    throw std::invalid_argument(flag + " expects a non-negative integer, got '" + text + "'");
  return static_cast<std::uint64_t>(v);
}

inline void validate(const RunSpec& s) {
  if (s.mode != "sample" && s.mode != "verify" && s.mode != "scan" && s.mode != "pd")
    throw std::invalid_argument("--mode must be one of sample, verify, scan, pd");
  if (s.mode != "pd") parse_graph_spec(s.graph);
  auto check_u = [](double u) {
    if (!(u >= -1.0 && u <= 1.0)) throw std::invalid_argument("--u must lie in [-1, 1]");
  };
  auto check_beta = [](double b) {
    if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("--beta must be positive");
  };
  check_u(s.u);
  check_beta(s.beta);
  for (double u : s.us) check_u(u);
  for (double b : s.betas) check_beta(b);
  for (double k : s.cutoffs)
    if (!(k > 0.0)) throw std::invalid_argument("--cutoffs must be positive");
  if (s.chains == 0) throw std::invalid_argument("--chains must be positive");
  if (!(s.theta > 0.0)) throw std::invalid_argument("--theta must be positive");
  Schedule{s.sweeps, s.burn_in, s.thin}.validate();
}

namespace detail {

inline Json record(const EstimatorResult& r) {
  Json j{{"name", r.name}, {"graph", r.echo.graph}, {"u", r.echo.u}, {"beta", r.echo.beta}};
  if (r.cutoff) j["K"] = *r.cutoff;
  j["mean"] = r.mean;
  j["stderr"] = r.std_error;
  j["n"] = r.n_samples;
  j["seed"] = r.echo.seed;
  j["source"] = r.echo.source;
  return j;
}

inline bool wanted(const RunSpec& s, const std::string& name) {
  if (s.observables.empty()) return true;
  for (const auto& o : s.observables)
    if (name.rfind(o, 0) == 0) return true;
  return false;
}

// Pairs (origin, y) for every y: enough for distance profiles on any graph.
inline std::vector<std::pair<Vertex, Vertex>> origin_pairs(std::size_t n) {
  std::vector<std::pair<Vertex, Vertex>> p;
  for (Vertex y = 1; y < n; ++y) p.emplace_back(0, y);
  return p;
}

}  // namespace detail

/// Runs `spec.chains` independent chains concurrently (stream seeds derived
/// from spec.seed) and merges them in chain order.
inline ObservableResults sample_chains(const RunSpec& spec, const Graph& g, double u, double beta, bool every_pair) {
  const ModelParams p(u, beta);
  const RunEcho echo{g.spec(), u, beta, spec.seed};
  const auto cutoffs = spec.cutoffs.empty() ? default_cutoffs(beta, g.size()) : spec.cutoffs;
  const ObservableSpec ospec{every_pair ? all_pairs(g.size()) : detail::origin_pairs(g.size()), 0, cutoffs};
  std::optional<LoopConfig> start;
  if (!spec.restore.empty()) {
    std::ifstream in(spec.restore);
    if (!in) throw std::runtime_error("cannot open --restore file " + spec.restore);
    start = read_config(in);
    if (!(start->graph() == g) || start->beta() != beta)
      throw std::invalid_argument("--restore configuration does not match --graph/--beta");
  }

  std::vector<std::optional<ObservableResults>> results(spec.chains);
  std::vector<std::exception_ptr> errors(spec.chains);
  std::optional<LoopConfig> last;
  auto work = [&](std::size_t i) {
    try {
      ChainState state(start ? *start : LoopConfig(g, beta), stream_seed(spec.seed, i));
      LoopObservables obs(g, beta, echo, ospec);
      run_chain(state, p, Schedule{spec.sweeps, spec.burn_in, spec.thin},
                [&](const ChainState& s) { obs.observe(s.config); });
      results[i] = obs.results();
      if (i == 0) last = state.config;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t i = 1; i < spec.chains; ++i) threads.emplace_back(work, i);
  work(0);
  for (auto& t : threads) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  if (!spec.dump.empty() && last) {
    std::ofstream out(spec.dump);
    if (!out) throw std::runtime_error("cannot open --dump file " + spec.dump);
    write_config(out, *last);
  }
  ObservableResults merged = *results[0];
  for (std::size_t i = 1; i < results.size(); ++i) merged = merge(merged, *results[i]);
  return merged;
}

/// Flat record list of a chain summary.
inline std::vector<EstimatorResult> records_of(const ObservableResults& r) {
  std::vector<EstimatorResult> out;
  for (const auto& [pair, res] : r.same_loop) out.push_back(res);
  for (const auto& [pair, res] : r.direction) out.push_back(res);
  out.push_back(r.origin_fraction);
  out.push_back(r.averaged_fraction);
  out.push_back(r.connectivity);
  out.push_back(r.sandwich_gap);
  out.push_back(r.loop_count);
  for (std::size_t i = 0; i < r.nu.size(); ++i) {
    out.push_back(r.nu[i]);
    if (r.pd[i]) out.push_back(*r.pd[i]);
  }
  return out;
}

inline Json run_sample(const RunSpec& spec) {
  const Graph g = parse_graph_spec(spec.graph);
  const auto r = sample_chains(spec, g, spec.u, spec.beta, false);
  Json records = Json::array();
  for (const auto& rec : records_of(r))
    if (detail::wanted(spec, rec.name)) records.push_back(detail::record(rec));
  for (std::size_t i = 0; i < r.nu.size(); ++i) {
    if (!r.pd[i] && detail::wanted(spec, "pd_same_element"))
      records.push_back(Json{{"name", "pd_same_element"}, {"graph", g.spec()}, {"u", spec.u}, {"beta", spec.beta},
                             {"K", *r.nu[i].cutoff}, {"mean", nullptr}, {"stderr", nullptr}, {"n", 0},
                             {"seed", spec.seed}, {"source", "mc"}});
  }
  Json hist = Json::object();
  for (const auto& [k, c] : r.loop_count_histogram) hist[std::to_string(k)] = c;
  return Json{{"runspec", to_json(spec)}, {"results", records}, {"loop_count_histogram", hist}};
}

inline Json run_verify(const RunSpec& spec, bool& all_pass) {
  const Graph g = parse_graph_spec(spec.graph);
  const RunEcho echo{g.spec(), spec.u, spec.beta, spec.seed};
  Rng rng(stream_seed(spec.seed, spec.chains));
  McSummary mc{echo, std::nullopt, std::nullopt};
  if (spec.samples >= 2) mc.weight = direct_weight_estimate(g, ModelParams(spec.u, spec.beta), spec.samples, rng, echo);
  mc.chain = sample_chains(spec, g, spec.u, spec.beta, true);
  const auto report = verify_identities(g, spec.u, spec.beta, mc);
  Json rows = Json::array();
  for (const auto& row : report.rows) {
    rows.push_back(Json{{"name", row.name}, {"oracle", row.oracle}, {"mc", row.mc}, {"stderr", row.std_error},
                        {"z", std::isfinite(row.z) ? Json(row.z) : Json(nullptr)}, {"pass", row.pass}});
  }
  all_pass = report.all_pass();
  return Json{{"runspec", to_json(spec)}, {"rows", rows}, {"all_pass", all_pass}};
}

inline std::string format_number(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

/// Long-format CSV over the (u, beta) grid, one row per estimator.
inline std::string run_scan(const RunSpec& spec) {
  const Graph g = parse_graph_spec(spec.graph);
  const auto us = spec.us.empty() ? std::vector<double>{spec.u} : spec.us;
  const auto betas = spec.betas.empty() ? std::vector<double>{spec.beta} : spec.betas;
  const Vertex far = farthest_vertex(g, 0);
  std::ostringstream os;
  os << "graph,u,beta,name,K,mean,stderr,n,seed\n";
  for (double u : us) {
    for (double beta : betas) {
      const auto r = sample_chains(spec, g, u, beta, false);
      std::vector<EstimatorResult> rows{r.origin_fraction, r.averaged_fraction, r.loop_count};
      if (far != 0) rows.push_back(r.same_loop_probability(0, far));
      for (std::size_t i = 0; i < r.nu.size(); ++i) {
        rows.push_back(r.nu[i]);
        if (r.pd[i]) rows.push_back(*r.pd[i]);
      }
      for (const auto& row : rows) {
        if (!detail::wanted(spec, row.name)) continue;
        os << g.spec() << ',' << format_number(u) << ',' << format_number(beta) << ',' << row.name << ','
           << (row.cutoff ? format_number(*row.cutoff) : "") << ',' << format_number(row.mean) << ','
           << format_number(row.std_error) << ',' << row.n_samples << ',' << spec.seed << '\n';
      }
    }
  }
  return os.str();
}

inline Json run_pd(const RunSpec& spec) {
  if (spec.samples < 2) throw std::invalid_argument("--samples must be at least 2 in pd mode");
  Rng rng(stream_seed(spec.seed, 0));
  const RunEcho echo{"", 0.0, 0.0, spec.seed, "pd"};
  BatchMeans same, x2, c2;
  std::ofstream csv;
  if (!spec.partitions.empty()) {
    csv.open(spec.partitions);
    if (!csv) throw std::runtime_error("cannot open --partitions file " + spec.partitions);
    csv << "sample";
    for (int i = 1; i <= 50; ++i) csv << ",w" << i;
    csv << ",residual\n";
  }
  for (std::uint64_t i = 0; i < spec.samples; ++i) {
    const auto p = sample_pd(spec.theta, 4000, rng);
    same.add(same_element_probability(p));
    const double x = sample_beta_theta(spec.theta, rng);
    x2.add(x * x);
    c2.add((1.0 - x) * (1.0 - x));
    if (csv.is_open() && i < 1000) {
      csv << i;
      double rest = p.residual;
      for (std::size_t k = 0; k < p.weights.size(); ++k) {
        if (k < 50) csv << ',' << format_number(p.weights[k]);
        else rest += p.weights[k];
      }
      for (std::size_t k = p.weights.size(); k < 50; ++k) csv << ",0";
      csv << ',' << format_number(rest) << '\n';
    }
  }
  Rng chain_rng(stream_seed(spec.seed, 1));
  const auto sm = split_merge_same_element(SplitMergeRates{spec.theta, 1.0}, 20000, spec.samples * 4, 10, chain_rng);
  auto with_echo = [&](EstimatorResult r) {
    r.echo = echo;
    return r;
  };
  Json records = Json::array();
  for (const auto& r : {make_result("pd_same_element", same, echo), make_result("beta_second_moment", x2, echo),
                        make_result("beta_complement_second_moment", c2, echo), with_echo(sm)}) {
    if (!detail::wanted(spec, r.name)) continue;
    Json j = detail::record(r);
    j.erase("graph");
    j.erase("u");
    j.erase("beta");
    j["theta"] = spec.theta;
    records.push_back(j);
  }
  const Json analytic{{"same_element", analytic_same_element(spec.theta)},
                      {"beta_second_moment", beta_second_moment(spec.theta)},
                      {"beta_complement_second_moment", beta_complement_second_moment(spec.theta)}};
  return Json{{"runspec", to_json(spec)}, {"results", records}, {"analytic", analytic}};
}

/// Parses argv into a RunSpec. Returns nullopt after printing help.
inline std::optional<RunSpec> parse_args(int argc, const char* const* argv) {
  CLI::App app{"Weighted loop-soup Monte Carlo for the spin-1/2 XYZ-type family, with exact-diagonalization checks"};
  RunSpec s;
  std::string sweeps = std::to_string(s.sweeps), burn_in = std::to_string(s.burn_in), thin = std::to_string(s.thin),
              chains = std::to_string(s.chains), seed = std::to_string(s.seed), samples = std::to_string(s.samples);
  app.add_option("--mode", s.mode, "sample | verify | scan | pd")->capture_default_str();
  app.add_option("--graph", s.graph, "path:N, cycle:N, torus:AxB[xC], complete:N")->capture_default_str();
  app.add_option("--u", s.u, "coupling parameter in [-1, 1]")->capture_default_str();
  app.add_option("--beta", s.beta, "inverse temperature")->capture_default_str();
  app.add_option("--sweeps", sweeps, "sweeps per chain including burn-in");
  app.add_option("--burnin", burn_in, "burn-in sweeps");
  app.add_option("--thin", thin, "measure every THIN sweeps");
  app.add_option("--chains", chains, "independent concurrent chains");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--samples", samples, "direct draws (verify) or partitions (pd)");
  app.add_option("--theta", s.theta, "PD/GEM parameter")->capture_default_str();
  app.add_option("--cutoffs", s.cutoffs, "loop-length cutoffs K")->delimiter(',');
  app.add_option("--betas", s.betas, "scan grid over beta")->delimiter(',');
  app.add_option("--us", s.us, "scan grid over u")->delimiter(',');
  app.add_option("--observables", s.observables, "record-name prefixes to keep")->delimiter(',');
  app.add_option("--out", s.out, "output file (default stdout)");
  app.add_option("--dump", s.dump, "write chain 0's final configuration");
  app.add_option("--restore", s.restore, "start chains from a dumped configuration");
  app.add_option("--partitions", s.partitions, "pd mode: CSV of the first sampled partitions");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw std::invalid_argument(e.what());
  }
  s.sweeps = parse_count(sweeps, "--sweeps");
  s.burn_in = parse_count(burn_in, "--burnin");
  s.thin = parse_count(thin, "--thin");
  s.chains = parse_count(chains, "--chains");
  s.seed = parse_count(seed, "--seed");
  s.samples = parse_count(samples, "--samples");
  validate(s);
  return s;
}

/// Executes a validated spec, writing the artifact to `out`. Returns the
/// process exit code (1 when a verification row fails).
inline int run(const RunSpec& spec, std::ostream& out) {
  validate(spec);
  if (spec.mode == "scan") {
    out << run_scan(spec);
    return 0;
  }
  bool ok = true;
  Json doc;
  if (spec.mode == "sample") doc = run_sample(spec);
  else if (spec.mode == "verify") doc = run_verify(spec, ok);
  else doc = run_pd(spec);
  out << doc.dump(2) << '\n';
  return ok ? 0 : 1;
}

inline int main(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  try {
    const auto spec = parse_args(argc, argv);
    if (!spec) return 0;
    if (spec->out.empty()) return run(*spec, std::cout);
    std::ofstream file(spec->out);
    if (!file) throw std::runtime_error("cannot open --out file " + spec->out);
    return run(*spec, file);
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\nrun with --help for the flag list\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace loopsoup::cli
