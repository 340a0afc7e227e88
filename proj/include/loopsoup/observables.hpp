#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "loopsoup/loop_config.hpp"
#include "loopsoup/statistics.hpp"

namespace loopsoup {

/// Normalized loop lengths L_i/(beta|Lambda|), descending; sums to one.
struct LoopPartition {
  std::vector<double> weights;
};

inline LoopPartition loop_partition(const LoopDecomposition& dec) {
  const double total = std::accumulate(dec.loop_lengths.begin(), dec.loop_lengths.end(), 0.0);
  LoopPartition p;
  p.weights.reserve(dec.loop_count());
  for (double l : dec.loop_lengths) p.weights.push_back(l / total);
  std::sort(p.weights.begin(), p.weights.end(), std::greater<>());
  return p;
}

/// Probability that two independent uniform points of the total mass land in
/// the same part: sum of squared weights over the squared total.
inline double same_element_fraction(std::span<const double> weights) {
  double total = 0.0, squares = 0.0;
  for (double w : weights) {
    total += w;
    squares += w * w;
  }
  return total > 0.0 ? squares / (total * total) : 0.0;
}

/// Parts of mass at least `cutoff` (in the same units as the weights).
inline std::vector<double> macroscopic_part(std::span<const double> weights, double cutoff) {
  std::vector<double> out;
  for (double w : weights)
    if (w >= cutoff) out.push_back(w);
  return out;
}

/// Mean same-element statistic over a stream of partitions, each restricted
/// beforehand to its macroscopic loops. Empty partitions carry no
/// macroscopic mass and are skipped; nullopt when none remain.
inline std::optional<EstimatorResult> pd_same_element_statistic(std::span<const std::vector<double>> partitions,
                                                                RunEcho echo = {}) {
  BatchMeans acc;
  for (const auto& p : partitions) {
    if (std::accumulate(p.begin(), p.end(), 0.0) > 0.0) acc.add(same_element_fraction(p));
  }
  if (acc.count() == 0) return std::nullopt;
  return make_result("pd_same_element", acc, echo);
}

/// Cutoffs in time units: beta, 2beta, 5beta, 10beta and sqrt(beta|Lambda|).
inline std::vector<double> default_cutoffs(double beta, std::size_t n_vertices) {
  std::vector<double> k{beta, 2 * beta, 5 * beta, 10 * beta, std::sqrt(beta * static_cast<double>(n_vertices))};
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  return k;
}

struct ObservableSpec {
  std::vector<std::pair<Vertex, Vertex>> pairs;
  Vertex origin = 0;
  std::vector<double> cutoffs;  // loop-length cutoffs K, time units
  bool histogram = true;        // distribution of |L(omega)|
};

/// All pairs (x,y) with x < y.
inline std::vector<std::pair<Vertex, Vertex>> all_pairs(std::size_t n) {
  std::vector<std::pair<Vertex, Vertex>> p;
  for (Vertex x = 0; x < n; ++x)
    for (Vertex y = x + 1; y < n; ++y) p.emplace_back(x, y);
  return p;
}

struct SandwichReport {
  double slack = 0.0;         // sqrt(2 d (1-u) / |Lambda|), d = max_degree/2
  EstimatorResult upper;      // (1/|Lambda|^2) sum_{x,y} P(same loop) = (4/|Lambda|^2) sum <S3 S3>
  EstimatorResult fraction;   // E[L_(x,0) / (beta |Lambda|)], x averaged over Lambda
  EstimatorResult gap;        // upper - fraction, per sample
  bool upper_holds = false;   // fraction <= upper within 3 sigma
  bool lower_holds = false;   // upper - slack <= fraction within 3 sigma
  bool equality_holds = true; // at u = 1: sides agree within 3 sigma
  bool ok() const { return upper_holds && lower_holds && equality_holds; }
};

/// Merged summary of one or more chains.
struct ObservableResults {
  RunEcho echo;
  std::size_t n_vertices = 0;
  std::size_t max_degree = 0;
  std::map<std::pair<Vertex, Vertex>, EstimatorResult> same_loop;
  std::map<std::pair<Vertex, Vertex>, EstimatorResult> direction;
  EstimatorResult origin_fraction;
  EstimatorResult averaged_fraction;  // origin averaged over all vertices
  EstimatorResult connectivity;
  EstimatorResult sandwich_gap;
  EstimatorResult loop_count;
  std::vector<EstimatorResult> nu;          // per cutoff
  std::vector<std::optional<EstimatorResult>> pd;
  std::map<std::size_t, std::uint64_t> loop_count_histogram;

  /// Monte Carlo frequency of (x,0) and (y,0) on one loop; equals
  /// 4<S3_x S3_y> = 4<S1_x S1_y>.
  const EstimatorResult& same_loop_probability(Vertex x, Vertex y) const { return lookup(same_loop, x, y); }

  /// P(E+) - P(E-); a quarter of it estimates <S2_x S2_y>.
  const EstimatorResult& direction_correlation(Vertex x, Vertex y) const { return lookup(direction, x, y); }

  const EstimatorResult& origin_loop_fraction() const { return origin_fraction; }

  const EstimatorResult& nu_estimate(double cutoff) const {
    for (const auto& r : nu)
      if (r.cutoff && *r.cutoff == cutoff) return r;
    throw std::out_of_range("nu_estimate: cutoff was not recorded");
  }

  /// nullopt when the macroscopic mass is essentially zero.
  std::optional<EstimatorResult> pd_same_element(double cutoff) const {
    for (std::size_t i = 0; i < nu.size(); ++i)
      if (nu[i].cutoff && *nu[i].cutoff == cutoff) return pd[i];
    throw std::out_of_range("pd_same_element: cutoff was not recorded");
  }

  /// Empirical law of |L(omega)|.
  std::map<std::size_t, double> loop_count_distribution() const {
    std::uint64_t total = 0;
    for (const auto& [k, c] : loop_count_histogram) total += c;
    std::map<std::size_t, double> out;
    for (const auto& [k, c] : loop_count_histogram) out[k] = static_cast<double>(c) / static_cast<double>(total);
    return out;
  }

  SandwichReport check_sandwich() const {
    SandwichReport r;
    const double d = 0.5 * static_cast<double>(max_degree);
    r.slack = std::sqrt(2.0 * d * (1.0 - echo.u) / static_cast<double>(n_vertices));
    r.upper = connectivity;
    r.fraction = averaged_fraction;
    r.gap = sandwich_gap;
    const double tol = 3.0 * sandwich_gap.std_error;
    r.upper_holds = sandwich_gap.mean >= -tol - 1e-12;
    r.lower_holds = sandwich_gap.mean - r.slack <= tol + 1e-12;
    if (echo.u == 1.0) r.equality_holds = std::abs(sandwich_gap.mean) <= tol + 1e-12;
    return r;
  }

  friend ObservableResults merge(const ObservableResults& a, const ObservableResults& b);

 private:
  static const EstimatorResult& lookup(const std::map<std::pair<Vertex, Vertex>, EstimatorResult>& m, Vertex x, Vertex y) {
    auto it = m.find({std::min(x, y), std::max(x, y)});
    if (it == m.end()) throw std::out_of_range("pair was not recorded");
    return it->second;
  }
};

namespace detail {

// Below this mean macroscopic mass the same-element statistic is reported
// as undefined.
inline constexpr double min_macroscopic_mass = 1e-3;

}  // namespace detail

inline ObservableResults merge(const ObservableResults& a, const ObservableResults& b) {
  ObservableResults r = a;
  for (auto& [k, v] : r.same_loop) v = merge(v, b.same_loop.at(k));
  for (auto& [k, v] : r.direction) v = merge(v, b.direction.at(k));
  r.origin_fraction = merge(a.origin_fraction, b.origin_fraction);
  r.averaged_fraction = merge(a.averaged_fraction, b.averaged_fraction);
  r.connectivity = merge(a.connectivity, b.connectivity);
  r.sandwich_gap = merge(a.sandwich_gap, b.sandwich_gap);
  r.loop_count = merge(a.loop_count, b.loop_count);
  for (std::size_t i = 0; i < r.nu.size(); ++i) {
    r.nu[i] = merge(a.nu[i], b.nu[i]);
    if (a.pd[i] && b.pd[i]) r.pd[i] = merge(*a.pd[i], *b.pd[i]);
    else if (b.pd[i]) r.pd[i] = b.pd[i];
    if (r.nu[i].mean < detail::min_macroscopic_mass) r.pd[i].reset();
  }
  for (const auto& [k, c] : b.loop_count_histogram) r.loop_count_histogram[k] += c;
  return r;
}

/// Fold-style accumulator of loop observables for one chain.
class LoopObservables {
 public:
  LoopObservables(const Graph& g, double beta, RunEcho echo, ObservableSpec spec)
      : n_vertices_(g.size()), max_degree_(g.max_degree()), beta_(beta), echo_(std::move(echo)), spec_(std::move(spec)) {
    for (auto& [x, y] : spec_.pairs) {
      if (x == y) throw std::invalid_argument("ObservableSpec: pairs need x != y");
      if (x >= n_vertices_ || y >= n_vertices_) throw std::out_of_range("ObservableSpec: pair vertex out of range");
      if (x > y) std::swap(x, y);
    }
    if (spec_.origin >= n_vertices_) throw std::out_of_range("ObservableSpec: origin out of range");
    for (double k : spec_.cutoffs)
      if (!(k > 0.0)) throw std::invalid_argument("ObservableSpec: cutoffs must be positive");
    same_.assign(spec_.pairs.size(), BatchMeans{});
    dir_.assign(spec_.pairs.size(), BatchMeans{});
    nu_.assign(spec_.cutoffs.size(), BatchMeans{});
    pd_.assign(spec_.cutoffs.size(), BatchMeans{});
    at_zero_.resize(n_vertices_);
  }

  void observe(const LoopConfig& cfg) {
    trace_loops(cfg, scratch_);
    observe(cfg, scratch_);
  }

  void observe(const LoopConfig& cfg, const LoopDecomposition& dec) {
    const double mass = beta_ * static_cast<double>(n_vertices_);
    for (Vertex v = 0; v < n_vertices_; ++v) at_zero_[v] = loop_at(cfg, dec, v, 0.0);

    for (std::size_t i = 0; i < spec_.pairs.size(); ++i) {
      const auto& px = at_zero_[spec_.pairs[i].first];
      const auto& py = at_zero_[spec_.pairs[i].second];
      const bool same = px.loop == py.loop;
      same_[i].add(same ? 1.0 : 0.0);
      dir_[i].add(same ? (px.dir == py.dir ? 1.0 : -1.0) : 0.0);
    }

    ids_.clear();
    for (const auto& p : at_zero_) ids_.push_back(p.loop);
    std::sort(ids_.begin(), ids_.end());
    double pairs_same = 0.0;
    for (std::size_t i = 0; i < ids_.size();) {
      std::size_t j = i;
      while (j < ids_.size() && ids_[j] == ids_[i]) ++j;
      pairs_same += static_cast<double>((j - i) * (j - i));
      i = j;
    }
    const double n2 = static_cast<double>(n_vertices_ * n_vertices_);
    const double connectivity = pairs_same / n2;
    double averaged = 0.0;
    for (const auto& p : at_zero_) averaged += p.length;
    averaged /= mass * static_cast<double>(n_vertices_);
    connectivity_.add(connectivity);
    origin_.add(at_zero_[spec_.origin].length / mass);
    averaged_.add(averaged);
    gap_.add(connectivity - averaged);
    loop_count_.add(static_cast<double>(dec.loop_count()));
    if (spec_.histogram) ++histogram_[dec.loop_count()];

    for (std::size_t c = 0; c < spec_.cutoffs.size(); ++c) {
      double macro = 0.0, squares = 0.0;
      for (double l : dec.loop_lengths) {
        if (l >= spec_.cutoffs[c]) {
          macro += l;
          squares += l * l;
        }
      }
      nu_[c].add(macro / mass);
      if (macro > 0.0) pd_[c].add(squares / (macro * macro));
    }
  }

  ObservableResults results() const {
    ObservableResults r;
    r.echo = echo_;
    r.n_vertices = n_vertices_;
    r.max_degree = max_degree_;
    for (std::size_t i = 0; i < spec_.pairs.size(); ++i) {
      const auto [x, y] = spec_.pairs[i];
      const auto tag = "(" + std::to_string(x) + "," + std::to_string(y) + ")";
      r.same_loop[spec_.pairs[i]] = make_result("same_loop_probability" + tag, same_[i], echo_);
      r.direction[spec_.pairs[i]] = make_result("direction_correlation" + tag, dir_[i], echo_);
    }
    r.origin_fraction = make_result("origin_loop_fraction", origin_, echo_);
    r.averaged_fraction = make_result("averaged_loop_fraction", averaged_, echo_);
    r.connectivity = make_result("connectivity_sum", connectivity_, echo_);
    r.sandwich_gap = make_result("sandwich_gap", gap_, echo_);
    r.loop_count = make_result("loop_count", loop_count_, echo_);
    for (std::size_t c = 0; c < spec_.cutoffs.size(); ++c) {
      r.nu.push_back(make_result("nu_estimate", nu_[c], echo_, spec_.cutoffs[c]));
      if (pd_[c].count() > 0 && nu_[c].mean() >= detail::min_macroscopic_mass)
        r.pd.push_back(make_result("pd_same_element", pd_[c], echo_, spec_.cutoffs[c]));
      else
        r.pd.push_back(std::nullopt);
    }
    r.loop_count_histogram = histogram_;
    return r;
  }

  std::uint64_t samples() const { return loop_count_.count(); }

 private:
  std::size_t n_vertices_;
  std::size_t max_degree_;
  double beta_;
  RunEcho echo_;
  ObservableSpec spec_;
  std::vector<BatchMeans> same_, dir_, nu_, pd_;
  BatchMeans origin_, averaged_, connectivity_, gap_, loop_count_;
  std::map<std::size_t, std::uint64_t> histogram_;
  LoopDecomposition scratch_;
  std::vector<LoopPoint> at_zero_;
  std::vector<std::uint32_t> ids_;
};

/// Predictions linking the macroscopic mass nu to far-apart correlations if
/// loop lengths follow PD(2) (u = +-1) or PD(1) (-1 < u < 1).
struct NuRelationRow {
  double nu = 0.0;
  double theta = 0.0;
  double predicted_same_loop = 0.0;  // nu^2/(theta+1): nu^2/3 or nu^2/2
  double predicted_s3s3 = 0.0;       // a quarter of that: nu^2/12 or nu^2/8
  double measured_same_loop = 0.0;
  double measured_same_loop_stderr = 0.0;
};

inline NuRelationRow nu_relation(double nu, double u, const EstimatorResult& far_same_loop) {
  NuRelationRow row;
  row.nu = nu;
  row.theta = (u == 1.0 || u == -1.0) ? 2.0 : 1.0;
  row.predicted_same_loop = nu * nu / (row.theta + 1.0);
  row.predicted_s3s3 = row.predicted_same_loop / 4.0;
  row.measured_same_loop = far_same_loop.mean;
  row.measured_same_loop_stderr = far_same_loop.std_error;
  return row;
}

}  // namespace loopsoup
