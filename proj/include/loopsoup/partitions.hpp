#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "loopsoup/statistics.hpp"

namespace loopsoup {

/// beta(theta) variate, P(X > s) = (1-s)^theta, by inverting the tail:
/// X = 1 - U^(1/theta).
inline double sample_beta_theta(double theta, Rng& rng) {
  if (!(theta > 0.0)) throw std::invalid_argument("sample_beta_theta: theta must be positive");
  return 1.0 - std::pow(rng.uniform_positive(), 1.0 / theta);
}

/// E[X^2] = 2/((theta+1)(theta+2)).
inline double beta_second_moment(double theta) { return 2.0 / ((theta + 1.0) * (theta + 2.0)); }

/// E[(1-X)^2] = theta/(theta+2).
inline double beta_complement_second_moment(double theta) { return theta / (theta + 2.0); }

/// E[1-X] = theta/(theta+1).
inline double beta_complement_mean(double theta) { return theta / (theta + 1.0); }

/// Stick-breaking weights. Unsorted they follow GEM(theta); sorted
/// descending they follow PD(theta). `residual` is the unbroken remainder.
struct StickPartition {
  std::vector<double> weights;
  double theta = 1.0;
  double residual = 1.0;
  bool sorted = false;
};

inline constexpr double stick_residual_floor = 1e-12;

/// First n_terms stick-breaking weights, stopping early once the residual
/// falls below 1e-12.
inline StickPartition sample_gem(double theta, std::size_t n_terms, Rng& rng) {
  if (n_terms == 0) throw std::invalid_argument("sample_gem: n_terms must be positive");
  StickPartition p;
  p.theta = theta;
  p.weights.reserve(std::min<std::size_t>(n_terms, 256));
  double remaining = 1.0;
  for (std::size_t i = 0; i < n_terms && remaining >= stick_residual_floor; ++i) {
    const double x = sample_beta_theta(theta, rng);
    p.weights.push_back(remaining * x);
    remaining *= 1.0 - x;
  }
  p.residual = remaining;
  return p;
}

inline StickPartition gem_to_pd(StickPartition p) {
  std::sort(p.weights.begin(), p.weights.end(), std::greater<>());
  p.sorted = true;
  return p;
}

inline StickPartition sample_pd(double theta, std::size_t n_terms, Rng& rng) {
  return gem_to_pd(sample_gem(theta, n_terms, rng));
}

/// Sum of squared weights: chance that two uniform points of [0,1] fall in
/// the same recorded part. The residual's own contribution is at most
/// residual^2 and is reported separately.
inline double same_element_probability(std::span<const double> weights) {
  double s = 0.0;
  for (double w : weights) s += w * w;
  return s;
}

inline double same_element_probability(const StickPartition& p) { return same_element_probability(p.weights); }

inline double same_element_residual_bound(const StickPartition& p) { return p.residual * p.residual; }

inline double analytic_same_element(double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("analytic_same_element: theta must be positive");
  return 1.0 / (theta + 1.0);
}

/// Partial sum of sum_{k>=1} E[(1-X)^2]^(k-1) E[X^2], the per-piece
/// decomposition of the same-element probability under GEM(theta).
inline double same_element_series(double theta, std::size_t n_terms) {
  const double ratio = beta_complement_second_moment(theta);
  const double first = beta_second_moment(theta);
  double total = 0.0, power = 1.0;
  for (std::size_t k = 0; k < n_terms; ++k) {
    total += power * first;
    power *= ratio;
  }
  return total;
}

/// Relative split and merge propensities of the reference chain. The ratio
/// split/merge is the PD parameter of its invariant law.
struct SplitMergeRates {
  double split = 1.0;
  double merge = 1.0;

  void validate() const {
    if (!(split > 0.0) || !(merge > 0.0) || !std::isfinite(split) || !std::isfinite(merge))
      throw std::invalid_argument("SplitMergeRates: rates must be positive and finite");
  }
  double theta() const { return split / merge; }
};

/// Split-merge chain on partitions of [0,1]. Each step draws two uniform
/// points; two different parts merge (probability proportional to the
/// product of their sizes), one part is split at a uniform position
/// (probability proportional to its squared size). Splits and merges are
/// then accepted with probabilities proportional to the rates.
class SplitMergeChain {
 public:
  SplitMergeChain(std::vector<double> initial, SplitMergeRates rates) : parts_(std::move(initial)), rates_(rates) {
    rates_.validate();
    if (parts_.empty()) throw std::invalid_argument("SplitMergeChain: empty initial partition");
    double total = 0.0;
    for (double w : parts_) {
      if (!(w > 0.0)) throw std::invalid_argument("SplitMergeChain: parts must be positive");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("SplitMergeChain: parts must sum to one");
    const double top = std::max(rates_.split, rates_.merge);
    p_split_ = rates_.split / top;
    p_merge_ = rates_.merge / top;
  }

  void step(Rng& rng) {
    const double s = rng.uniform();
    const double t = rng.uniform();
    const std::size_t i = locate(s);
    const std::size_t j = locate(t);
    if (i == j) {
      if (rng.uniform() < p_split_) {
        const double cut = rng.uniform_positive();
        const double w = parts_[i];
        parts_[i] = w * cut;
        if (w * (1.0 - cut) > 0.0) parts_.push_back(w * (1.0 - cut));
      }
    } else if (rng.uniform() < p_merge_) {
      parts_[std::min(i, j)] += parts_[std::max(i, j)];
      parts_.erase(parts_.begin() + static_cast<std::ptrdiff_t>(std::max(i, j)));
    }
  }

  std::span<const double> parts() const { return parts_; }

  std::vector<double> sorted_parts() const {
    auto p = parts_;
    std::sort(p.begin(), p.end(), std::greater<>());
    return p;
  }

 private:
  std::size_t locate(double x) const {
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < parts_.size(); ++k) {
      acc += parts_[k];
      if (x < acc) return k;
    }
    return parts_.size() - 1;
  }

  std::vector<double> parts_;
  SplitMergeRates rates_;
  double p_split_ = 1.0;
  double p_merge_ = 1.0;
};

/// Runs `steps` moves, calling hook(parts) after each one.
template <typename Hook>
std::vector<double> split_merge_reference_chain(std::vector<double> initial, SplitMergeRates rates, std::uint64_t steps,
                                                Rng& rng, Hook&& hook) {
  SplitMergeChain chain(std::move(initial), rates);
  for (std::uint64_t i = 0; i < steps; ++i) {
    chain.step(rng);
    hook(chain.parts());
  }
  return chain.sorted_parts();
}

inline std::vector<double> split_merge_reference_chain(std::vector<double> initial, SplitMergeRates rates,
                                                       std::uint64_t steps, Rng& rng) {
  return split_merge_reference_chain(std::move(initial), rates, steps, rng, [](std::span<const double>) {});
}

/// Long-run same-element statistic of the reference chain started from the
/// single-part partition, measured every `thin` steps after `burn_in`.
inline EstimatorResult split_merge_same_element(SplitMergeRates rates, std::uint64_t burn_in, std::uint64_t steps,
                                                std::uint64_t thin, Rng& rng) {
  if (thin == 0) throw std::invalid_argument("split_merge_same_element: thin must be positive");
  BatchMeans acc;
  std::uint64_t k = 0;
  split_merge_reference_chain({1.0}, rates, burn_in + steps, rng, [&](std::span<const double> parts) {
    if (++k > burn_in && (k - burn_in) % thin == 0) acc.add(same_element_probability(parts));
  });
  return make_result("split_merge_same_element", acc, RunEcho{});
}

}  // namespace loopsoup
