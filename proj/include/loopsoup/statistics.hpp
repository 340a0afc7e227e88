#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace loopsoup {

/// 64-bit Mersenne twister with hand-rolled variates, so streams do not
/// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0,1].
  double uniform_positive() { return 1.0 - uniform(); }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  double exponential(double rate) { return -std::log(uniform_positive()) / rate; }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Independent stream seed for chain `index` under a master seed (SplitMix64
/// finalizer over the pair).
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Streaming batch means. Batches double in size whenever their number
/// reaches 2*target, so memory stays bounded without knowing the run length.
class BatchMeans {
 public:
  explicit BatchMeans(std::size_t target_batches = 64) : target_(target_batches < 2 ? 2 : target_batches) {}

  void add(double x) {
    ++count_;
    sum_ += x;
    current_ += x;
    if (++filled_ == batch_size_) {
      batches_.push_back(current_ / static_cast<double>(batch_size_));
      current_ = 0.0;
      filled_ = 0;
      if (batches_.size() == 2 * target_) coarsen();
    }
  }

  std::uint64_t count() const { return count_; }
  double mean() const { return count_ ? sum_ / static_cast<double>(count_) : 0.0; }

  /// Standard error from the complete batches; 0 with fewer than two.
  double stderr_of_mean() const {
    const std::size_t b = batches_.size();
    if (b < 2) return 0.0;
    double m = 0.0;
    for (double x : batches_) m += x;
    m /= static_cast<double>(b);
    double ss = 0.0;
    for (double x : batches_) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(b - 1) / static_cast<double>(b));
  }

  std::size_t batch_size() const { return batch_size_; }

 private:
  void coarsen() {
    for (std::size_t i = 0; i < target_; ++i) batches_[i] = 0.5 * (batches_[2 * i] + batches_[2 * i + 1]);
    batches_.resize(target_);
    batch_size_ *= 2;
  }

  std::size_t target_;
  std::size_t batch_size_ = 1;
  std::size_t filled_ = 0;
  double current_ = 0.0;
  double sum_ = 0.0;
  std::uint64_t count_ = 0;
  std::vector<double> batches_;
};

/// Parameters a result was produced under.
struct RunEcho {
  std::string graph;
  double u = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::string source = "mc";
};

struct EstimatorResult {
  std::string name;
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  RunEcho echo;
  std::optional<double> cutoff;

  /// Pooled estimate of two independent results (sample-count weighted).
  friend EstimatorResult merge(const EstimatorResult& a, const EstimatorResult& b) {
    if (a.n_samples == 0) return b;
    if (b.n_samples == 0) return a;
    EstimatorResult r = a;
    const double na = static_cast<double>(a.n_samples);
    const double nb = static_cast<double>(b.n_samples);
    const double n = na + nb;
    r.n_samples = a.n_samples + b.n_samples;
    r.mean = (na * a.mean + nb * b.mean) / n;
    r.std_error = std::sqrt(na * na * a.std_error * a.std_error + nb * nb * b.std_error * b.std_error) / n;
    return r;
  }
};

inline EstimatorResult make_result(std::string name, const BatchMeans& acc, const RunEcho& echo,
                                   std::optional<double> cutoff = std::nullopt) {
  return {std::move(name), acc.mean(), acc.stderr_of_mean(), acc.count(), echo, cutoff};
}

/// |a - b| in units of the combined standard error. Exact agreement with
/// zero error gives 0; disagreement with zero error gives infinity.
inline double z_score(double a, double b, double se) {
  const double diff = std::abs(a - b);
  if (se > 0.0) return diff / se;
  return diff <= 1e-12 * std::max(1.0, std::abs(b)) ? 0.0 : INFINITY;
}

}  // namespace loopsoup
