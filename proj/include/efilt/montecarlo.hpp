#pragma once

// Seed splitting and moment accumulation for sharded Monte-Carlo runs.
//
// Each worker draws from its own std::mt19937_64 seeded from (root seed,
// worker index). Workers accumulate sums, squares and cross products of a
// fixed set of real statistics; shards are merged in worker order so results
// are deterministic for a fixed (seed, worker count) pair.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace efilt {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

std::mt19937_64 worker_rng(std::uint64_t root_seed, std::size_t worker);

class MomentAccumulator {
 public:
  explicit MomentAccumulator(std::size_t vars);

  void add(std::span<const double> x);
  void merge(const MomentAccumulator& other);

  std::size_t vars() const { return vars_; }
  std::size_t count() const { return n_; }
  double mean(std::size_t i) const;
  /// Unbiased sample covariance.
  double covariance(std::size_t i, std::size_t j) const;
  double stderr_of_mean(std::size_t i) const;
  /// Delta-method standard error of g(mean) given the gradient of g at the mean.
  double delta_stderr(std::span<const double> grad) const;
  /// Standard error of mean(i) / mean(j).
  double ratio_stderr(std::size_t i, std::size_t j) const;

 private:
  std::size_t vars_;
  std::size_t n_ = 0;
  std::vector<double> sum_;
  std::vector<double> cross_;  // row-major vars x vars
};

/// Per-trial callback: draw from `rng` and write `vars` statistics into `out`.
using TrialFn = std::function<void(std::mt19937_64& rng, std::span<double> out)>;

/// Splits `trials` across `workers` threads (worker w gets trials/workers,
/// plus one for w < trials % workers) and merges their accumulators.
MomentAccumulator run_sharded(std::size_t trials, std::size_t workers, std::uint64_t seed, std::size_t vars,
                              const TrialFn& trial);

}  // namespace efilt
