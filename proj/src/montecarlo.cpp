#include "efilt/montecarlo.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace efilt {

std::mt19937_64 worker_rng(std::uint64_t root_seed, std::size_t worker) {
  std::seed_seq seq{static_cast<std::uint32_t>(root_seed), static_cast<std::uint32_t>(root_seed >> 32),
                    static_cast<std::uint32_t>(worker), static_cast<std::uint32_t>(std::uint64_t{worker} >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

MomentAccumulator::MomentAccumulator(std::size_t vars) : vars_(vars), sum_(vars, 0.0), cross_(vars * vars, 0.0) {}

void MomentAccumulator::add(std::span<const double> x) {
  if (x.size() != vars_) throw std::invalid_argument("statistic count mismatch");
  ++n_;
  for (std::size_t i = 0; i < vars_; ++i) {
    sum_[i] += x[i];
    for (std::size_t j = i; j < vars_; ++j) cross_[i * vars_ + j] += x[i] * x[j];
  }
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.vars_ != vars_) throw std::invalid_argument("cannot merge accumulators of different width");
  n_ += other.n_;
  for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += other.sum_[i];
  for (std::size_t i = 0; i < cross_.size(); ++i) cross_[i] += other.cross_[i];
}

double MomentAccumulator::mean(std::size_t i) const {
  if (n_ == 0) throw std::logic_error("mean of empty accumulator");
  return sum_.at(i) / static_cast<double>(n_);
}

double MomentAccumulator::covariance(std::size_t i, std::size_t j) const {
  if (n_ < 2) return 0.0;
  if (i > j) std::swap(i, j);
  const double n = static_cast<double>(n_);
  const double c = (cross_.at(i * vars_ + j) - sum_[i] * sum_[j] / n) / (n - 1.0);
  return (i == j) ? std::max(c, 0.0) : c;
}

double MomentAccumulator::stderr_of_mean(std::size_t i) const {
  if (n_ < 2) return 0.0;
  return std::sqrt(covariance(i, i) / static_cast<double>(n_));
}

double MomentAccumulator::delta_stderr(std::span<const double> grad) const {
  if (grad.size() != vars_) throw std::invalid_argument("gradient size mismatch");
  if (n_ < 2) return 0.0;
  double v = 0.0;
  for (std::size_t i = 0; i < vars_; ++i) {
    if (grad[i] == 0.0) continue;
    for (std::size_t j = 0; j < vars_; ++j) {
      if (grad[j] == 0.0) continue;
      v += grad[i] * grad[j] * covariance(i, j);
    }
  }
  return std::sqrt(std::max(v, 0.0) / static_cast<double>(n_));
}

double MomentAccumulator::ratio_stderr(std::size_t i, std::size_t j) const {
  const double mi = mean(i);
  const double mj = mean(j);
  std::vector<double> grad(vars_, 0.0);
  grad[i] += 1.0 / mj;
  grad[j] += -mi / (mj * mj);
  return delta_stderr(grad);
}

MomentAccumulator run_sharded(std::size_t trials, std::size_t workers, std::uint64_t seed, std::size_t vars,
                              const TrialFn& trial) {
  if (workers == 0) throw std::invalid_argument("worker count must be at least 1");
  std::vector<MomentAccumulator> shards(workers, MomentAccumulator(vars));
  auto work = [&](std::size_t w) {
    const std::size_t share = trials / workers + (w < trials % workers ? 1 : 0);
    auto rng = worker_rng(seed, w);
    std::vector<double> stats(vars);
    for (std::size_t t = 0; t < share; ++t) {
      trial(rng, stats);
      shards[w].add(stats);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  MomentAccumulator total(vars);
  for (const auto& s : shards) total.merge(s);
  return total;
}

}  // namespace efilt
