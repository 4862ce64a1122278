#include <doctest.h>

#include <random>

#include "efilt/montecarlo.hpp"

using namespace efilt;

TEST_CASE("moment accumulator on known data") {
  MomentAccumulator acc(2);
  const double xs[][2] = {{1, 2}, {2, 4}, {3, 6}, {4, 8}};
  for (const auto& x : xs) acc.add(x);
  CHECK(acc.count() == 4);
  CHECK(acc.mean(0) == doctest::Approx(2.5));
  CHECK(acc.covariance(0, 0) == doctest::Approx(5.0 / 3.0));
  CHECK(acc.covariance(0, 1) == doctest::Approx(10.0 / 3.0));
  CHECK(acc.stderr_of_mean(0) == doctest::Approx(std::sqrt(5.0 / 12.0)));
  // x1 = 2 x0 exactly, so the ratio has no spread.
  CHECK(acc.ratio_stderr(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("merging shards equals one pass") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  MomentAccumulator whole(3), left(3), right(3);
  for (int i = 0; i < 1000; ++i) {
    const double x[3] = {g(rng), g(rng), g(rng)};
    whole.add(x);
    (i < 400 ? left : right).add(x);
  }
  left.merge(right);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(left.mean(i) == doctest::Approx(whole.mean(i)).epsilon(1e-12));
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(left.covariance(i, j) == doctest::Approx(whole.covariance(i, j)).epsilon(1e-10));
    }
  }
}

TEST_CASE("sharded runs are deterministic per (seed, workers)") {
  const TrialFn trial = [](std::mt19937_64& rng, std::span<double> out) {
    out[0] = std::uniform_real_distribution<double>(0, 1)(rng);
  };
  const MomentAccumulator a = run_sharded(10001, 3, 42, 1, trial);
  const MomentAccumulator b = run_sharded(10001, 3, 42, 1, trial);
  CHECK(a.count() == 10001);
  CHECK(a.mean(0) == b.mean(0));
  CHECK(a.covariance(0, 0) == b.covariance(0, 0));
  const MomentAccumulator c = run_sharded(10001, 3, 43, 1, trial);
  CHECK(a.mean(0) != c.mean(0));
  CHECK(std::abs(a.mean(0) - 0.5) < 4 * a.stderr_of_mean(0));
}

TEST_CASE("worker streams differ") {
  std::mt19937_64 w0 = worker_rng(7, 0);
  std::mt19937_64 w1 = worker_rng(7, 1);
  CHECK(w0() != w1());
  std::mt19937_64 again = worker_rng(7, 0);
  std::mt19937_64 first = worker_rng(7, 0);
  CHECK(again() == first());
}
