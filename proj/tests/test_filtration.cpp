#include <doctest.h>

#include <cmath>
#include <random>

#include "efilt/errors.hpp"
#include "efilt/filtration.hpp"
#include "efilt/runner.hpp"

using namespace efilt;

namespace {

FiltrationConfig single_source(Codec codec, ChannelNoiseModel noise, std::size_t segments = 1) {
  const std::size_t internal = std::holds_alternative<InternalNoiseSpec>(noise)
                                   ? std::get<InternalNoiseSpec>(noise).internal_dim()
                                   : 1;
  CVector input = CVector::Zero(static_cast<Eigen::Index>(codec.source_count() * internal));
  input(0) = 1.0;
  return {std::move(codec), std::move(noise), segments, std::nullopt, input, std::nullopt, false, kDefaultDimCap};
}

FiltrationConfig two_sources(std::size_t t, double a2) {
  CVector input = CVector::Constant(2, cplx(1 / std::sqrt(2.0), 0.0));
  return {multiplexed(fourier_codec(t), 2), PhaseNoiseSpec::uniform(2 * t, a2), 1, std::nullopt, input, std::nullopt,
          false, kDefaultDimCap};
}

}  // namespace

TEST_CASE("run_exact examples") {
  const FiltrationOutcome clean = run_exact(single_source(fourier_codec(4), PhaseNoiseSpec::uniform(4, 1.0)));
  CHECK(clean.p_success == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(clean.conditional_fidelity == doctest::Approx(1.0).epsilon(1e-12));

  const FiltrationOutcome t1 = run_exact(single_source(fourier_codec(1), PhaseNoiseSpec::uniform(1, 0.7)));
  CHECK(t1.p_success == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t1.p_success_error == doctest::Approx(0.3).epsilon(1e-12));

  // Oracle (numpy dilation): 0.8499999999999998.
  const FiltrationOutcome t4 = run_exact(single_source(fourier_codec(4), PhaseNoiseSpec::uniform(4, 0.8)));
  CHECK(std::abs(t4.p_success - 0.85) < 1e-12);
  CHECK(std::abs(t4.p_success_error - 0.05) < 1e-12);
}

TEST_CASE("property: outcome bookkeeping and grid agreement") {
  for (const std::size_t t : {1, 2, 3, 4, 8}) {
    for (const double a2 : {0.5, 0.8, 0.9, 0.99}) {
      const FiltrationOutcome o = run_exact(single_source(fourier_codec(t), PhaseNoiseSpec::uniform(t, a2)));
      const double td = static_cast<double>(t);
      CHECK(std::abs(o.p_success - (o.p_success_no_error + o.p_success_error)) < 1e-12);
      CHECK(std::abs(o.p_success - (a2 + (1 - a2) / td)) < 1e-12);
      CHECK(std::abs(o.p_success_error - (1 - a2) / td) < 1e-12);
      CHECK(o.p_success >= 0.0);
      CHECK(o.p_success <= 1.0 + 1e-12);
      // Discarded ports carry nothing from the undisturbed environment state.
      CHECK(o.discarded_undisturbed < 1e-24);
    }
  }
}

TEST_CASE("property: monotone in T") {
  for (const double a2 : {0.3, 0.7, 0.95}) {
    double err = INFINITY;
    double vis = -INFINITY;
    for (std::size_t t = 1; t <= 8; ++t) {
      const FiltrationOutcome o = run_exact(two_sources(t, a2));
      CHECK(o.p_success_error < err);
      CHECK(*o.visibility > vis);
      err = o.p_success_error;
      vis = *o.visibility;
    }
  }
}

TEST_CASE("visibility") {
  CHECK(visibility_analytic(1, 0.7) == doctest::Approx(0.7));
  CHECK(visibility_analytic(4, 0.8) == doctest::Approx(3.2 / 3.4).epsilon(1e-14));
  CHECK(visibility_analytic(100000, 0.5) > 0.9999);
  // Oracle (numpy 8-point sweep): 0.9411764705882355.
  CHECK(std::abs(measure_visibility(two_sources(4, 0.8)) - 0.9411764705882355) < 1e-12);
  CHECK(std::abs(*run_exact(two_sources(4, 0.8)).visibility - 0.9411764705882355) < 1e-12);
}

TEST_CASE("non-uniform channels") {
  std::vector<ChannelNoise> dead;
  for (const double a : {0.0, 0.9, 0.8, 0.7}) dead.push_back({cplx(a, 0), cplx(std::sqrt(1 - a * a), 0)});
  const NonuniformReport r = run_nonuniform(single_source(fourier_codec(4), PhaseNoiseSpec(dead)));
  CHECK(std::abs(r.exact.p_success_no_error - 0.36) < 1e-12);
  CHECK(std::abs(r.exact.p_success_error - 2.06 / 16) < 1e-12);
  CHECK(r.bound_holds);

  std::vector<ChannelNoise> same(3, {cplx(std::sqrt(0.8), 0), cplx(std::sqrt(0.2), 0)});
  const NonuniformReport u = run_nonuniform(single_source(fourier_codec(3), PhaseNoiseSpec(same)));
  CHECK(std::abs(u.exact.p_success_no_error - 0.8) < 1e-12);
  CHECK(std::abs(u.exact.p_success_error - 0.2 / 3) < 1e-12);
}

TEST_CASE("series filtration") {
  CHECK(series_error_analytic(-std::log(0.81), 1.0, 2, 2) == doctest::Approx(0.0925).epsilon(1e-14));
  CHECK(series_error_analytic(0.3, 1.0, 5, 1) == doctest::Approx(1 - std::exp(-0.3)));
  CHECK(series_error_analytic(0.3, 2.0, 1, 4) == doctest::Approx((1 - std::exp(-0.6)) / 4));

  FiltrationConfig cfg = single_source(fourier_codec(2), PhaseNoiseSpec::uniform(2, 1.0), 2);
  cfg.length = LengthModel{-std::log(0.81), 1.0};
  // Oracle (numpy, two filtered segments): 0.09250000000000003.
  CHECK(std::abs(run_exact(cfg).p_success_error - 0.0925) < 1e-10);

  FiltrationConfig three = single_source(fourier_codec(3), PhaseNoiseSpec::uniform(3, 1.0), 3);
  three.length = LengthModel{-std::log(0.5), 1.0};
  // Oracle (numpy): 0.1415455353805125.
  CHECK(std::abs(run_exact(three).p_success_error - 0.1415455353805125) < 1e-10);

  CHECK(series_two_segment_analytic(0.81, 2) == doctest::Approx(0.162925).epsilon(1e-14));
  CHECK(series_two_segment_analytic(1.0, 3) == 0.0);
  CHECK(series_two_segment_analytic(0.6, 1) == doctest::Approx(1 - 0.36));
  CHECK(series_limit_analytic(0.9, 2) == doctest::Approx(0.09).epsilon(1e-14));
  CHECK(series_limit_analytic(0.6, 1) == doctest::Approx(1 - 0.36));
  CHECK(series_limit_analytic(1.0, 5) == 0.0);
}

TEST_CASE("property: two-segment filtration beats one shot") {
  for (int i = 1; i < 100; ++i) {
    const double a = i / 100.0;
    for (std::size_t t = 2; t <= 16; ++t) {
      CHECK(series_two_segment_analytic(a, t) < (1 - a * a) / static_cast<double>(t));
    }
  }
}

TEST_CASE("module dephasing knob adds error") {
  FiltrationConfig cfg = single_source(fourier_codec(2), PhaseNoiseSpec::uniform(2, 1.0), 2);
  cfg.length = LengthModel{-std::log(0.81), 1.0};
  const double clean = run_exact(cfg).p_success_error;
  cfg.module_alpha2 = 0.99;
  CHECK(run_exact(cfg).p_success_error > clean);
}

TEST_CASE("internal degrees of freedom") {
  for (const std::size_t t : {1, 2, 4}) {
    const FiltrationOutcome o = run_exact(single_source(fourier_codec(t), InternalNoiseSpec::pauli(0.8)));
    CHECK(std::abs(o.p_success_error - 0.2 / static_cast<double>(t)) < 1e-12);
  }
}

TEST_CASE("Monte-Carlo agrees with the exact pipeline") {
  const FiltrationConfig cfg = two_sources(3, 0.7);
  const FiltrationOutcome exact = run_exact(cfg);
  const MonteCarloOutcome mc = run_monte_carlo(cfg, 50000, 2024, 2);
  CHECK(std::abs(mc.p_success - exact.p_success) < 4 * mc.p_success_stderr);
  CHECK(std::abs(mc.conditional_fidelity - exact.conditional_fidelity) < 4 * mc.fidelity_stderr);
  CHECK(std::abs(*mc.visibility - *exact.visibility) < 4 * mc.visibility_stderr);
  CHECK_THROWS_AS(run_monte_carlo(single_source(fourier_codec(2), InternalNoiseSpec::pauli(0.8)), 10, 1),
                  ConfigError);
  const MonteCarloOutcome again = run_monte_carlo(cfg, 50000, 2024, 2);
  CHECK(again.p_success == mc.p_success);
}

TEST_CASE("property: any faithful codec leaves at least |beta|^2/T of noise") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 40; ++i) {
    const std::size_t t = 2 + static_cast<std::size_t>(i % 5);
    const FiltrationOutcome o =
        run_exact(single_source(random_faithful_codec(t, rng), PhaseNoiseSpec::uniform(t, 0.6)));
    CHECK(o.p_success_error >= 0.4 / static_cast<double>(t) - 1e-12);
  }
}

TEST_CASE("collective encoding closed forms") {
  CHECK(collective_average_fidelity_analytic(1.0) == doctest::Approx(1.0));
  CHECK(collective_average_fidelity_analytic(0.5) > trivial_average_fidelity_analytic(0.5));
  CHECK(collective_state_fidelity_analytic(0.5, 1.0) == doctest::Approx((0.5 + 0.5 / 3) / (0.5 + 1.0 / 3)));
}

TEST_CASE("dimension checks") {
  FiltrationConfig bad = single_source(fourier_codec(3), PhaseNoiseSpec::uniform(4, 0.5));
  CHECK_THROWS_AS(run_exact(bad), ConfigError);
  FiltrationConfig big = single_source(fourier_codec(8), PhaseNoiseSpec::uniform(8, 1.0), 7);
  big.length = LengthModel{0.1, 1.0};
  CHECK_THROWS_AS(run_exact(big), DimensionError);
}

TEST_CASE("codec comparison") {
  const CodecComparison c = compare_codecs(4, 0.8, 2);
  CHECK(c.max_deviation < 1e-12);
  CHECK(c.fourier_report.optimal);
  CHECK(c.hadamard_report.optimal);
}

TEST_CASE("thresholds are strict") {
  CHECK(threshold_report(0.86).bb84_secure);
  CHECK(threshold_report(0.86).werner_entangled);
  CHECK_FALSE(threshold_report(0.70).bb84_secure);
  CHECK(threshold_report(0.70).werner_entangled);
  CHECK_FALSE(threshold_report(0.50).werner_entangled);
  CHECK(threshold_report(0.50).at_boundary);
  CHECK_FALSE(threshold_report(0.85).bb84_secure);
}
