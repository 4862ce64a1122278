#include <doctest.h>

#include <cmath>
#include <numeric>

#include "efilt/errors.hpp"
#include "efilt/noise.hpp"

using namespace efilt;

namespace {

LabeledState channels_with_register(const CVector& amps, std::size_t outcomes) {
  return LabeledState({Factor::system("T", static_cast<std::size_t>(amps.size()))}, amps)
      .with_register("E0", outcomes);
}

CMatrix pauli(int which) {
  CMatrix m = CMatrix::Zero(2, 2);
  const cplx i(0.0, 1.0);
  if (which == 0) m << 0, 1, 1, 0;
  if (which == 1) m << 0, -i, i, 0;
  if (which == 2) m << 1, 0, 0, -1;
  return m;
}

}  // namespace

TEST_CASE("phase noise spec normalization") {
  CHECK_NOTHROW(PhaseNoiseSpec({{cplx(0.6, 0), cplx(0, 0.8)}}));
  CHECK_THROWS_AS(PhaseNoiseSpec({{cplx(0.6, 0), cplx(0.6, 0)}}), ConfigError);
  const PhaseNoiseSpec u = PhaseNoiseSpec::uniform(3, 0.81);
  CHECK(u.channels() == 3);
  CHECK(u[2].alpha.real() == doctest::Approx(0.9));
  CHECK(std::norm(u[2].beta) == doctest::Approx(0.19));
}

TEST_CASE("phase alignment rotates alpha and beta together") {
  const PhaseNoiseSpec spec({{std::polar(0.8, 1.0), std::polar(0.6, -0.4)}});
  const PhaseNoiseSpec aligned = spec.phase_aligned();
  CHECK(std::abs(aligned[0].alpha - cplx(0.8, 0.0)) < 1e-15);
  CHECK(std::abs(aligned[0].beta - std::polar(0.6, -1.4)) < 1e-15);
}

TEST_CASE("apply_phase_noise examples") {
  SUBCASE("no noise leaves the state alone") {
    const CVector psi = CVector::Constant(3, cplx(1 / std::sqrt(3.0), 0));
    const LabeledState in = channels_with_register(psi, 4);
    const LabeledState out = apply_phase_noise(in, PhaseNoiseSpec::uniform(3, 1.0), 0);
    CHECK((out.amplitudes() - in.amplitudes()).norm() < 1e-15);
  }
  SUBCASE("alpha = 0 correlates the register with the channel") {
    const CVector psi = CVector::Constant(2, cplx(1 / std::sqrt(2.0), 0));
    const LabeledState out = apply_phase_noise(channels_with_register(psi, 3), PhaseNoiseSpec::uniform(2, 0.0), 0);
    CHECK(std::abs(out.amplitude({{0, 1}})) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(std::abs(out.amplitude({{1, 2}})) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(std::abs(out.amplitude({{0, 0}})) < 1e-15);
  }
  SUBCASE("uniform 0.9 on two channels: off-diagonal 0.45") {
    const CVector psi = CVector::Constant(2, cplx(1 / std::sqrt(2.0), 0));
    const LabeledState out = apply_phase_noise(channels_with_register(psi, 3), PhaseNoiseSpec::uniform(2, 0.9), 0);
    const DensityMatrix rho = partial_trace_env(out);
    CHECK(rho(0, 1).real() == doctest::Approx(0.45).epsilon(1e-12));  // oracle: 0.44999999999999984
    CHECK(std::abs(out.norm_squared() - 1.0) < 1e-12);
  }
  SUBCASE("a consumed register is rejected") {
    const CVector psi = CVector::Ones(1);
    const LabeledState once = apply_phase_noise(channels_with_register(psi, 2), PhaseNoiseSpec::uniform(1, 0.5), 0);
    CHECK_THROWS_AS(apply_phase_noise(once, PhaseNoiseSpec::uniform(1, 0.5), 0), std::logic_error);
  }
}

TEST_CASE("internal noise dilation") {
  SUBCASE("Pauli set is an isometry and carries 1 - alpha^2") {
    const InternalNoiseSpec spec = InternalNoiseSpec::pauli(0.7);
    CHECK(spec.dilation().is_isometry());
    CHECK(spec.error_probability() == doctest::Approx(0.3));
    CHECK(spec.error_count() == 3);
  }
  SUBCASE("non-isometric specs are refused") {
    std::vector<InternalError> errs{{cplx(0.6, 0), DenseOperator(pauli(0))}, {cplx(0.6, 0), DenseOperator(pauli(0))}};
    CHECK_THROWS_AS(InternalNoiseSpec(2, cplx(std::sqrt(0.5), 0), errs), NumericalCheckError);
    CMatrix lowering = CMatrix::Zero(2, 2);
    lowering(0, 1) = 1.0;
    CHECK_THROWS_AS(InternalNoiseSpec::single(0.5, DenseOperator(lowering)), NumericalCheckError);
  }
  SUBCASE("single Pauli-Z dephases the internal state") {
    const InternalNoiseSpec spec = InternalNoiseSpec::single(0.6, DenseOperator(pauli(2)));
    CVector amps(2);
    amps << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
    LabeledState s({Factor::system("T", 1), Factor::system("I", 2)}, amps);
    s = s.with_register("E0", 2);
    const LabeledState out = apply_internal_noise(s, spec, 0, 0, 1);
    const DensityMatrix rho = partial_trace_env(out);
    CHECK(rho(0, 0).real() == doctest::Approx(0.5));
    CHECK(rho(0, 1).real() == doctest::Approx(0.5 * (0.6 - 0.4)));
  }
  SUBCASE("property: sum_l |beta_l|^2 <mu|E^dag E|mu> + |alpha|^2 = 1") {
    for (const double a2 : {0.0, 0.3, 0.9, 1.0}) {
      const InternalNoiseSpec spec = InternalNoiseSpec::pauli(a2);
      for (int mu = 0; mu < 2; ++mu) {
        double total = std::norm(spec.alpha());
        for (const auto& e : spec.errors()) {
          total += std::norm(e.beta) * (e.op.matrix().adjoint() * e.op.matrix())(mu, mu).real();
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
      }
    }
  }
}

TEST_CASE("Pauli noise on one channel: error probability 1 - alpha^2") {
  const double a2 = 0.8;
  const InternalNoiseSpec spec = InternalNoiseSpec::pauli(a2);
  CVector amps(2);
  amps << 1.0, 0.0;
  LabeledState s({Factor::system("T", 1), Factor::system("I", 2)}, amps);
  s = s.with_register("E0", 4);
  const LabeledState out = apply_internal_noise(s, spec, 0, 0, 1);
  double undisturbed = 0.0;
  for (std::size_t mu = 0; mu < 2; ++mu) undisturbed += std::norm(out.amplitude({{0, mu, 0}}));
  CHECK(1.0 - undisturbed == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("sample_phases") {
  CHECK_THROWS_AS(validate(RandomPhaseSpec{1.2, PhaseDistribution::point_mass_mixture}), ConfigError);
  CHECK_THROWS_AS(validate(RandomPhaseSpec{-0.1, PhaseDistribution::wrapped_gaussian}), ConfigError);

  const auto zeros = sample_phases({1.0, PhaseDistribution::point_mass_mixture}, 50, std::uint64_t{3});
  CHECK(std::all_of(zeros.begin(), zeros.end(), [](double p) { return p == 0.0; }));

  for (const auto dist : {PhaseDistribution::point_mass_mixture, PhaseDistribution::wrapped_gaussian}) {
    const std::size_t n = 100000;
    const auto phases = sample_phases({0.9, dist}, n, std::uint64_t{123});
    cplx mean = 0.0;
    for (const double p : phases) mean += std::polar(1.0, p);
    mean /= static_cast<double>(n);
    CHECK(std::abs(mean - cplx(0.9, 0.0)) < 3 * 0.44 / std::sqrt(static_cast<double>(n)));
  }

  // Target 0 with the mixture gives uniform phases: first circular moment vanishes.
  const auto uniform = sample_phases({0.0, PhaseDistribution::point_mass_mixture}, 100000, std::uint64_t{9});
  cplx m = 0.0;
  for (const double p : uniform) m += std::polar(1.0, p);
  CHECK(std::abs(m / 100000.0) < 3.0 / std::sqrt(100000.0));

  const auto again = sample_phases({0.5, PhaseDistribution::point_mass_mixture}, 10, std::uint64_t{77});
  CHECK(again == sample_phases({0.5, PhaseDistribution::point_mass_mixture}, 10, std::uint64_t{77}));
}

TEST_CASE("alpha_from_length") {
  CHECK(alpha_from_length({0.0, 5.0}) == 1.0);
  CHECK(alpha_from_length({3.0, 0.0}) == 1.0);
  const double a = alpha_from_length({std::log(1 / 0.81), 1.0});
  CHECK(a * a == doctest::Approx(0.81).epsilon(1e-14));
}
