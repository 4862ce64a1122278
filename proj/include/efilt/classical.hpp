#pragma once

// Many-excitation and classical-wave filtration: coherent-state currents,
// receiver amplitude/intensity statistics under linear and nonlinear noise,
// and fringe visibility.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "efilt/hilbert.hpp"
#include "efilt/montecarlo.hpp"
#include "efilt/noise.hpp"

namespace efilt {

struct CoherentConfig {
  cplx lambda{1.0, 0.0};
  double phi = 0.0;
  std::size_t transmission = 1;
  /// Mean of e^{iB} on each channel.
  cplx alpha{1.0, 0.0};
};

/// Expected current in the bright output port after multiplexed transmission.
double coherent_current(const CoherentConfig& cfg);
/// Samples i.i.d. phases with |E[e^{iB}]| = |alpha| on all 2T channels.
Estimate coherent_current_monte_carlo(const CoherentConfig& cfg, std::size_t trials, std::uint64_t seed,
                                      std::size_t workers = 1,
                                      PhaseDistribution dist = PhaseDistribution::point_mass_mixture);
/// Fringe visibility of coherent_current over phi.
double coherent_visibility(std::size_t transmission, double alpha2);

enum class ClassicalNoiseKind { deterministic, linear_phase, linear_amplitude, nonlinear_phase };

std::string to_string(ClassicalNoiseKind kind);

/// Per-channel multiplicative noise N(xi, A) acting on the amplitude entering a channel.
struct NoiseFunction {
  ClassicalNoiseKind kind = ClassicalNoiseKind::linear_phase;
  /// Deterministic noise value.
  cplx constant{1.0, 0.0};
  /// Linear phase part (also N1 of the nonlinear kind).
  RandomPhaseSpec phase{};
  /// Amplitude noise f = exp(log_mu + log_sigma Z), Z standard normal.
  double log_mu = 0.0;
  double log_sigma = 0.0;
  /// Nonlinear phase N2 = exp(i phi2 |A_in|^2), phi2 ~ Normal(nl_mean, nl_sigma).
  double nl_mean = 0.0;
  double nl_sigma = 0.0;

  void validate() const;
  cplx sample(double in_abs2, std::mt19937_64& rng) const;
  /// E[N] for a channel whose input amplitude has squared modulus `in_abs2`.
  cplx mean(double in_abs2) const;
  /// E[|N|^2].
  double mean_abs2(double in_abs2) const;
};

struct ClassicalOutcome {
  cplx mean_amplitude;
  double mean_amplitude_stderr = 0.0;  // of the real and imaginary parts, larger of the two
  double mean_intensity = 0.0;
  double intensity_stderr = 0.0;
  double fluctuation = 0.0;
  double fluctuation_stderr = 0.0;
  double visibility = 0.0;
  double visibility_stderr = 0.0;
  std::size_t trials = 0;
};

/// Closed forms; stderr fields stay zero.
ClassicalOutcome classical_analytic(cplx amplitude, std::size_t transmission, const NoiseFunction& nf);

/// Monte-Carlo estimate. Amplitude statistics use one signal of amplitude A
/// over T channels; visibility uses two signals of amplitude A / sqrt 2 each
/// over their own T channels, swept over 16 relative phases.
ClassicalOutcome classical_run(cplx amplitude, std::size_t transmission, const NoiseFunction& nf,
                               std::size_t trials, std::uint64_t seed, std::size_t workers = 1);

cplx classical_mean_amplitude(cplx amplitude, std::size_t transmission, const NoiseFunction& nf, std::size_t trials,
                              std::uint64_t seed);
double classical_mean_intensity(cplx amplitude, std::size_t transmission, const NoiseFunction& nf,
                                std::size_t trials, std::uint64_t seed);
double amplitude_fluctuation(cplx amplitude, std::size_t transmission, const NoiseFunction& nf, std::size_t trials,
                             std::uint64_t seed);
double classical_visibility(cplx amplitude, std::size_t transmission, const NoiseFunction& nf, std::size_t trials,
                            std::uint64_t seed);

struct PortStats {
  std::size_t port = 0;  // 1 .. T-1
  cplx mean_amplitude;
  double mean_amplitude_stderr = 0.0;
  double mean_intensity = 0.0;
};

std::vector<PortStats> nonuseful_port_stats(cplx amplitude, std::size_t transmission, const NoiseFunction& nf,
                                            std::size_t trials, std::uint64_t seed, std::size_t workers = 1);

/// Cosine fit through 16 equally spaced fringe samples; returns (I_max - I_min) / (I_max + I_min).
double fit_fringe_visibility(const std::vector<double>& intensities);

struct ExpansionPoint {
  std::size_t transmission = 0;
  double linear_term = 0.0;
  double nonlinear_term = 0.0;
  double nonlinear_analytic = 0.0;
};

struct NonlinearExpansion {
  std::vector<ExpansionPoint> points;
  /// Fitted decay exponents: term ~ T^{-exponent}.
  double linear_exponent = 0.0;
  double nonlinear_exponent = 0.0;
  /// max over T of Var(phi2) |A|^4 / T^2.
  double smallness = 0.0;
  bool expansion_valid = false;
};

/// Requires the nonlinear-phase kind. The same phase samples are reused for every T.
NonlinearExpansion nonlinear_fluctuation_expansion(cplx amplitude, const std::vector<std::size_t>& transmissions,
                                                   const NoiseFunction& nf, std::size_t trials, std::uint64_t seed);

struct AttenuationReport {
  std::size_t degree = 0;
  std::size_t transmission = 0;
  /// E[X^N] with X the average of T i.i.d. phase factors.
  double moment_exact = 0.0;
  double moment_limit = 0.0;
  Estimate moment_mc;
  double moment_mc_imag = 0.0;
  /// E[(X + Y)^N] / 2^N against alpha^N.
  double attenuation = 0.0;
  /// max over 16 phases of |E[(X + e^{i phi} Y)^N] / E[(X + Y)^N] - ((1 + e^{i phi}) / 2)^N|.
  double shape_distortion = 0.0;
};

/// Point-mass mixture phases with mean `alpha`.
AttenuationReport large_T_attenuation_check(std::size_t degree, std::size_t transmission, double alpha,
                                            std::size_t trials, std::uint64_t seed, std::size_t workers = 1);

/// Exact E[X^N] for the point-mass mixture via Stirling numbers of the second kind.
double mixture_mean_power(std::size_t degree, std::size_t transmission, double alpha);

}  // namespace efilt
