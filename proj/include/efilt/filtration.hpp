#pragma once

// Single-particle error filtration: Q rounds of encode -> noise -> decode ->
// keep the useful ports, evaluated exactly on the joint system+environment
// state, in closed form, or by sampling random phases.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "efilt/codec.hpp"
#include "efilt/hilbert.hpp"
#include "efilt/montecarlo.hpp"
#include "efilt/noise.hpp"

namespace efilt {

using ChannelNoiseModel = std::variant<PhaseNoiseSpec, InternalNoiseSpec>;

struct FiltrationConfig {
  Codec codec;
  ChannelNoiseModel noise;
  std::size_t segments = 1;
  /// When set, each segment gets uniform phase noise with |alpha|^2 = e^{-gamma L / Q}
  /// and `noise` must be phase noise (its values are ignored).
  std::optional<LengthModel> length;
  /// Amplitudes over source channels, or source channels x internal states
  /// (internal index fastest) under internal noise. Normalized on use.
  CVector input;
  /// Extra uniform dephasing on the receiver ports after each decode, |alpha|^2 per module.
  std::optional<double> module_alpha2;
  bool force_codec = false;
  std::size_t dim_cap = kDefaultDimCap;
};

struct FiltrationOutcome {
  double p_success = 0.0;
  double p_success_no_error = 0.0;
  double p_success_error = 0.0;
  double conditional_fidelity = 0.0;
  std::optional<double> visibility;
  /// Largest squared norm found on discarded ports with the current register undisturbed.
  double discarded_undisturbed = 0.0;

  double p_error_given_success() const { return p_success > 0 ? p_success_error / p_success : 0.0; }
};

/// Throws ConfigError for inconsistent dimensions.
void validate(const FiltrationConfig& cfg);

/// Internal dimension of the system (1 under phase noise).
std::size_t internal_dim(const FiltrationConfig& cfg);

/// Exact evaluation. Fills `visibility` when the codec has two source channels
/// and the noise is phase noise.
FiltrationOutcome run_exact(const FiltrationConfig& cfg);

/// Fringe visibility from an 8-point phase sweep of (|1> + e^{i phi}|2>)/sqrt 2,
/// measured on (|1> + |2>)/sqrt 2. Requires two source channels.
double measure_visibility(const FiltrationConfig& cfg);

struct NonuniformReport {
  FiltrationOutcome exact;
  cplx mean_alpha;
  double analytic_no_error = 0.0;
  double analytic_error = 0.0;
  double bound = 0.0;
  bool bound_holds = false;
};

/// Single-source codec with per-channel phase noise (phase aligned before use).
NonuniformReport run_nonuniform(const FiltrationConfig& cfg);

/// Kraus operators of the whole pipeline, one per joint environment outcome.
/// Each maps the source system to the useful receiver system.
std::vector<CMatrix> pipeline_kraus(const FiltrationConfig& cfg);

struct MonteCarloOutcome {
  double p_success = 0.0;
  double p_success_stderr = 0.0;
  double conditional_fidelity = 0.0;
  double fidelity_stderr = 0.0;
  std::optional<double> visibility;
  double visibility_stderr = 0.0;
  /// Estimate of E[u u^dagger] on the useful ports.
  CMatrix rho;
  std::size_t trials = 0;
  std::size_t workers = 1;
};

/// Random-phase picture: every channel gets an independent phase with
/// E[e^{i phi_j}] = alpha_j. Phase noise only.
MonteCarloOutcome run_monte_carlo(const FiltrationConfig& cfg, std::size_t trials, std::uint64_t seed,
                                  std::size_t workers = 1,
                                  PhaseDistribution dist = PhaseDistribution::point_mass_mixture);

/// Mean over Haar-random two-level inputs of the conditional fidelity.
Estimate bloch_average_fidelity(const FiltrationConfig& cfg, std::size_t trials, std::uint64_t seed,
                                std::size_t workers = 1);

double success_probability_analytic(double alpha2, std::size_t transmission);
double visibility_analytic(std::size_t transmission, double alpha2);
double series_error_analytic(double gamma, double length, std::size_t segments, std::size_t transmission);
/// `alpha` is the end-to-end amplitude; the module sits halfway. Throws
/// NumericalCheckError if the result does not beat |beta|^2 / T.
double series_two_segment_analytic(double alpha, std::size_t transmission);
double series_limit_analytic(double alpha, std::size_t transmission);

/// Two sources, three transmission channels, collective Fourier codec.
double collective_state_fidelity_analytic(double alpha2, double a1_sq);
double collective_average_fidelity_analytic(double alpha2);
double trivial_average_fidelity_analytic(double alpha2);

struct ThresholdReport {
  bool bb84_secure = false;
  bool werner_entangled = false;
  /// Fidelity sits exactly on one of the thresholds.
  bool at_boundary = false;
};

ThresholdReport threshold_report(double fidelity);

}  // namespace efilt
