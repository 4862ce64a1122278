#pragma once

// Channel noise in two equivalent pictures: a unitary dilation that writes
// which-channel information into an environment register, and i.i.d. random
// phases with a prescribed mean of e^{i phi}.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "efilt/hilbert.hpp"

namespace efilt {

struct ChannelNoise {
  cplx alpha{1.0, 0.0};
  cplx beta{0.0, 0.0};
};

class PhaseNoiseSpec {
 public:
  /// Throws ConfigError unless |alpha|^2 + |beta|^2 = 1 within 1e-12 on every channel.
  explicit PhaseNoiseSpec(std::vector<ChannelNoise> per_channel);

  /// Same real alpha = sqrt(alpha2) on every channel, beta = sqrt(1 - alpha2).
  static PhaseNoiseSpec uniform(std::size_t channels, double alpha2);
  /// beta_j = sqrt(1 - |alpha_j|^2).
  static PhaseNoiseSpec from_alphas(const std::vector<cplx>& alphas);

  std::size_t channels() const { return per_channel_.size(); }
  const ChannelNoise& operator[](std::size_t j) const { return per_channel_.at(j); }
  const std::vector<ChannelNoise>& per_channel() const { return per_channel_; }

  cplx mean_alpha() const;
  double mean_beta_squared() const;

  /// Rotates each channel by a phase shifter so that alpha_j is real and non-negative.
  PhaseNoiseSpec phase_aligned() const;

 private:
  std::vector<ChannelNoise> per_channel_;
};

struct InternalError {
  cplx beta;
  DenseOperator op;  // internal_dim x internal_dim
};

class InternalNoiseSpec {
 public:
  /// Throws NumericalCheckError when the dilation is not an isometry within 1e-12.
  InternalNoiseSpec(std::size_t internal_dim, cplx alpha, std::vector<InternalError> errors);

  /// Qubit Pauli set {X, Y, Z} with equal weights.
  static InternalNoiseSpec pauli(double alpha2);
  /// Single error operator with weight sqrt(1 - alpha2).
  static InternalNoiseSpec single(double alpha2, DenseOperator op);

  std::size_t internal_dim() const { return dim_; }
  std::size_t error_count() const { return errors_.size(); }
  cplx alpha() const { return alpha_; }
  const std::vector<InternalError>& errors() const { return errors_; }
  double error_probability() const { return 1.0 - std::norm(alpha_); }

  /// Per-channel dilation |mu> -> alpha |mu>|0> + sum_l beta_l E_l |mu>|l>, as a
  /// (I * (1 + L)) x I matrix with row index nu * (1 + L) + outcome.
  DenseOperator dilation() const;

 private:
  std::size_t dim_;
  cplx alpha_;
  std::vector<InternalError> errors_;
};

enum class PhaseDistribution { point_mass_mixture, wrapped_gaussian };

struct RandomPhaseSpec {
  double target_mean = 1.0;
  PhaseDistribution distribution = PhaseDistribution::point_mass_mixture;
};

struct LengthModel {
  double gamma = 0.0;
  double length = 0.0;
};

/// Requires a fresh register at environment position `segment` with at least
/// channels + 1 outcomes, and a channel factor of dimension spec.channels().
LabeledState apply_phase_noise(const LabeledState& state, const PhaseNoiseSpec& spec, std::size_t segment,
                               std::size_t channel_factor = 0);

/// Register needs at least 1 + channels * L outcomes; outcome 1 + j * L + l
/// records error l on channel j.
LabeledState apply_internal_noise(const LabeledState& state, const InternalNoiseSpec& spec, std::size_t segment,
                                  std::size_t channel_factor, std::size_t internal_factor);

/// One draw of e^{i phi} (as the phase phi) with E[e^{i phi}] = target_mean.
double sample_phase(const RandomPhaseSpec& spec, std::mt19937_64& rng);
std::vector<double> sample_phases(const RandomPhaseSpec& spec, std::size_t count, std::mt19937_64& rng);
std::vector<double> sample_phases(const RandomPhaseSpec& spec, std::size_t count, std::uint64_t seed);

void validate(const RandomPhaseSpec& spec);

/// e^{-gamma L / 2}.
double alpha_from_length(const LengthModel& model);

}  // namespace efilt
