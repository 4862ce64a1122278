#pragma once

// Two-party entanglement purification by multiplexing the source: a maximally
// entangled n x n state is dephased on both arms, each party applies a
// decoder (B uses the complex conjugate of A's) and keeps an m-port window.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "efilt/hilbert.hpp"

namespace efilt {

enum class DecoderKind { fourier_pair, hadamard_pair, custom };

std::string to_string(DecoderKind kind);

struct PurifyConfig {
  std::size_t n = 2;
  std::size_t m = 1;
  /// No-error probability, |alpha|^4 for the two arms together.
  double p = 1.0;
  DecoderKind decoder = DecoderKind::fourier_pair;
  std::optional<CMatrix> custom_a;
  /// Must equal conj(custom_a) when given.
  std::optional<CMatrix> custom_b;
  /// First port of the kept window (0-based).
  std::size_t block_offset = 0;
};

struct PurificationOutcome {
  DensityMatrix rho_f;
  double fidelity_unfiltered = 0.0;
  double fidelity = 0.0;
  double p_success = 0.0;
  double p_success_total = 0.0;
  std::size_t blocks = 0;
};

/// Throws ConfigError for m outside [1, n], p outside [0, 1], a bad window or an invalid decoder pair.
void validate(const PurifyConfig& cfg);

/// Decoder applied by party A; party B applies its entrywise conjugate.
CMatrix decoder_a(const PurifyConfig& cfg);

/// p |psi_n><psi_n| + (1 - p)/n sum_j |jj><jj|.
DensityMatrix rho_after_noise(std::size_t n, double p);
/// Same state built by dephasing both arms with |alpha|^2 = sqrt p and tracing the environment.
DensityMatrix rho_after_noise_dilated(std::size_t n, double p);

double fidelity_unfiltered(std::size_t m, double p);
double purified_fidelity_analytic(std::size_t n, std::size_t m, double p);
double purify_success_analytic(std::size_t n, std::size_t m, double p);
double total_success_analytic(std::size_t n, std::size_t m, double p);
/// Closed-form normalized m^2 x m^2 state after the Fourier pair (window at 0).
CMatrix purified_state_analytic(std::size_t n, std::size_t m, double p);

/// Explicit construction for the configured window. p_success_total sums all
/// floor(n/m) disjoint windows.
PurificationOutcome purify(const PurifyConfig& cfg);
double total_success(const PurifyConfig& cfg);
/// One outcome per disjoint window offset 0, m, 2m, ...
std::vector<PurificationOutcome> purify_blocks(const PurifyConfig& cfg);

struct Protocol1Result {
  double fidelity = 0.0;
  double p_success = 0.0;
  /// sum_i (sum_{k<R} |U_ki|^2)^2 and its lower bound R^2 / S.
  double y = 0.0;
  double y_bound = 0.0;
  /// Every column weight on the kept window equals R / S.
  bool balanced = false;
  double fidelity_from_y = 0.0;
};

double protocol1_fidelity(std::size_t sources, std::size_t kept, double p);
double protocol1_fidelity_from_y(std::size_t sources, std::size_t kept, double p, double y);
/// Explicit construction with decoder `u` for A and conj(u) for B.
Protocol1Result protocol1_construct(std::size_t sources, std::size_t kept, double p, const CMatrix& u);

double protocol2_fidelity(const std::vector<cplx>& amplitudes, double alpha2, std::size_t transmission);
/// Each party filters its half with a per-channel Fourier codec of degree T.
double protocol2_construct(const std::vector<cplx>& amplitudes, double alpha2, std::size_t transmission);

struct DeferredReport {
  double max_entry_difference = 0.0;
  double p_success_upfront = 0.0;
  double p_success_deferred = 0.0;
};

/// Projects onto the window right away, versus applying random local unitaries
/// inside the window first and checking presence only at the end.
DeferredReport deferred_postselection_demo(const PurifyConfig& cfg, std::uint64_t seed);

}  // namespace efilt
