#pragma once

// Encoder/decoder pairs. The encoder is a T_tot x S_tot isometry from source
// channels into transmission channels. The decoder is a T_tot x T_tot unitary
// onto receiver ports; ports [0, S_tot) are the useful ones and the rest are
// discarded by post-selection.

#include <cstddef>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "efilt/hilbert.hpp"

namespace efilt {

enum class CodecKind { identity, fourier, hadamard, collective_fourier, custom };

std::string to_string(CodecKind kind);

class Codec {
 public:
  /// Throws NumericalCheckError if the encoder is not an isometry or the decoder is not unitary.
  Codec(CodecKind kind, DenseOperator encoder, DenseOperator decoder);

  CodecKind kind() const { return kind_; }
  const DenseOperator& encoder() const { return enc_; }
  const DenseOperator& decoder() const { return dec_; }
  std::size_t source_count() const { return enc_.cols(); }
  std::size_t transmission_count() const { return enc_.rows(); }
  std::size_t useful_count() const { return enc_.cols(); }

 private:
  CodecKind kind_;
  DenseOperator enc_;
  DenseOperator dec_;
};

Codec identity_codec(std::size_t sources);
Codec fourier_codec(std::size_t transmission);
/// Throws ConfigError unless `transmission` is a power of two.
Codec hadamard_codec(std::size_t transmission);
Codec collective_fourier_codec(std::size_t sources, std::size_t transmission);
/// Gives each of `sources` channels its own copy of a single-source codec.
Codec multiplexed(const Codec& single, std::size_t sources);
Codec custom_codec(DenseOperator encoder, DenseOperator decoder);

/// Random faithful single-source codec on `transmission` channels whose
/// encoder spreads the source over all channels with random weights.
Codec random_faithful_codec(std::size_t transmission, std::mt19937_64& rng);

/// Haar-random n x n unitary.
CMatrix haar_unitary(std::size_t n, std::mt19937_64& rng);

struct CodecReport {
  bool faithful = false;
  bool optimal = false;
  /// sum_j |c_1j|^2 for the first source channel.
  double reduction_factor = 0.0;
  std::vector<double> per_source_factor;
  /// Smallest number of transmission channels a source is spread over.
  std::size_t effective_degree = 0;
  double faithfulness_error = 0.0;
};

/// c_ij = <j|U_e|i> <i|U_d|j>. Optimal means faithful and, per source, every
/// nonzero |c_ij| equals one over the number of such j.
CodecReport validate_codec(const Codec& codec);

/// Throws ConfigError for an unfaithful codec unless `force` is set.
void require_faithful(const Codec& codec, bool force);

/// Plain-text format: `codec S T`, then T rows of S `re im` pairs (encoder),
/// then T rows of T pairs (decoder). `#` starts a comment.
Codec read_codec(std::istream& in);
Codec load_codec_file(const std::string& path);
void write_codec(std::ostream& out, const Codec& codec);

}  // namespace efilt
