#pragma once

// Rate-1/2 recursive systematic convolutional code [1, ff/fb] with
// zero-state termination, its Viterbi decoder, and its error-event
// distance spectrum.

#include <cstdint>
#include <span>
#include <vector>

namespace harqerr {

using Bits = std::vector<std::uint8_t>;

/// Generator polynomials are given in octal with the most significant bit
/// as the D^0 coefficient, e.g. 013 = 1 + D^2 + D^3.
struct CodeSpec {
  unsigned feedforward = 015;
  unsigned feedback = 013;
  int memory = 3;
  int message_bits = 128;

  /// Builds a spec and derives the memory from the polynomial degrees.
  /// Throws std::invalid_argument on invalid polynomials or lengths.
  static CodeSpec rsc(unsigned feedforward, unsigned feedback, int message_bits);

  /// Coded length N_s = 2 (N_b + memory), termination tail included.
  int coded_bits() const { return 2 * (message_bits + memory); }
  int trellis_steps() const { return message_bits + memory; }
  double rate() const { return static_cast<double>(message_bits) / coded_bits(); }

  void validate() const;
};

/// Precomputed state-transition tables of the encoder.
///
/// A state packs the register contents: bit (i-1) holds the feedback-path
/// value delayed by i steps.
class Trellis {
 public:
  explicit Trellis(const CodeSpec& code);

  int memory() const { return memory_; }
  int states() const { return 1 << memory_; }

  /// Next state and parity bit for input u from state s.
  int next_state(int s, int u) const { return next_[2 * s + u]; }
  int parity(int s, int u) const { return parity_[2 * s + u]; }
  /// Input that drives the feedback path to zero (termination input).
  int tail_input(int s) const { return feedback_bit_[s]; }
  /// Input on the branch s -> next_state(s, u); also u itself. Provided for
  /// traceback, where only the state pair is known.
  int input_between(int s, int next) const { return (next & 1) ^ feedback_bit_[s]; }

 private:
  int memory_;
  std::vector<int> next_;
  std::vector<int> parity_;
  std::vector<int> feedback_bit_;
};

/// Systematic recursive encoding followed by `memory` tail steps. Output is
/// interleaved (systematic, parity) per trellis step, length coded_bits().
/// Throws std::invalid_argument if msg.size() != message_bits.
Bits conv_encode(std::span<const std::uint8_t> msg, const CodeSpec& code);

/// Maximum-likelihood sequence decoder over the zero-terminated trellis.
class ViterbiDecoder {
 public:
  explicit ViterbiDecoder(const CodeSpec& code);

  /// Decodes per-symbol correlation weights: the returned message maximizes
  /// sum_i weight_i * x_i over codewords x in {+1, -1}^N_s (bit 0 -> +1).
  /// With weight = sqrt(snr) * sample this is the Euclidean ML rule. Ties
  /// go to the branch with input bit 0.
  Bits decode(std::span<const double> weights) const;

  const CodeSpec& code() const { return code_; }

 private:
  CodeSpec code_;
  Trellis trellis_;
};

struct SpectrumLine {
  int weight = 0;
  /// Number of error events (paths leaving and first re-entering the zero
  /// state) with this output Hamming weight.
  double multiplicity = 0.0;
};

struct DistanceSpectrum {
  /// Lines in increasing weight, only non-zero multiplicities.
  std::vector<SpectrumLine> lines;
  /// Enumeration bound used to build the spectrum.
  int max_weight = 0;
  /// Number of trellis positions at which an error event may start; the
  /// union bounds scale the per-event multiplicities by it.
  double event_positions = 1.0;

  /// Smallest weight present, or 0 for an empty spectrum.
  int free_distance() const { return lines.empty() ? 0 : lines.front().weight; }
  double multiplicity(int weight) const;
};

/// Enumerates error events of output weight <= max_hamming_weight with a
/// weight-bounded search over (state, accumulated weight). event_positions is
/// set to the message length.
DistanceSpectrum distance_spectrum(const CodeSpec& code, int max_hamming_weight);

}  // namespace harqerr
