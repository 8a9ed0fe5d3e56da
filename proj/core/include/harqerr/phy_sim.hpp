#pragma once

// Link-level Monte Carlo of repetition-redundancy HARQ: BPSK over per-round
// AWGN, maximum ratio combining of all rounds so far, Viterbi decoding after
// every round.

#include <cstdint>
#include <span>
#include <vector>

#include "harqerr/conv_code.hpp"
#include "harqerr/parallel.hpp"
#include "harqerr/snr_schedule.hpp"

namespace harqerr {

/// Channel output of one round: sqrt(snr) * x + z with unit-variance z.
struct ReceivedBlock {
  std::vector<double> samples;
  double snr = 0.0;
};

/// BPSK maps bit 0 to +1 and bit 1 to -1.
inline double bpsk(std::uint8_t bit) { return bit ? -1.0 : 1.0; }

ReceivedBlock transmit_round(std::span<const std::uint8_t> codeword, double snr, Engine& engine);
/// Deterministic given the seed. Throws std::domain_error for snr < 0.
ReceivedBlock transmit_round(std::span<const std::uint8_t> codeword, double snr,
                             std::uint64_t seed);

/// Chase combining: sum_l sqrt(snr_l / snr_acc) * y_l with snr = snr_acc.
/// When the accumulated SNR is zero the last block is returned unchanged.
/// Throws std::invalid_argument for an empty list or unequal lengths.
ReceivedBlock mrc_combine(std::span<const ReceivedBlock> blocks);

/// ML decoding of a (combined) block; weights are sqrt(snr) * samples.
Bits viterbi_decode(const ReceivedBlock& block, const CodeSpec& code);

/// Empirical joint and marginal decoding-error statistics over k rounds.
/// Index l refers to round l + 1.
struct JointErrorEstimate {
  std::uint64_t trials = 0;
  /// Trials with ERR_1 and ... and ERR_{l+1}.
  std::vector<std::uint64_t> joint_count;
  /// Trials with ERR_{l+1}.
  std::vector<std::uint64_t> marginal_count;

  std::vector<double> f_hat;
  std::vector<double> marginal;
  std::vector<double> f_hat_stderr;
  std::vector<double> marginal_stderr;
};

/// Simulates `trials` independent messages through every round of `sched`
/// (no early stop) and decodes after each cumulative combine. Trial t draws
/// from its own stream derived from (seed, t), so counts do not depend on
/// the worker count (0 = one per hardware thread).
JointErrorEstimate estimate_joint_errors(const CodeSpec& code, const SnrSchedule& sched,
                                         std::uint64_t trials, std::uint64_t seed,
                                         unsigned workers = 0);

/// Single-round PER measured at each SNR (one independent run per point).
std::vector<McEstimate> measure_per_curve(const CodeSpec& code, std::span<const double> snrs,
                                          std::uint64_t trials, std::uint64_t seed,
                                          unsigned workers = 0);

/// Exact joint failure probabilities next to the two PER-based models.
/// Index l refers to round l + 1.
struct ModelComparison {
  JointErrorEstimate exact;
  /// Single-round PER measured at each accumulated SNR, in independent runs.
  std::vector<McEstimate> per;
  /// DE model PER(acc_l) and IE model prod_{j<=l} PER(acc_j) from `per`.
  std::vector<double> f_de, f_ie;
  std::vector<double> f_de_stderr, f_ie_stderr;  // IE by the delta method
};

/// Runs estimate_joint_errors on `sched` and measure_per_curve at its
/// accumulated SNRs, with sub-seeds derived from `seed`.
ModelComparison compare_error_models(const CodeSpec& code, const SnrSchedule& sched,
                                     std::uint64_t trials, std::uint64_t per_trials,
                                     std::uint64_t seed, unsigned workers = 0);

}  // namespace harqerr
