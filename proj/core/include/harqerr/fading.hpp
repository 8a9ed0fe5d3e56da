#pragma once

// Averages over i.i.d. Rayleigh block fading: every round's SNR is
// exponential with mean avg_snr, so the accumulated SNR after k rounds is
// Gamma(k, avg_snr).

#include <cstdint>
#include <vector>

#include "harqerr/conv_code.hpp"
#include "harqerr/parallel.hpp"
#include "harqerr/per_models.hpp"

namespace harqerr {

/// Density of the accumulated SNR after k rounds.
/// Throws std::domain_error for k < 1, avg_snr <= 0 or x < 0.
double gamma_pdf(int k, double avg_snr, double x);

/// E[PER(acc_k)] by adaptive Gauss-Kronrod quadrature against gamma_pdf.
double avg_failure_de_numeric(const PerModel& per, int k, double avg_snr);

/// Closed-form E[PER(acc_k)] for the exponential-threshold PER function:
/// P(k, th/avg) + e^{g th} (g avg + 1)^{-k} Q(k, (g + 1/avg) th), with P and Q
/// the regularized incomplete gamma functions.
double avg_failure_de_closed(double snr_threshold, double slope, int k, double avg_snr);

/// Monte Carlo E[prod_{l<=k} PER(acc_l)] over k exponential SNR draws per
/// trial (inverse-CDF sampling). Deterministic given the seed.
McEstimate avg_failure_ie_mc(const PerModel& per, int k, double avg_snr, std::uint64_t trials,
                             std::uint64_t seed, unsigned workers = 0);

/// Expected number of rounds with unlimited retransmissions,
/// 1 + (threshold + 1/g) / avg_snr.
double avg_rounds(double snr_threshold, double slope, double avg_snr);

/// Monte Carlo of HARQ with Rayleigh rounds under the DE model: each packet
/// draws round SNRs until a round succeeds (failing with probability
/// PER(acc_k) / PER(acc_{k-1})), capped at max_rounds. Returns the mean round
/// count; with an uncapped exponential-threshold PER it estimates avg_rounds.
McEstimate avg_rounds_mc(const PerModel& per, double avg_snr, std::uint64_t trials,
                         std::uint64_t seed, int max_rounds = 1000, unsigned workers = 0);

struct SeriesResult {
  double value = 0.0;
  int terms = 0;
};

/// 1 + sum_{k>=1} avg_failure_de_closed(k), truncated once the terms drop
/// below `tolerance` and are decaying.
SeriesResult avg_rounds_series(double snr_threshold, double slope, double avg_snr,
                               double tolerance = 1e-12);

/// Exact average failure E[f_k] for rounds 1..k: outer Monte Carlo over
/// channel draws, inner link-level estimate of the joint error probability.
/// The standard error is the spread of the per-draw estimates.
std::vector<McEstimate> avg_failure_exact_mc_all(const CodeSpec& code, int k, double avg_snr,
                                                 std::uint64_t channel_trials,
                                                 std::uint64_t link_trials, std::uint64_t seed,
                                                 unsigned workers = 0);

/// Round-k entry of avg_failure_exact_mc_all.
McEstimate avg_failure_exact_mc(const CodeSpec& code, int k, double avg_snr,
                                std::uint64_t channel_trials, std::uint64_t link_trials,
                                std::uint64_t seed, unsigned workers = 0);

}  // namespace harqerr
