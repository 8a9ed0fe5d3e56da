#pragma once

// Pairwise error probabilities of ML decoding under Chase combining.
//
// For codewords at Euclidean distance d, the single PEP after k rounds is
// P_k(d) = Q(d/2 * sqrt(acc_k)). The joint PEP P_{1:k}(d) requires the
// pairwise error to occur after every round 1..k. Writing
// s_l = sum_{j<=l} sqrt(snr_j) x_j with i.i.d. standard normal x_j, the event
// after round l is s_l > c_l with c_l = d/2 * acc_l, so P_{1:k} is a
// boundary-crossing probability of a Gaussian random walk.
//
// Rounds whose accumulated SNR is still zero carry no observation; their
// pairwise event is taken to coincide with that of the first round with
// positive SNR. If no round has positive SNR every event is a fair tie,
// shared across rounds, and the PEP is 1/2.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "harqerr/conv_code.hpp"
#include "harqerr/parallel.hpp"
#include "harqerr/snr_schedule.hpp"

namespace harqerr {

struct PepProblem {
  double d = 1.0;
  SnrSchedule sched{std::vector<double>{1.0}};
};

/// Q(0.5 * d * sqrt(snr_acc)). Throws std::domain_error for d <= 0 or
/// snr_acc < 0.
double pep_single(double d, double snr_acc);

/// log pep_single, accurate far into the tail.
double pep_single_log(double d, double snr_acc);

struct PepQuadratureOptions {
  /// Uniform panels per stage (Gauss-Legendre, 8 nodes each) before the
  /// geometric refinement near the truncation point.
  int panels = 40;
  /// Longest schedule accepted.
  int max_rounds = 8;
};

/// Joint PEP by forward propagation of the walk's sub-density restricted to
/// the past constraints. Throws std::invalid_argument when the schedule is
/// longer than options.max_rounds.
double pep_joint(const PepProblem& prob, const PepQuadratureOptions& options = {});

/// log P_{1:k}; stays finite where P_{1:k} underflows.
double pep_joint_log(const PepProblem& prob, const PepQuadratureOptions& options = {});

/// |pep_joint(panels) - pep_joint(2 * panels)|.
double pep_joint_error_estimate(const PepProblem& prob, const PepQuadratureOptions& options = {});

/// Monte Carlo estimate of the joint PEP. Samples are split into fixed-size
/// blocks with derived seeds; the result does not depend on `workers`.
/// Only rounds with positive SNR consume normal draws.
McEstimate pep_joint_mc(const PepProblem& prob, std::uint64_t samples, std::uint64_t seed,
                        unsigned workers = 0);

/// Counts behind pep_joint_mc, exposed for determinism checks.
std::uint64_t pep_joint_mc_hits(const PepProblem& prob, std::uint64_t samples,
                                std::uint64_t seed, unsigned workers = 0);

struct PepBoundReport {
  double lower = 0.0;
  double value = 0.0;
  double upper = 0.0;
  double tolerance = 0.0;
  bool holds = false;
};

/// Checks P_k / 2^{k-1} <= P_{1:k} <= P_k within
/// tolerance = 1e-9 + 10 * (quadrature error estimate).
PepBoundReport check_pep_bounds(const PepProblem& prob, const PepQuadratureOptions& options = {});

struct PepSweepRow {
  double t = 0.0;
  double joint = 0.0;   // P_{1:k}
  double single = 0.0;  // P_k
  double lower = 0.0;   // P_k / 2^{k-1}
  double ratio = 0.0;   // P_{1:k} / P_k, formed in the log domain
};

/// Schedules snr_1, snr_1 t, snr_1 t^2, ... (constant SNR ratio t between
/// consecutive rounds) evaluated for every t. Requires k >= 2 and t > 0.
std::vector<PepSweepRow> sweep_ratio(int k, double d, double snr_1, std::span<const double> t_values,
                                     const PepQuadratureOptions& options = {});

/// Union bound on the frame error rate after combining to `snr_acc`:
/// event_positions * sum_w B_w Q(sqrt(w snr_acc)), clamped to 1.
double union_bound_per(const DistanceSpectrum& spectrum, double snr_acc);

/// Joint analogue: event_positions * sum_w B_w P_{1:k}(2 sqrt(w)).
/// `clamp` = false returns the raw sum.
double union_bound_joint(const DistanceSpectrum& spectrum, const SnrSchedule& sched,
                         bool clamp = true, const PepQuadratureOptions& options = {});

/// Raw (unclamped) single-round union sum, for termwise comparisons.
double union_sum_per(const DistanceSpectrum& spectrum, double snr_acc);

/// Euclidean distance between BPSK codewords at Hamming distance w.
inline double hamming_to_euclidean(int w) { return 2.0 * std::sqrt(static_cast<double>(w)); }

}  // namespace harqerr
