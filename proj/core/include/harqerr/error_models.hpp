#pragma once

// Approximate models of the HARQ failure probability f_k = P(ERR_1, ..., ERR_k)
// built from the one-shot PER function alone.

#include <cstdint>
#include <string_view>
#include <vector>

#include "harqerr/per_models.hpp"
#include "harqerr/snr_schedule.hpp"

namespace harqerr {

enum class ModelKind {
  /// Decoding errors treated as independent: f_k = prod_l PER(acc_l).
  IndependentErrors,
  /// Earlier errors treated as implied by the latest: f_k = PER(acc_k).
  DeterministicErrors,
};

std::string_view to_string(ModelKind kind);
/// Accepts "ie"/"de" (any case); throws std::invalid_argument otherwise.
ModelKind parse_model_kind(std::string_view text);

/// Result of one HARQ exchange with at most k_max rounds.
struct HarqOutcome {
  int rounds_used = 0;
  bool delivered = false;
  /// error_flags[l] is ERR_{l+1}; every flag but the last is true.
  std::vector<bool> error_flags;
};

/// Failure probability after all rounds of `sched` under `kind`.
double failure_prob(ModelKind kind, const PerModel& per, const SnrSchedule& sched);

/// P(ERR_k | NACK_{k-1}) for k = sched.rounds(). For k = 1 this is
/// PER(acc_1). A zero denominator under the DE model yields 0.
double cond_error_prob(ModelKind kind, const PerModel& per, const SnrSchedule& sched);

/// Draws ERR_1, ERR_2, ... sequentially from cond_error_prob, stopping at the
/// first success or after k_max rounds. Deterministic given the seed.
/// Throws std::invalid_argument if k_max < 1 or the schedule is shorter.
HarqOutcome sample_error_sequence(ModelKind kind, const PerModel& per, const SnrSchedule& sched,
                                  int k_max, std::uint64_t seed);

}  // namespace harqerr
