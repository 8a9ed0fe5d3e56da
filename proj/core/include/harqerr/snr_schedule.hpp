#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace harqerr {

/// Per-round linear SNRs of one HARQ transmission together with their
/// accumulated (Chase-combined) prefix sums.
///
/// Rounds are indexed from zero: round_snr(0) is the first round and
/// accumulated(l) is the SNR after combining rounds 0..l.
class SnrSchedule {
 public:
  /// Throws std::invalid_argument if `per_round` is empty or holds a
  /// negative or non-finite value.
  explicit SnrSchedule(std::vector<double> per_round);

  static SnrSchedule from_db(std::span<const double> per_round_db);

  std::size_t rounds() const { return per_round_.size(); }
  double round_snr(std::size_t l) const { return per_round_.at(l); }
  double accumulated(std::size_t l) const { return accumulated_.at(l); }
  /// Accumulated SNR after the last round.
  double total() const { return accumulated_.back(); }

  std::span<const double> per_round() const { return per_round_; }
  std::span<const double> accumulated() const { return accumulated_; }

  /// The first `k` rounds (1 <= k <= rounds()).
  SnrSchedule prefix(std::size_t k) const;

 private:
  std::vector<double> per_round_;
  std::vector<double> accumulated_;
};

}  // namespace harqerr
