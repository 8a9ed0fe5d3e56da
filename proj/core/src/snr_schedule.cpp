#include "harqerr/snr_schedule.hpp"

#include <cmath>
#include <stdexcept>

#include "harqerr/special.hpp"

namespace harqerr {

SnrSchedule::SnrSchedule(std::vector<double> per_round) : per_round_(std::move(per_round)) {
  if (per_round_.empty()) throw std::invalid_argument("SnrSchedule: at least one round required");
  accumulated_.reserve(per_round_.size());
  double sum = 0.0;
  for (double snr : per_round_) {
    if (!(snr >= 0.0) || !std::isfinite(snr))
      throw std::invalid_argument("SnrSchedule: per-round SNR must be finite and >= 0");
    sum += snr;
    accumulated_.push_back(sum);
  }
}

SnrSchedule SnrSchedule::from_db(std::span<const double> per_round_db) {
  std::vector<double> linear;
  linear.reserve(per_round_db.size());
  for (double db : per_round_db) linear.push_back(db_to_linear(db));
  return SnrSchedule(std::move(linear));
}

SnrSchedule SnrSchedule::prefix(std::size_t k) const {
  if (k == 0 || k > rounds()) throw std::out_of_range("SnrSchedule::prefix: bad round count");
  return SnrSchedule(std::vector<double>(per_round_.begin(), per_round_.begin() + k));
}

}  // namespace harqerr
