#pragma once

// Packet-error-rate functions PER(snr): the probability that one-shot
// decoding fails at a given (accumulated) linear SNR.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace harqerr {

enum class PerVariant { IdealThreshold, ExponentialThreshold, Table };

/// One (linear SNR, PER) measurement.
struct PerPoint {
  double snr = 0.0;
  double per = 0.0;
};

/// Immutable PER function. Evaluation is in [0, 1] and non-increasing in SNR.
class PerModel {
 public:
  /// PER(snr) = 1 if snr < threshold, else 0.
  static PerModel ideal_threshold(double snr_threshold);

  /// PER(snr) = 1 if snr < threshold, else exp(-slope * (snr - threshold)).
  static PerModel exponential_threshold(double snr_threshold, double slope);

  /// Interpolates linearly in (snr, ln per) and clamps outside the table.
  /// Requires >= 2 points, strictly increasing SNR, non-increasing PER in
  /// [0, 1]. PER values of 0 are floored at 1e-300.
  static PerModel table(std::vector<PerPoint> points);

  PerVariant variant() const { return variant_; }
  /// Threshold of the two threshold variants (0 for Table).
  double snr_threshold() const { return threshold_; }
  /// Decay rate g of the exponential variant (0 otherwise).
  double slope() const { return slope_; }
  std::span<const PerPoint> table_points() const { return points_; }

  /// Throws std::domain_error for negative or NaN snr.
  double operator()(double snr) const;

 private:
  PerModel() = default;

  double interpolate(double snr) const;

  PerVariant variant_ = PerVariant::IdealThreshold;
  double threshold_ = 0.0;
  double slope_ = 0.0;
  std::vector<PerPoint> points_;
  std::vector<double> log_per_;
};

inline double eval_per(const PerModel& model, double snr) { return model(snr); }

/// Least-squares fit of ln(per) against snr over the decaying region
/// (per < 1 - 1e-12), returning an ExponentialThreshold model. The threshold
/// is recovered from the intercept and clamped at zero.
///
/// Throws std::invalid_argument when SNRs are not strictly increasing, a PER
/// lies outside (0, 1], there is no decaying region, fewer than three points
/// lie in it, or the fitted slope is not positive.
PerModel fit_exponential(std::span<const PerPoint> samples);

/// Reads CSV rows `snr_db,per` (header required) and returns linear-SNR
/// points in file order.
std::vector<PerPoint> read_per_csv(std::istream& in);
std::vector<PerPoint> read_per_csv(const std::filesystem::path& path);

/// Writes the points as `snr_db,per` CSV.
void write_per_csv(std::ostream& out, std::span<const PerPoint> points);

/// Table model loaded from a `snr_db,per` CSV file.
PerModel load_per_table(const std::filesystem::path& path);

}  // namespace harqerr
