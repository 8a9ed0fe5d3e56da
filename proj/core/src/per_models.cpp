#include "harqerr/per_models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "harqerr/special.hpp"

namespace harqerr {

namespace {

constexpr double kPerFloor = 1e-300;
constexpr double kDecayingBelow = 1.0 - 1e-12;

}  // namespace

PerModel PerModel::ideal_threshold(double snr_threshold) {
  if (!(snr_threshold >= 0.0) || !std::isfinite(snr_threshold))
    throw std::invalid_argument("PerModel: threshold must be finite and >= 0");
  PerModel m;
  m.variant_ = PerVariant::IdealThreshold;
  m.threshold_ = snr_threshold;
  return m;
}

PerModel PerModel::exponential_threshold(double snr_threshold, double slope) {
  if (!(snr_threshold >= 0.0) || !std::isfinite(snr_threshold))
    throw std::invalid_argument("PerModel: threshold must be finite and >= 0");
  if (!(slope > 0.0) || !std::isfinite(slope))
    throw std::invalid_argument("PerModel: slope must be finite and > 0");
  PerModel m;
  m.variant_ = PerVariant::ExponentialThreshold;
  m.threshold_ = snr_threshold;
  m.slope_ = slope;
  return m;
}

PerModel PerModel::table(std::vector<PerPoint> points) {
  if (points.size() < 2) throw std::invalid_argument("PerModel: table needs at least 2 points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const PerPoint& p = points[i];
    if (!(p.snr >= 0.0) || !std::isfinite(p.snr))
      throw std::invalid_argument("PerModel: table SNR must be finite and >= 0");
    if (!(p.per >= 0.0 && p.per <= 1.0))
      throw std::invalid_argument("PerModel: table PER must lie in [0, 1]");
    if (i > 0 && !(p.snr > points[i - 1].snr))
      throw std::invalid_argument("PerModel: table SNRs must be strictly increasing");
    if (i > 0 && p.per > points[i - 1].per)
      throw std::invalid_argument("PerModel: table PER must be non-increasing in SNR");
  }
  PerModel m;
  m.variant_ = PerVariant::Table;
  m.points_ = std::move(points);
  m.log_per_.reserve(m.points_.size());
  for (const PerPoint& p : m.points_) m.log_per_.push_back(std::log(std::max(p.per, kPerFloor)));
  return m;
}

double PerModel::operator()(double snr) const {
  if (!(snr >= 0.0)) throw std::domain_error("PER: SNR must be >= 0");
  switch (variant_) {
    case PerVariant::IdealThreshold:
      return snr < threshold_ ? 1.0 : 0.0;
    case PerVariant::ExponentialThreshold:
      return snr < threshold_ ? 1.0 : std::exp(-slope_ * (snr - threshold_));
    case PerVariant::Table:
      return interpolate(snr);
  }
  return 1.0;
}

double PerModel::interpolate(double snr) const {
  if (snr <= points_.front().snr) return points_.front().per;
  if (snr >= points_.back().snr) return points_.back().per;
  auto it = std::upper_bound(points_.begin(), points_.end(), snr,
                             [](double s, const PerPoint& p) { return s < p.snr; });
  const std::size_t hi = static_cast<std::size_t>(it - points_.begin());
  const std::size_t lo = hi - 1;
  const double w = (snr - points_[lo].snr) / (points_[hi].snr - points_[lo].snr);
  const double v = std::exp(log_per_[lo] + w * (log_per_[hi] - log_per_[lo]));
  return std::clamp(v, 0.0, 1.0);
}

PerModel fit_exponential(std::span<const PerPoint> samples) {
  std::vector<PerPoint> decaying;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const PerPoint& p = samples[i];
    if (i > 0 && !(p.snr > samples[i - 1].snr))
      throw std::invalid_argument("fit_exponential: SNRs must be strictly increasing");
    if (!(p.per > 0.0 && p.per <= 1.0))
      throw std::invalid_argument("fit_exponential: PER samples must lie in (0, 1]");
    if (p.per < kDecayingBelow) decaying.push_back({p.snr, std::log(p.per)});
  }
  if (decaying.empty())
    throw std::invalid_argument("fit_exponential: no decaying region (all PER = 1)");
  if (decaying.size() < 3)
    throw std::invalid_argument("fit_exponential: fewer than 3 points with PER < 1");

  // Ordinary least squares of ln(per) on snr, centered for conditioning.
  const double n = static_cast<double>(decaying.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (const PerPoint& p : decaying) {
    mean_x += p.snr;
    mean_y += p.per;
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const PerPoint& p : decaying) {
    sxx += (p.snr - mean_x) * (p.snr - mean_x);
    sxy += (p.snr - mean_x) * (p.per - mean_y);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_exponential: degenerate SNR spread");
  const double g = -sxy / sxx;
  if (!(g > 0.0)) throw std::invalid_argument("fit_exponential: fitted slope is not decaying");
  const double intercept = mean_y + g * mean_x;  // ln(per) = intercept - g * snr
  return PerModel::exponential_threshold(std::max(0.0, intercept / g), g);
}

std::vector<PerPoint> read_per_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("PER CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "snr_db,per") throw std::invalid_argument("PER CSV: expected header 'snr_db,per'");

  std::vector<PerPoint> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string db_field, per_field;
    if (!std::getline(row, db_field, ',') || !std::getline(row, per_field))
      throw std::invalid_argument("PER CSV: malformed row at line " + std::to_string(line_no));
    try {
      points.push_back({db_to_linear(std::stod(db_field)), std::stod(per_field)});
    } catch (const std::logic_error&) {
      throw std::invalid_argument("PER CSV: non-numeric value at line " + std::to_string(line_no));
    }
  }
  return points;
}

std::vector<PerPoint> read_per_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open PER table: " + path.string());
  return read_per_csv(in);
}

void write_per_csv(std::ostream& out, std::span<const PerPoint> points) {
  out << "snr_db,per\n";
  char buf[64];
  for (const PerPoint& p : points) {
    std::snprintf(buf, sizeof buf, "%.6f,%.10g\n", linear_to_db(p.snr), p.per);
    out << buf;
  }
}

PerModel load_per_table(const std::filesystem::path& path) {
  return PerModel::table(read_per_csv(path));
}

}  // namespace harqerr
