#include "harqerr/fading.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "harqerr/error_models.hpp"
#include "harqerr/phy_sim.hpp"
#include "harqerr/special.hpp"

namespace harqerr {

namespace {

constexpr std::uint64_t kTrialsPerBlock = 1 << 14;

void check_average(int k, double avg_snr) {
  if (k < 1) throw std::domain_error("fading: k must be >= 1");
  if (!(avg_snr > 0.0) || !std::isfinite(avg_snr))
    throw std::domain_error("fading: average SNR must be finite and > 0");
}

// Integral of f over [a, b] to near machine precision.
//
// Boost's recursive Gauss-Kronrod compares the error of the rule on [-1, 1]
// (before rescaling) against a tolerance on the rescaled estimate, so short
// intervals never meet a tight tolerance and recurse to max depth. Mapping
// every segment onto [0, 1] and bounding the depth sidesteps that.
template <class F>
double integrate(F f, double a, double b) {
  if (!(b > a)) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  const double w = b - a;
  auto unit = [&](double u) { return f(a + w * u); };
  return w * gauss_kronrod<double, 61>::integrate(unit, 0.0, 1.0, 8, 1e-13);
}

// Smallest x with Q(k, x / scale) below `tail` (x in units of scale).
double gamma_upper_cut(int k, double tail) {
  double x = k + 10.0;
  while (gamma_q_int(k, x) > tail) x *= 1.25;
  return x;
}

}  // namespace

double gamma_pdf(int k, double avg_snr, double x) {
  check_average(k, avg_snr);
  if (!(x >= 0.0)) throw std::domain_error("gamma_pdf: x must be >= 0");
  if (x == 0.0) return k == 1 ? 1.0 / avg_snr : 0.0;
  const double z = x / avg_snr;
  return std::exp((k - 1) * std::log(z) - z - std::lgamma(static_cast<double>(k))) / avg_snr;
}

double avg_failure_de_numeric(const PerModel& per, int k, double avg_snr) {
  check_average(k, avg_snr);
  auto integrand = [&](double x) { return per(x) * gamma_pdf(k, avg_snr, x); };
  // Break points where PER is not smooth.
  std::vector<double> breaks{0.0};
  switch (per.variant()) {
    case PerVariant::IdealThreshold:
    case PerVariant::ExponentialThreshold:
      breaks.push_back(per.snr_threshold());
      break;
    case PerVariant::Table:
      for (const PerPoint& p : per.table_points()) breaks.push_back(p.snr);
      break;
  }
  double upper = avg_snr * gamma_upper_cut(k, 1e-12);
  if (per.variant() == PerVariant::ExponentialThreshold) {
    // Beyond the threshold the integrand is a Gamma shape with the faster rate
    // g + 1/avg; cut its tail relative to itself.
    const double scale = 1.0 / (per.slope() + 1.0 / avg_snr);
    upper = std::min(upper, per.snr_threshold() + scale * gamma_upper_cut(k, 1e-17));
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.push_back(std::max(upper, breaks.back()));

  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = std::min(breaks[i], upper), b = std::min(breaks[i + 1], upper);
    sum += integrate(integrand, a, b);
  }
  return std::clamp(sum, 0.0, 1.0);
}

double avg_failure_de_closed(double snr_threshold, double slope, int k, double avg_snr) {
  check_average(k, avg_snr);
  if (!(snr_threshold >= 0.0)) throw std::domain_error("fading: threshold must be >= 0");
  if (!(slope > 0.0)) throw std::domain_error("fading: slope must be > 0");
  const double outage = gamma_p_int(k, snr_threshold / avg_snr);
  // e^{g th} Q(k, (g + 1/avg) th) = e^{-th/avg} sum_{j<k} y^j/j!, y = (g + 1/avg) th;
  // the rescaled form keeps e^{g th} from overflowing.
  const double y = (slope + 1.0 / avg_snr) * snr_threshold;
  double term = 1.0, sum = 1.0;
  for (int j = 1; j < k; ++j) {
    term *= y / j;
    sum += term;
  }
  const double waterfall =
      std::exp(-snr_threshold / avg_snr - k * std::log1p(slope * avg_snr)) * sum;
  return std::clamp(outage + waterfall, 0.0, 1.0);
}

McEstimate avg_failure_ie_mc(const PerModel& per, int k, double avg_snr, std::uint64_t trials,
                             std::uint64_t seed, unsigned workers) {
  check_average(k, avg_snr);
  if (trials < 1) throw std::invalid_argument("avg_failure_ie_mc: trials must be >= 1");
  struct Sums {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  const std::size_t blocks = (trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
  auto block = [&](std::size_t b) {
    Engine engine = make_engine(seed, b);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const std::uint64_t n = std::min<std::uint64_t>(kTrialsPerBlock, trials - b * kTrialsPerBlock);
    Sums s;
    for (std::uint64_t i = 0; i < n; ++i) {
      double acc = 0.0, f = 1.0;
      for (int l = 0; l < k; ++l) {
        acc += -avg_snr * std::log1p(-uniform(engine));
        f *= per(acc);
      }
      s.sum += f;
      s.sum_sq += f * f;
    }
    return s;
  };
  Sums total;
  for (const Sums& s : run_indexed(blocks, workers, block)) {
    total.sum += s.sum;
    total.sum_sq += s.sum_sq;
  }
  const double n = static_cast<double>(trials);
  const double mean = total.sum / n;
  const double var = std::max(0.0, total.sum_sq / n - mean * mean);
  return {mean, std::sqrt(var / n), trials};
}

double avg_rounds(double snr_threshold, double slope, double avg_snr) {
  check_average(1, avg_snr);
  if (!(snr_threshold >= 0.0)) throw std::domain_error("avg_rounds: threshold must be >= 0");
  if (!(slope > 0.0)) throw std::domain_error("avg_rounds: slope must be > 0");
  return 1.0 + (snr_threshold + 1.0 / slope) / avg_snr;
}

McEstimate avg_rounds_mc(const PerModel& per, double avg_snr, std::uint64_t trials,
                         std::uint64_t seed, int max_rounds, unsigned workers) {
  check_average(1, avg_snr);
  if (trials < 1) throw std::invalid_argument("avg_rounds_mc: trials must be >= 1");
  if (max_rounds < 1) throw std::invalid_argument("avg_rounds_mc: max_rounds must be >= 1");
  struct Sums {
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  const std::size_t blocks = (trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
  auto block = [&](std::size_t b) {
    Engine engine = make_engine(seed, b);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const std::uint64_t n = std::min<std::uint64_t>(kTrialsPerBlock, trials - b * kTrialsPerBlock);
    Sums s;
    for (std::uint64_t i = 0; i < n; ++i) {
      double acc = 0.0, prev = 1.0;
      int rounds = 1;
      for (;; ++rounds) {
        acc += -avg_snr * std::log1p(-uniform(engine));
        const double now = per(acc);
        const double fail = prev > 0.0 ? std::min(1.0, now / prev) : 0.0;
        if (rounds == max_rounds || !(uniform(engine) < fail)) break;
        prev = now;
      }
      s.sum += rounds;
      s.sum_sq += static_cast<double>(rounds) * rounds;
    }
    return s;
  };
  Sums total;
  for (const Sums& s : run_indexed(blocks, workers, block)) {
    total.sum += s.sum;
    total.sum_sq += s.sum_sq;
  }
  const double n = static_cast<double>(trials);
  const double mean = total.sum / n;
  const double var = std::max(0.0, total.sum_sq / n - mean * mean);
  return {mean, std::sqrt(var / n), trials};
}

SeriesResult avg_rounds_series(double snr_threshold, double slope, double avg_snr,
                               double tolerance) {
  SeriesResult r{1.0, 0};
  // Terms stay near 1 until k * avg_snr passes the threshold, then decay.
  const int min_terms = static_cast<int>(std::ceil(snr_threshold / avg_snr)) + 1;
  constexpr int kMaxTerms = 10'000'000;
  for (int k = 1; k <= kMaxTerms; ++k) {
    const double term = avg_failure_de_closed(snr_threshold, slope, k, avg_snr);
    r.value += term;
    r.terms = k;
    if (k >= min_terms && term < tolerance) break;
  }
  return r;
}

std::vector<McEstimate> avg_failure_exact_mc_all(const CodeSpec& code, int k, double avg_snr,
                                                 std::uint64_t channel_trials,
                                                 std::uint64_t link_trials, std::uint64_t seed,
                                                 unsigned workers) {
  check_average(k, avg_snr);
  if (channel_trials < 1 || link_trials < 1)
    throw std::invalid_argument("avg_failure_exact_mc: trial counts must be >= 1");
  const auto kk = static_cast<std::size_t>(k);

  // One job per channel draw; the inner simulation runs single-threaded.
  auto draw = [&](std::size_t c) {
    Engine engine = make_engine(seed, 2 * c);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> snrs(kk);
    for (double& s : snrs) s = -avg_snr * std::log1p(-uniform(engine));
    return estimate_joint_errors(code, SnrSchedule(std::move(snrs)), link_trials,
                                 derive_seed(seed, 2 * c + 1), 1)
        .f_hat;
  };
  const auto per_draw = run_indexed(channel_trials, workers, draw);

  std::vector<McEstimate> out(kk);
  const double n = static_cast<double>(channel_trials);
  for (std::size_t l = 0; l < kk; ++l) {
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& f : per_draw) {
      sum += f[l];
      sum_sq += f[l] * f[l];
    }
    const double mean = sum / n;
    const double var = channel_trials > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1)) : 0.0;
    out[l] = {mean, std::sqrt(var / n), channel_trials * link_trials};
  }
  return out;
}

McEstimate avg_failure_exact_mc(const CodeSpec& code, int k, double avg_snr,
                                std::uint64_t channel_trials, std::uint64_t link_trials,
                                std::uint64_t seed, unsigned workers) {
  return avg_failure_exact_mc_all(code, k, avg_snr, channel_trials, link_trials, seed, workers)
      .back();
}

}  // namespace harqerr
