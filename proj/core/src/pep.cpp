#include "harqerr/pep.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "harqerr/special.hpp"

namespace harqerr {

namespace {

constexpr int kNodes = 8;
// Kernel and density support, in standard deviations.
constexpr double kKernelSpan = 9.0;
// Sub-density support is cut where it has decayed by e^{-kTailExponent}.
constexpr double kTailExponent = 50.0;
// Contributions below e^{-kDropExponent} of the leading term are dropped.
constexpr double kDropExponent = 80.0;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr std::uint64_t kSamplesPerBlock = 1 << 16;

struct Reference {
  std::array<double, kNodes> x{};
  std::array<double, kNodes> w{};
  std::array<double, kNodes> bary{};
};

const Reference& reference() {
  static const Reference ref = [] {
    using Rule = boost::math::quadrature::gauss<double, kNodes>;
    Reference r;
    const auto& a = Rule::abscissa();
    const auto& wt = Rule::weights();
    constexpr int half = kNodes / 2;
    for (int i = 0; i < half; ++i) {
      r.x[half - 1 - i] = -a[i];
      r.w[half - 1 - i] = wt[i];
      r.x[half + i] = a[i];
      r.w[half + i] = wt[i];
    }
    for (int j = 0; j < kNodes; ++j) {
      double prod = 1.0;
      for (int i = 0; i < kNodes; ++i)
        if (i != j) prod *= r.x[j] - r.x[i];
      r.bary[j] = 1.0 / prod;
    }
    return r;
  }();
  return ref;
}

// Piecewise-polynomial representation of a sub-density on [lo, hi], stored
// as log-values so that far tails neither underflow nor get cut off.
struct Grid {
  std::vector<double> lo, hi;      // panel bounds
  std::vector<double> node;        // kNodes per panel
  std::vector<double> log_weight;
  std::vector<double> log_value;
  std::vector<double> panel_max;   // max log_value per panel

  std::size_t panels() const { return lo.size(); }

  void add_panel(double a, double b) {
    const Reference& ref = reference();
    lo.push_back(a);
    hi.push_back(b);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < kNodes; ++i) {
      node.push_back(mid + half * ref.x[i]);
      log_weight.push_back(std::log(half * ref.w[i]));
    }
  }

  void finish() {
    panel_max.assign(panels(), -std::numeric_limits<double>::infinity());
    for (std::size_t p = 0; p < panels(); ++p)
      for (int i = 0; i < kNodes; ++i)
        panel_max[p] = std::max(panel_max[p], log_value[p * kNodes + i]);
  }

  // Log-value at u inside panel p by barycentric Lagrange interpolation.
  double interpolate(std::size_t p, double u) const {
    const Reference& ref = reference();
    const double mid = 0.5 * (lo[p] + hi[p]), half = 0.5 * (hi[p] - lo[p]);
    const double t = (u - mid) / half;
    double num = 0.0, den = 0.0;
    for (int j = 0; j < kNodes; ++j) {
      const double diff = t - ref.x[j];
      if (diff == 0.0) return log_value[p * kNodes + j];
      const double c = ref.bary[j] / diff;
      num += c * log_value[p * kNodes + j];
      den += c;
    }
    return num / den;
  }

  double log_integral() const {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < node.size(); ++i) top = std::max(top, log_weight[i] + log_value[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < node.size(); ++i) sum += std::exp(log_weight[i] + log_value[i] - top);
    return top + std::log(sum);
  }
};

// Panels over [c, c + L] for a walk of std `sigma`, with L where the
// unconstrained density has fallen by e^{-kTailExponent} relative to c. The
// first panels are refined geometrically down to `feature` so that
// structure of that width at the truncation point is resolved.
Grid make_grid(double c, double sigma, double feature, int panels) {
  const double z = c / sigma;
  const double length = sigma * (std::sqrt(z * z + 2.0 * kTailExponent) - z);
  const double uniform = length / panels;
  Grid g;
  double a = c;
  double w = std::min(uniform, 0.5 * feature);
  while (w < uniform) {
    g.add_panel(a, a + w);
    a += w;
    w *= 2.0;
  }
  const double end = c + length;
  while (a < end - 1e-12 * length) {
    const double b = std::min(end, a + uniform);
    g.add_panel(a, b);
    a = b;
  }
  return g;
}

double log_normal_kernel(double x, double sigma, double log_sigma) {
  const double z = x / sigma;
  return -0.5 * z * z - log_sigma - kLogSqrt2Pi;
}

// log g(s), g(s) = int f(u) phi_sigma(s - u) du over the support of f.
//
// Panels whose best-case contribution is below e^{-kDropExponent} of the
// leading one are skipped. Within a panel the integrand is split into pieces
// no wider than the kernel std and narrow enough that the kernel's
// exponential tilt across a piece stays small.
double log_convolve_at(const Grid& f, double s, double sigma, std::vector<double>& bound) {
  const Reference& ref = reference();
  const double log_sigma = std::log(sigma);
  const std::size_t np = f.panels();

  bound.resize(np);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < np; ++p) {
    const double dist = std::max({0.0, f.lo[p] - s, s - f.hi[p]});
    bound[p] = f.panel_max[p] + std::log(f.hi[p] - f.lo[p]) + log_normal_kernel(dist, sigma, log_sigma);
    best = std::max(best, bound[p]);
  }

  double sum = 0.0;
  for (std::size_t p = 0; p < np; ++p) {
    if (bound[p] < best - kDropExponent) continue;
    const double a = f.lo[p], b = f.hi[p];
    const double dist = std::max({0.0, a - s, s - b});
    const double reach = std::sqrt(dist * dist + 2.0 * kDropExponent * sigma * sigma);
    const double lo = std::max(a, s - reach), hi = std::min(b, s + reach);
    if (!(hi > lo)) continue;
    const double max_piece = std::min(sigma, 4.0 * sigma * sigma / std::max(dist, sigma));
    const int pieces = static_cast<int>(std::min(4096.0, std::ceil((hi - lo) / max_piece)));
    if (pieces <= 1 && lo == a && hi == b) {
      for (int i = 0; i < kNodes; ++i) {
        const std::size_t idx = p * kNodes + i;
        sum += std::exp(f.log_weight[idx] + f.log_value[idx] +
                        log_normal_kernel(s - f.node[idx], sigma, log_sigma) - best);
      }
      continue;
    }
    const double width = (hi - lo) / pieces;
    for (int q = 0; q < pieces; ++q) {
      const double mid = lo + (q + 0.5) * width, half = 0.5 * width;
      for (int i = 0; i < kNodes; ++i) {
        const double u = mid + half * ref.x[i];
        sum += half * ref.w[i] *
               std::exp(f.interpolate(p, u) + log_normal_kernel(s - u, sigma, log_sigma) - best);
      }
    }
  }
  return best + std::log(sum);
}

void check_problem(const PepProblem& prob) {
  if (!(prob.d > 0.0) || !std::isfinite(prob.d))
    throw std::domain_error("PEP: distance must be finite and > 0");
}

std::vector<std::size_t> informative_rounds(const SnrSchedule& sched) {
  std::vector<std::size_t> idx;
  for (std::size_t l = 0; l < sched.rounds(); ++l)
    if (sched.round_snr(l) > 0.0) idx.push_back(l);
  return idx;
}

double binomial_stderr(double p, std::uint64_t n) {
  return n == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace

double pep_single(double d, double snr_acc) {
  if (!(d > 0.0)) throw std::domain_error("pep_single: distance must be > 0");
  if (!(snr_acc >= 0.0)) throw std::domain_error("pep_single: SNR must be >= 0");
  return q_function(0.5 * d * std::sqrt(snr_acc));
}

double pep_single_log(double d, double snr_acc) {
  pep_single(d, snr_acc);
  return log_q_function(0.5 * d * std::sqrt(snr_acc));
}

double pep_joint_log(const PepProblem& prob, const PepQuadratureOptions& options) {
  check_problem(prob);
  const SnrSchedule& sched = prob.sched;
  if (sched.rounds() > static_cast<std::size_t>(options.max_rounds))
    throw std::invalid_argument("pep_joint: schedule longer than the supported round limit");
  if (options.panels < 1) throw std::invalid_argument("pep_joint: panels must be >= 1");

  const double single = pep_single_log(prob.d, sched.total());
  const auto rounds = informative_rounds(sched);
  if (rounds.empty()) return std::log(0.5);
  if (rounds.size() == 1) return single;

  const double d = prob.d;
  double acc = sched.accumulated(rounds[0]);
  double sigma = std::sqrt(acc);
  Grid density = make_grid(0.5 * d * acc, sigma, sigma, options.panels);
  const double log_sigma = std::log(sigma);
  for (double u : density.node) density.log_value.push_back(log_normal_kernel(u, sigma, log_sigma));
  density.finish();

  std::vector<double> scratch;
  for (std::size_t r = 1; r < rounds.size(); ++r) {
    const double step_sigma = std::sqrt(sched.round_snr(rounds[r]));
    acc = sched.accumulated(rounds[r]);
    sigma = std::sqrt(acc);
    Grid next = make_grid(0.5 * d * acc, sigma, step_sigma, options.panels);
    next.log_value.reserve(next.node.size());
    for (double s : next.node) next.log_value.push_back(log_convolve_at(density, s, step_sigma, scratch));
    next.finish();
    density = std::move(next);
  }
  return std::min(density.log_integral(), single);
}

double pep_joint(const PepProblem& prob, const PepQuadratureOptions& options) {
  return std::exp(pep_joint_log(prob, options));
}

double pep_joint_error_estimate(const PepProblem& prob, const PepQuadratureOptions& options) {
  PepQuadratureOptions fine = options;
  fine.panels *= 2;
  return std::abs(pep_joint(prob, options) - pep_joint(prob, fine));
}

std::uint64_t pep_joint_mc_hits(const PepProblem& prob, std::uint64_t samples, std::uint64_t seed,
                                unsigned workers) {
  check_problem(prob);
  if (samples < 1) throw std::invalid_argument("pep_joint_mc: samples must be >= 1");
  const auto rounds = informative_rounds(prob.sched);
  std::vector<double> scale, threshold;
  for (std::size_t l : rounds) {
    scale.push_back(std::sqrt(prob.sched.round_snr(l)));
    threshold.push_back(0.5 * prob.d * prob.sched.accumulated(l));
  }
  if (rounds.empty()) {  // all-tie regime: a single fair comparison
    scale.push_back(1.0);
    threshold.push_back(0.0);
  }

  const std::size_t blocks = (samples + kSamplesPerBlock - 1) / kSamplesPerBlock;
  auto block = [&](std::size_t b) -> std::uint64_t {
    Engine engine = make_engine(seed, b);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::uint64_t n = std::min<std::uint64_t>(kSamplesPerBlock, samples - b * kSamplesPerBlock);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      double s = 0.0;
      bool ok = true;
      for (std::size_t l = 0; l < scale.size() && ok; ++l) {
        s += scale[l] * normal(engine);
        ok = s > threshold[l];
      }
      hits += ok;
    }
    return hits;
  };
  std::uint64_t hits = 0;
  for (std::uint64_t h : run_indexed(blocks, workers, block)) hits += h;
  return hits;
}

McEstimate pep_joint_mc(const PepProblem& prob, std::uint64_t samples, std::uint64_t seed,
                        unsigned workers) {
  const std::uint64_t hits = pep_joint_mc_hits(prob, samples, seed, workers);
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  return {p, binomial_stderr(p, samples), samples};
}

PepBoundReport check_pep_bounds(const PepProblem& prob, const PepQuadratureOptions& options) {
  PepBoundReport report;
  const int k = static_cast<int>(prob.sched.rounds());
  report.upper = pep_single(prob.d, prob.sched.total());
  report.lower = std::ldexp(report.upper, -(k - 1));
  report.value = pep_joint(prob, options);
  report.tolerance = 1e-9 + 10.0 * pep_joint_error_estimate(prob, options);
  report.holds = report.lower - report.tolerance <= report.value &&
                 report.value <= report.upper + report.tolerance;
  return report;
}

std::vector<PepSweepRow> sweep_ratio(int k, double d, double snr_1, std::span<const double> t_values,
                                     const PepQuadratureOptions& options) {
  if (k < 2) throw std::invalid_argument("sweep_ratio: k must be >= 2");
  if (!(snr_1 > 0.0)) throw std::invalid_argument("sweep_ratio: first-round SNR must be > 0");
  std::vector<PepSweepRow> rows;
  for (double t : t_values) {
    if (!(t > 0.0)) throw std::invalid_argument("sweep_ratio: t values must be > 0");
    std::vector<double> snrs{snr_1};
    for (int l = 1; l < k; ++l) snrs.push_back(snrs.back() * t);
    const PepProblem prob{d, SnrSchedule(std::move(snrs))};
    PepSweepRow row;
    row.t = t;
    row.joint = pep_joint(prob, options);
    row.single = pep_single(d, prob.sched.total());
    row.lower = std::ldexp(row.single, -(k - 1));
    row.ratio = std::exp(pep_joint_log(prob, options) - pep_single_log(d, prob.sched.total()));
    rows.push_back(row);
  }
  return rows;
}

double union_sum_per(const DistanceSpectrum& spectrum, double snr_acc) {
  if (spectrum.lines.empty()) throw std::invalid_argument("union bound: empty spectrum");
  if (!(snr_acc >= 0.0)) throw std::domain_error("union bound: SNR must be >= 0");
  double sum = 0.0;
  for (const SpectrumLine& line : spectrum.lines)
    sum += line.multiplicity * q_function(std::sqrt(line.weight * snr_acc));
  return spectrum.event_positions * sum;
}

double union_bound_per(const DistanceSpectrum& spectrum, double snr_acc) {
  return std::min(1.0, union_sum_per(spectrum, snr_acc));
}

double union_bound_joint(const DistanceSpectrum& spectrum, const SnrSchedule& sched, bool clamp,
                         const PepQuadratureOptions& options) {
  if (spectrum.lines.empty()) throw std::invalid_argument("union bound: empty spectrum");
  double sum = 0.0;
  for (const SpectrumLine& line : spectrum.lines)
    sum += line.multiplicity * pep_joint({hamming_to_euclidean(line.weight), sched}, options);
  sum *= spectrum.event_positions;
  return clamp ? std::min(1.0, sum) : sum;
}

}  // namespace harqerr
