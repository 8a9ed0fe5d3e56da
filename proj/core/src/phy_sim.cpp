#include "harqerr/phy_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace harqerr {

namespace {

constexpr std::uint64_t kTrialsPerJob = 128;

double binomial_stderr(double p, std::uint64_t n) {
  return n == 0 ? 0.0 : std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace

ReceivedBlock transmit_round(std::span<const std::uint8_t> codeword, double snr, Engine& engine) {
  if (!(snr >= 0.0)) throw std::domain_error("transmit_round: SNR must be >= 0");
  std::normal_distribution<double> noise(0.0, 1.0);
  const double amplitude = std::sqrt(snr);
  ReceivedBlock block;
  block.snr = snr;
  block.samples.reserve(codeword.size());
  for (std::uint8_t bit : codeword) block.samples.push_back(amplitude * bpsk(bit) + noise(engine));
  return block;
}

ReceivedBlock transmit_round(std::span<const std::uint8_t> codeword, double snr,
                             std::uint64_t seed) {
  Engine engine = make_engine(seed, 0);
  return transmit_round(codeword, snr, engine);
}

ReceivedBlock mrc_combine(std::span<const ReceivedBlock> blocks) {
  if (blocks.empty()) throw std::invalid_argument("mrc_combine: no blocks");
  const std::size_t len = blocks.front().samples.size();
  double total = 0.0;
  for (const ReceivedBlock& b : blocks) {
    if (b.samples.size() != len) throw std::invalid_argument("mrc_combine: length mismatch");
    total += b.snr;
  }
  if (total == 0.0) return blocks.back();

  ReceivedBlock out;
  out.snr = total;
  out.samples.assign(len, 0.0);
  for (const ReceivedBlock& b : blocks) {
    const double w = std::sqrt(b.snr / total);
    for (std::size_t i = 0; i < len; ++i) out.samples[i] += w * b.samples[i];
  }
  return out;
}

Bits viterbi_decode(const ReceivedBlock& block, const CodeSpec& code) {
  const double scale = std::sqrt(block.snr);
  std::vector<double> weights(block.samples.size());
  std::transform(block.samples.begin(), block.samples.end(), weights.begin(),
                 [scale](double y) { return scale * y; });
  return ViterbiDecoder(code).decode(weights);
}

JointErrorEstimate estimate_joint_errors(const CodeSpec& code, const SnrSchedule& sched,
                                         std::uint64_t trials, std::uint64_t seed,
                                         unsigned workers) {
  if (trials < 1) throw std::invalid_argument("estimate_joint_errors: trials must be >= 1");
  code.validate();
  const std::size_t k = sched.rounds();
  const ViterbiDecoder decoder(code);
  const std::size_t jobs = (trials + kTrialsPerJob - 1) / kTrialsPerJob;

  // Per job: k joint counts followed by k marginal counts.
  auto job = [&](std::size_t j) {
    std::vector<std::uint64_t> counts(2 * k, 0);
    const std::uint64_t first = j * kTrialsPerJob;
    const std::uint64_t last = std::min<std::uint64_t>(trials, first + kTrialsPerJob);
    const std::size_t ns = static_cast<std::size_t>(code.coded_bits());
    Bits msg(code.message_bits);
    std::vector<double> accumulated(ns);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::uint64_t t = first; t < last; ++t) {
      Engine engine = make_engine(seed, t);
      for (auto& bit : msg) bit = static_cast<std::uint8_t>(engine() >> 63);
      const Bits codeword = conv_encode(msg, code);
      std::fill(accumulated.begin(), accumulated.end(), 0.0);
      noise.reset();
      bool all_failed = true;
      for (std::size_t l = 0; l < k; ++l) {
        // sqrt(snr_acc) times the combined block equals sum_l sqrt(snr_l) y_l.
        const double a = std::sqrt(sched.round_snr(l));
        for (std::size_t i = 0; i < ns; ++i) {
          const double y = a * bpsk(codeword[i]) + noise(engine);
          accumulated[i] += a * y;
        }
        const bool error = decoder.decode(accumulated) != msg;
        all_failed = all_failed && error;
        counts[k + l] += error;
        counts[l] += all_failed;
      }
    }
    return counts;
  };

  const auto per_job = run_indexed(jobs, workers, job);

  JointErrorEstimate est;
  est.trials = trials;
  est.joint_count.assign(k, 0);
  est.marginal_count.assign(k, 0);
  for (const auto& counts : per_job) {
    for (std::size_t l = 0; l < k; ++l) {
      est.joint_count[l] += counts[l];
      est.marginal_count[l] += counts[k + l];
    }
  }
  const double n = static_cast<double>(trials);
  for (std::size_t l = 0; l < k; ++l) {
    const double f = est.joint_count[l] / n;
    const double p = est.marginal_count[l] / n;
    est.f_hat.push_back(f);
    est.marginal.push_back(p);
    est.f_hat_stderr.push_back(binomial_stderr(f, trials));
    est.marginal_stderr.push_back(binomial_stderr(p, trials));
  }
  return est;
}

std::vector<McEstimate> measure_per_curve(const CodeSpec& code, std::span<const double> snrs,
                                          std::uint64_t trials, std::uint64_t seed,
                                          unsigned workers) {
  std::vector<McEstimate> curve;
  curve.reserve(snrs.size());
  for (std::size_t i = 0; i < snrs.size(); ++i) {
    const auto est =
        estimate_joint_errors(code, SnrSchedule({snrs[i]}), trials, derive_seed(seed, i), workers);
    curve.push_back({est.f_hat[0], est.f_hat_stderr[0], trials});
  }
  return curve;
}

ModelComparison compare_error_models(const CodeSpec& code, const SnrSchedule& sched,
                                     std::uint64_t trials, std::uint64_t per_trials,
                                     std::uint64_t seed, unsigned workers) {
  ModelComparison out;
  out.exact = estimate_joint_errors(code, sched, trials, derive_seed(seed, 0), workers);
  out.per = measure_per_curve(code, sched.accumulated(), per_trials, derive_seed(seed, 1), workers);
  double ie = 1.0, rel2 = 0.0;
  for (const McEstimate& p : out.per) {
    ie *= p.value;
    if (p.value > 0.0) rel2 += (p.std_error / p.value) * (p.std_error / p.value);
    out.f_de.push_back(p.value);
    out.f_de_stderr.push_back(p.std_error);
    out.f_ie.push_back(ie);
    out.f_ie_stderr.push_back(ie * std::sqrt(rel2));
  }
  return out;
}

}  // namespace harqerr
