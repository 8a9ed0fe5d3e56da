#include "harqerr/conv_code.hpp"

#include <bit>
#include <limits>
#include <map>
#include <stdexcept>

namespace harqerr {

namespace {

int degree(unsigned poly) { return static_cast<int>(std::bit_width(poly)) - 1; }

// Coefficient of D^i for a polynomial of the given memory (MSB = D^0).
int coeff(unsigned poly, int memory, int i) { return static_cast<int>((poly >> (memory - i)) & 1u); }

}  // namespace

CodeSpec CodeSpec::rsc(unsigned feedforward, unsigned feedback, int message_bits) {
  CodeSpec c;
  c.feedforward = feedforward;
  c.feedback = feedback;
  c.memory = std::max(degree(feedforward), degree(feedback));
  c.message_bits = message_bits;
  c.validate();
  return c;
}

void CodeSpec::validate() const {
  if (memory < 1 || memory > 12) throw std::invalid_argument("CodeSpec: memory must be in [1, 12]");
  if (message_bits < 1) throw std::invalid_argument("CodeSpec: message length must be >= 1");
  if (feedforward == 0 || feedback == 0)
    throw std::invalid_argument("CodeSpec: generator polynomials must be non-zero");
  if (degree(feedforward) > memory || degree(feedback) > memory)
    throw std::invalid_argument("CodeSpec: polynomial degree exceeds memory");
  if (coeff(feedback, memory, 0) != 1)
    throw std::invalid_argument("CodeSpec: feedback polynomial needs a D^0 term");
}

Trellis::Trellis(const CodeSpec& code) : memory_(code.memory) {
  code.validate();
  const int n = 1 << memory_;
  next_.resize(2 * n);
  parity_.resize(2 * n);
  feedback_bit_.resize(n);
  for (int s = 0; s < n; ++s) {
    int fb = 0;
    int ff = 0;
    for (int i = 1; i <= memory_; ++i) {
      const int reg = (s >> (i - 1)) & 1;
      fb ^= reg & coeff(code.feedback, memory_, i);
      ff ^= reg & coeff(code.feedforward, memory_, i);
    }
    feedback_bit_[s] = fb;
    for (int u = 0; u < 2; ++u) {
      const int a = u ^ fb;
      next_[2 * s + u] = ((s << 1) | a) & (n - 1);
      parity_[2 * s + u] = ff ^ (a & coeff(code.feedforward, memory_, 0));
    }
  }
}

Bits conv_encode(std::span<const std::uint8_t> msg, const CodeSpec& code) {
  if (msg.size() != static_cast<std::size_t>(code.message_bits))
    throw std::invalid_argument("conv_encode: message length does not match the code");
  const Trellis trellis(code);
  Bits out;
  out.reserve(code.coded_bits());
  int s = 0;
  auto step = [&](int u) {
    out.push_back(static_cast<std::uint8_t>(u));
    out.push_back(static_cast<std::uint8_t>(trellis.parity(s, u)));
    s = trellis.next_state(s, u);
  };
  for (std::uint8_t bit : msg) step(bit & 1);
  for (int t = 0; t < code.memory; ++t) step(trellis.tail_input(s));
  return out;
}

ViterbiDecoder::ViterbiDecoder(const CodeSpec& code) : code_(code), trellis_(code) {}

Bits ViterbiDecoder::decode(std::span<const double> weights) const {
  if (weights.size() != static_cast<std::size_t>(code_.coded_bits()))
    throw std::invalid_argument("viterbi: block length does not match the code");

  constexpr double kUnreachable = -std::numeric_limits<double>::infinity();
  const int n = trellis_.states();
  const int m = trellis_.memory();
  const int steps = code_.trellis_steps();

  std::vector<double> metric(n, kUnreachable), next(n);
  metric[0] = 0.0;
  // decision[t * n + s] selects the predecessor of s at step t (its top bit).
  std::vector<std::uint8_t> decision(static_cast<std::size_t>(steps) * n);

  for (int t = 0; t < steps; ++t) {
    const bool tail = t >= code_.message_bits;
    const double ws = weights[2 * t];
    const double wp = weights[2 * t + 1];
    for (int ns = 0; ns < n; ++ns) {
      const int a = ns & 1;
      double best = kUnreachable;
      int best_b = 0;
      int best_u = 2;
      for (int b = 0; b < 2; ++b) {
        const int prev = (ns >> 1) | (b << (m - 1));
        const int u = a ^ trellis_.tail_input(prev);
        if (tail && u != trellis_.tail_input(prev)) continue;  // tail steps force a = 0
        const double bm = (u ? -ws : ws) + (trellis_.parity(prev, u) ? -wp : wp);
        const double cand = metric[prev] + bm;
        if (cand > best || (cand == best && u < best_u)) {
          best = cand;
          best_b = b;
          best_u = u;
        }
      }
      next[ns] = best;
      decision[static_cast<std::size_t>(t) * n + ns] = static_cast<std::uint8_t>(best_b);
    }
    metric.swap(next);
  }

  Bits msg(code_.message_bits);
  int s = 0;
  for (int t = steps - 1; t >= 0; --t) {
    const int b = decision[static_cast<std::size_t>(t) * n + s];
    const int prev = (s >> 1) | (b << (m - 1));
    if (t < code_.message_bits) msg[t] = static_cast<std::uint8_t>(trellis_.input_between(prev, s));
    s = prev;
  }
  return msg;
}

double DistanceSpectrum::multiplicity(int weight) const {
  for (const SpectrumLine& line : lines)
    if (line.weight == weight) return line.multiplicity;
  return 0.0;
}

DistanceSpectrum distance_spectrum(const CodeSpec& code, int max_hamming_weight) {
  if (max_hamming_weight < 1)
    throw std::invalid_argument("distance_spectrum: weight bound must be >= 1");
  const Trellis trellis(code);
  const int n = trellis.states();
  const int wmax = max_hamming_weight;

  std::vector<double> counts(static_cast<std::size_t>(wmax) + 1, 0.0);
  // active[s * (wmax + 1) + w]: paths currently in state s != 0 with weight w.
  std::vector<double> active(static_cast<std::size_t>(n) * (wmax + 1), 0.0), next(active.size());
  auto at = [wmax](int s, int w) { return static_cast<std::size_t>(s) * (wmax + 1) + w; };

  // Divergence: the input from the zero state that leaves it.
  for (int u = 0; u < 2; ++u) {
    const int s = trellis.next_state(0, u);
    if (s == 0) continue;
    const int w = u + trellis.parity(0, u);
    if (w <= wmax) active[at(s, w)] += 1.0;
  }

  // Every cycle avoiding the zero state has positive weight for a
  // non-catastrophic code, so the search ends after a bounded number of steps.
  const long step_limit = 4L * (wmax + 1) * n + 16;
  for (long step = 0;; ++step) {
    bool any = false;
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 1; s < n; ++s) {
      for (int w = 0; w <= wmax; ++w) {
        const double c = active[at(s, w)];
        if (c == 0.0) continue;
        for (int u = 0; u < 2; ++u) {
          const int ns = trellis.next_state(s, u);
          const int nw = w + u + trellis.parity(s, u);
          if (nw > wmax) continue;
          if (ns == 0) {
            counts[nw] += c;
          } else {
            next[at(ns, nw)] += c;
            any = true;
          }
        }
      }
    }
    active.swap(next);
    if (!any) break;
    if (step > step_limit)
      throw std::invalid_argument("distance_spectrum: code appears catastrophic");
  }

  DistanceSpectrum spectrum;
  spectrum.max_weight = wmax;
  spectrum.event_positions = code.message_bits;
  for (int w = 1; w <= wmax; ++w)
    if (counts[w] > 0.0) spectrum.lines.push_back({w, counts[w]});
  return spectrum;
}

}  // namespace harqerr
