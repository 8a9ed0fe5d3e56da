#include "doctest.h"
#include "harqerr/conv_code.hpp"

#include <stdexcept>
#include <array>
#include <map>
#include <random>

using namespace harqerr;

namespace {

// Test-only reference: the RSC as a pair of difference equations over GF(2),
// w_n = u_n + sum_{i>=1} fb_i w_{n-i},  p_n = sum_{i>=0} ff_i w_{n-i},
// with coefficients read MSB-first from the octal generators.
struct Reference {
  std::array<int, 4> ff{1, 1, 0, 1};  // 015 = 1 + D + D^3
  std::array<int, 4> fb{1, 0, 1, 1};  // 013 = 1 + D^2 + D^3

  Bits encode(const Bits& msg) const {
    std::vector<int> w(3, 0);  // w[-3..-1] = 0
    Bits out;
    auto step = [&](int u) {
      const std::size_t n = w.size();
      const int fbsum = (fb[1] & w[n - 1]) ^ (fb[2] & w[n - 2]) ^ (fb[3] & w[n - 3]);
      const int wn = u ^ fbsum;
      const int p = (ff[0] & wn) ^ (ff[1] & w[n - 1]) ^ (ff[2] & w[n - 2]) ^ (ff[3] & w[n - 3]);
      w.push_back(wn);
      out.push_back(static_cast<std::uint8_t>(u));
      out.push_back(static_cast<std::uint8_t>(p));
    };
    for (auto b : msg) step(b);
    for (int t = 0; t < 3; ++t) {
      const std::size_t n = w.size();
      step((fb[1] & w[n - 1]) ^ (fb[2] & w[n - 2]) ^ (fb[3] & w[n - 3]));  // forces w_n = 0
    }
    return out;
  }

  // One transition of the (w_{n-1}, w_{n-2}, w_{n-3}) register: returns
  // (next state, output weight of the branch).
  std::pair<int, int> move(int s, int u) const {
    const int w1 = s & 1, w2 = (s >> 1) & 1, w3 = (s >> 2) & 1;
    const int wn = u ^ (fb[1] & w1) ^ (fb[2] & w2) ^ (fb[3] & w3);
    const int p = (ff[0] & wn) ^ (ff[1] & w1) ^ (ff[2] & w2) ^ (ff[3] & w3);
    return {((s << 1) | wn) & 7, u + p};
  }
};

// Error events by depth-first search over paths leaving state 0, with
// weight-bounded pruning; an event ends at its first return to state 0.
void enumerate(const Reference& r, int state, int weight, int depth, int bound, int max_depth,
               std::map<int, long>& counts) {
  if (depth > max_depth) return;
  for (int u = 0; u < 2; ++u) {
    auto [next, w] = r.move(state, u);
    const int total = weight + w;
    if (total > bound) continue;
    if (depth == 0 && next == 0) continue;  // the all-zero branch is not an event
    if (next == 0) {
      ++counts[total];
      continue;
    }
    enumerate(r, next, total, depth + 1, bound, max_depth, counts);
  }
}

}  // namespace

TEST_CASE("code spec") {
  const CodeSpec c;
  CHECK(c.memory == 3);
  CHECK(c.coded_bits() == 2 * (128 + 3));
  CHECK(c.rate() == doctest::Approx(128.0 / 262.0));
  const auto r = CodeSpec::rsc(015, 013, 512);
  CHECK(r.memory == 3);
  CHECK(r.coded_bits() == 1030);
  CHECK_THROWS_AS(CodeSpec::rsc(015, 05, 8), std::invalid_argument);  // no D^0 feedback term
  CHECK_THROWS_AS(CodeSpec::rsc(015, 013, 0), std::invalid_argument);
}

TEST_CASE("encoder: frozen value and reference agreement") {
  CodeSpec c;
  c.message_bits = 4;
  const Bits frozen{1, 1, 0, 1, 0, 1, 0, 1, 1, 1, 0, 1, 1, 1};  // hand trellis trace
  CHECK(conv_encode(Bits{1, 0, 0, 0}, c) == frozen);
  const Reference ref;
  CHECK(ref.encode(Bits{1, 0, 0, 0}) == frozen);
  CHECK(conv_encode(Bits(4, 0), c) == Bits(14, 0));

  c.message_bits = 128;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    Bits m(128);
    for (auto& b : m) b = rng() & 1;
    const Bits x = conv_encode(m, c);
    REQUIRE(x == ref.encode(m));
    for (int j = 0; j < 128; ++j) REQUIRE(x[2 * j] == m[j]);  // systematic
  }
  CHECK_THROWS_AS(conv_encode(Bits(5, 0), CodeSpec{}), std::invalid_argument);
}

TEST_CASE("decoder: noiseless recovery and ties") {
  const CodeSpec c;
  const ViterbiDecoder dec(c);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    Bits m(c.message_bits);
    for (auto& b : m) b = rng() & 1;
    const Bits x = conv_encode(m, c);
    std::vector<double> w(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) w[j] = x[j] ? -1.0 : 1.0;
    REQUIRE(dec.decode(w) == m);
  }
  CHECK(dec.decode(std::vector<double>(c.coded_bits(), 0.0)) == Bits(c.message_bits, 0));
  CHECK_THROWS_AS(dec.decode(std::vector<double>(10, 0.0)), std::invalid_argument);
}

TEST_CASE("free distance by brute force over short messages") {
  CodeSpec c;
  c.message_bits = 10;
  int dmin = 1 << 30;
  for (unsigned v = 1; v < (1u << 10); ++v) {
    Bits m(10);
    for (int j = 0; j < 10; ++j) m[j] = (v >> j) & 1;
    int w = 0;
    for (auto b : conv_encode(m, c)) w += b;
    dmin = std::min(dmin, w);
  }
  CHECK(dmin == 6);
  CHECK(distance_spectrum(CodeSpec{}, 12).free_distance() == 6);
}

TEST_CASE("spectrum matches path enumeration") {
  const auto spec = distance_spectrum(CodeSpec{}, 10);
  std::map<int, long> counts;
  enumerate(Reference{}, 0, 0, 0, 10, 30, counts);
  for (int w = 1; w <= 10; ++w) CHECK(spec.multiplicity(w) == doctest::Approx(counts[w]));
  for (int w = 1; w < 6; ++w) CHECK(spec.multiplicity(w) == 0.0);
  CHECK(spec.event_positions == 128.0);

  // enlarging the bound keeps the smaller-weight lines
  const auto bigger = distance_spectrum(CodeSpec{}, 14);
  for (const auto& line : spec.lines) CHECK(bigger.multiplicity(line.weight) == line.multiplicity);
  for (const auto& line : bigger.lines) CHECK(line.multiplicity >= 1.0);

  CHECK(distance_spectrum(CodeSpec{}, 5).lines.empty());
  CHECK_THROWS_AS(distance_spectrum(CodeSpec{}, 0), std::invalid_argument);
}
