#include "doctest.h"
#include "harqerr/error_models.hpp"

#include <stdexcept>
#include <cmath>
#include <random>

using namespace harqerr;

namespace {
constexpr auto IE = ModelKind::IndependentErrors;
constexpr auto DE = ModelKind::DeterministicErrors;
}  // namespace

TEST_CASE("failure_prob examples") {
  CHECK(failure_prob(DE, PerModel::ideal_threshold(3.0), SnrSchedule({1, 1})) == 1.0);
  const auto e = PerModel::exponential_threshold(0.0, 1.0);
  CHECK(failure_prob(IE, e, SnrSchedule({1, 1})) == doctest::Approx(std::exp(-3.0)).epsilon(1e-14));
  CHECK(failure_prob(DE, e, SnrSchedule({1, 1})) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(failure_prob(IE, e, SnrSchedule({0.4})) == failure_prob(DE, e, SnrSchedule({0.4})));
}

TEST_CASE("cond_error_prob examples") {
  const auto e = PerModel::exponential_threshold(0.0, 1.0);
  CHECK(cond_error_prob(DE, e, SnrSchedule({1, 1})) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  // zero-SNR round: DE says certain failure, IE repeats the old PER
  const SnrSchedule z({0.8, 0.0});
  CHECK(cond_error_prob(DE, e, z) == 1.0);
  CHECK(cond_error_prob(IE, e, z) == doctest::Approx(e(0.8)));
  // round 1: both return the PER itself
  CHECK(cond_error_prob(DE, e, SnrSchedule({0.3})) == e(0.3));
  CHECK(cond_error_prob(IE, e, SnrSchedule({0.3})) == e(0.3));
  // vacuous conditioning event
  CHECK(cond_error_prob(DE, PerModel::ideal_threshold(1.0), SnrSchedule({2.0, 1.0})) == 0.0);
}

TEST_CASE("model kind parsing") {
  CHECK(parse_model_kind("IE") == IE);
  CHECK(parse_model_kind("de") == DE);
  CHECK(to_string(IE) == "ie");
  CHECK_THROWS_AS(parse_model_kind("exact"), std::invalid_argument);
}

TEST_CASE("randomized properties") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> snr(0.0, 4.0), th(0.0, 3.0), g(0.1, 5.0);
  for (int it = 0; it < 500; ++it) {
    const int k = 1 + static_cast<int>(rng() % 6);
    std::vector<double> s(k);
    for (auto& x : s) x = (rng() % 5 == 0) ? 0.0 : snr(rng);
    const SnrSchedule sched(s);
    const double t = th(rng);
    const auto e = PerModel::exponential_threshold(t, g(rng));
    const auto i = PerModel::ideal_threshold(t);

    REQUIRE(failure_prob(IE, e, sched) <= failure_prob(DE, e, sched));
    CHECK(failure_prob(IE, i, sched) == failure_prob(DE, i, sched));

    for (auto kind : {IE, DE}) {
      double prod = 1.0, prev = 1.0;
      for (int l = 1; l <= k; ++l) {
        const auto p = sched.prefix(l);
        prod *= cond_error_prob(kind, e, p);
        const double f = failure_prob(kind, e, p);
        REQUIRE(std::abs(prod - f) < 1e-12);
        REQUIRE(f <= prev);
        prev = f;
      }
    }
  }
}

TEST_CASE("sampler edge cases") {
  const auto easy = sample_error_sequence(DE, PerModel::ideal_threshold(1.0), SnrSchedule({2, 2}), 2, 1);
  CHECK(easy.delivered);
  CHECK(easy.rounds_used == 1);
  CHECK(easy.error_flags == std::vector<bool>{false});

  const auto hard =
      sample_error_sequence(IE, PerModel::ideal_threshold(10.0), SnrSchedule({1, 1, 1}), 3, 1);
  CHECK_FALSE(hard.delivered);
  CHECK(hard.rounds_used == 3);
  CHECK(hard.error_flags == std::vector<bool>{true, true, true});

  CHECK_THROWS_AS(sample_error_sequence(DE, PerModel::ideal_threshold(1.0), SnrSchedule({1}), 2, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_error_sequence(DE, PerModel::ideal_threshold(1.0), SnrSchedule({1}), 0, 1),
                  std::invalid_argument);
}

TEST_CASE("sampler matches failure_prob at 1e6 seeds") {
  const auto e = PerModel::exponential_threshold(0.0, 1.0);
  const SnrSchedule sched({1, 1});
  for (auto kind : {DE, IE}) {
    const int n = 1'000'000;
    int nack = 0;
    for (int s = 0; s < n; ++s) {
      const auto o = sample_error_sequence(kind, e, sched, 2, static_cast<std::uint64_t>(s));
      REQUIRE(o.rounds_used == static_cast<int>(o.error_flags.size()));
      for (int l = 0; l + 1 < o.rounds_used; ++l) REQUIRE(o.error_flags[l]);
      REQUIRE(o.delivered == !o.error_flags.back());
      if (!o.delivered) ++nack;
    }
    const double p = failure_prob(kind, e, sched);
    const double sigma = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(static_cast<double>(nack) / n - p) < 3 * sigma);
  }
  // deterministic given the seed
  const auto a = sample_error_sequence(DE, e, SnrSchedule({0.2, 0.2, 0.2}), 3, 99);
  const auto b = sample_error_sequence(DE, e, SnrSchedule({0.2, 0.2, 0.2}), 3, 99);
  CHECK(a.error_flags == b.error_flags);
}
