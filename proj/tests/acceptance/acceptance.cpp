// Acceptance run: one PASS/FAIL line per criterion.
//   harqerr_acceptance            all criteria
//   harqerr_acceptance 3 7        selected criteria
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../common/pep_lemmas.hpp"
#include "harqerr/conv_code.hpp"
#include "harqerr/error_models.hpp"
#include "harqerr/fading.hpp"
#include "harqerr/parallel.hpp"
#include "harqerr/pep.hpp"
#include "harqerr/per_models.hpp"
#include "harqerr/phy_sim.hpp"
#include "harqerr/special.hpp"

using namespace harqerr;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

double sigma3(double a, double b) { return 3.0 * std::hypot(a, b); }

// k rounds with SNRs drawn uniformly (odd i) or log-uniformly (even i) in
// [0.01, 20], d uniform in [0.5, 4].
PepProblem random_problem(std::mt19937_64& rng, int k, bool log_uniform) {
  std::uniform_real_distribution<double> lin(0.01, 20.0), lg(std::log(0.01), std::log(20.0)), d(0.5, 4.0);
  std::vector<double> s(k);
  for (auto& x : s) x = log_uniform ? std::exp(lg(rng)) : lin(rng);
  const double dd = d(rng);
  return PepProblem{dd, SnrSchedule(s)};
}

const double kMinus3dB = std::pow(10.0, -0.3);

// ---------------------------------------------------------------------------

void c1_sandwich(Verdict& v) {
  std::mt19937_64 rng(101);
  int held = 0;
  double worst_eps = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto p = random_problem(rng, 2 + i % 3, i % 2 == 0);
    const auto r = check_pep_bounds(p);
    worst_eps = std::max(worst_eps, r.tolerance);
    if (r.holds && r.tolerance <= 1e-6) ++held;
  }
  v.detail << held << "/200 problems satisfy 2^-(k-1) P_k - eps <= P_1:k <= P_k + eps, max eps " << worst_eps;
  v.require(held == 200, "sandwich on every problem with eps <= 1e-6");
}

void c2_upper_attainment(Verdict& v) {
  double worst = 0.0;
  int cases = 0;
  for (int k = 1; k <= 4; ++k)
    for (int j = 0; j < k; ++j)
      for (double g : {0.05, 0.5, 2.0, 10.0})
        for (double d : {0.5, 1.0, 3.0}) {
          std::vector<double> s(k, 0.0);
          s[j] = g;
          const PepProblem p{d, SnrSchedule(s)};
          worst = std::max(worst, std::abs(pep_joint(p) - pep_single(d, g)));
          ++cases;
        }
  v.detail << cases << " one-nonzero schedules, max |P_1:k - P_k| = " << worst;
  v.require(worst < 1e-6, "|P_1:k - P_k| < 1e-6");
}

void c3_lower_limit(Verdict& v) {
  const std::vector<double> ts{2.0, 100.0};
  const auto k2 = sweep_ratio(2, 1.0, kMinus3dB, ts);
  const auto k3 = sweep_ratio(3, 1.0, kMinus3dB, std::vector<double>{100.0});
  v.detail << "k=2: ratio(t=2) = " << k2[0].ratio << ", ratio(t=100) = " << k2[1].ratio
           << "; k=3: ratio(t=100) = " << k3[0].ratio;
  v.require(k2[1].ratio >= 0.49 && k2[1].ratio <= 0.51, "k=2, t=100 ratio in [0.49, 0.51]");
  v.require(std::abs(k2[0].ratio - 0.5) <= 0.05, "k=2, t=2 ratio within 10% of 0.5");
  v.require(k3[0].ratio > 0.25 && k3[0].ratio < 0.5, "k=3, t=100 ratio in (1/4, 1/2)");
}

void c4_quadrature_vs_mc(Verdict& v) {
  std::mt19937_64 rng(404);
  constexpr std::uint64_t n = 10'000'000;
  int agree = 0;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto p = random_problem(rng, 2 + i % 3, true);
    const double q = pep_joint(p);
    const auto mc = pep_joint_mc(p, n, derive_seed(404, i));
    // Binomial sd under the quadrature value, so zero-hit runs are judged too.
    const double sd = std::max(mc.std_error, std::sqrt(q * (1 - q) / static_cast<double>(n)));
    const double z = sd > 0 ? std::abs(mc.value - q) / sd : (mc.value == q ? 0.0 : INFINITY);
    worst = std::max(worst, z);
    if (z <= 3.0) ++agree;
  }
  v.detail << agree << "/50 problems within 3 sigma of 1e7-sample MC, worst |z| = " << worst;
  v.require(agree == 50, "every problem within 3 sigma");
}

void c5_lemmas(Verdict& v) {
  std::mt19937_64 rng(505);
  double worst_corr = 0.0;
  std::uint64_t counter = 0, hits = 0;
  for (int i = 0; i < 4; ++i) {
    const auto p = random_problem(rng, 3 + i % 2, true);
    const auto st = testing::sample_lemmas(p, 1'000'000, derive_seed(505, i));
    worst_corr = std::max(worst_corr, st.worst_corr_in_sigmas);
    counter += st.counterexamples;
    hits += st.premise_hits;
  }
  int recursion_checks = 0, recursion_ok = 0;
  for (int i = 0; i < 60; ++i) {
    const auto p = random_problem(rng, 2 + i % 3, i % 2 == 0);
    for (std::size_t l = 1; l < p.sched.rounds(); ++l) {
      const auto a = testing::suffix_problem(p, l), b = testing::suffix_problem(p, l + 1);
      const double eps = 1e-9 + 10 * (pep_joint_error_estimate(a) + pep_joint_error_estimate(b));
      ++recursion_checks;
      if (pep_joint(a) >= 0.5 * pep_joint(b) - eps) ++recursion_ok;
    }
  }
  v.detail << "decorrelation worst |corr| = " << worst_corr << " x 3sigma; implication " << counter
           << " counterexamples in " << hits << " premise hits; recursion " << recursion_ok << "/"
           << recursion_checks << " suffix steps";
  v.require(worst_corr <= 1.0, "decorrelation within 3 sigma");
  v.require(counter == 0 && hits > 0, "implication has no counterexample");
  v.require(recursion_ok == recursion_checks, "recursion P_l:k >= P_l+1:k / 2 - eps");
}

void c6_closed_forms(Verdict& v) {
  double worst_closed = 0.0, worst_series = 0.0;
  for (double th : {0.0, 0.5, 2.0})
    for (double g : {0.2, 1.0, 5.0})
      for (double avg : {0.5, 2.0, 10.0, 50.0}) {
        for (int k = 1; k <= 5; ++k) {
          const double c = avg_failure_de_closed(th, g, k, avg);
          const double q = avg_failure_de_numeric(PerModel::exponential_threshold(th, g), k, avg);
          worst_closed = std::max(worst_closed, std::abs(c - q) / std::max(std::abs(q), 1e-300));
        }
        const double kb = avg_rounds(th, g, avg);
        const auto s = avg_rounds_series(th, g, avg, 1e-12);
        worst_series = std::max(worst_series, std::abs(kb - s.value));
      }
  double prev = INFINITY;
  bool monotone = true;
  for (double avg : {1e1, 1e2, 1e4, 1e6, 1e8}) {
    const double kb = avg_rounds(2.0, 0.5, avg);
    monotone = monotone && kb < prev;
    prev = kb;
  }
  v.detail << "max rel |closed - quadrature| = " << worst_closed << ", max |K - (1 + series)| = " << worst_series
           << ", K(1e8) - 1 = " << prev - 1.0;
  v.require(worst_closed <= 1e-9, "closed form within 1e-9 relative");
  v.require(worst_series <= 1e-9, "K formula equals the series within 1e-9");
  v.require(monotone && prev - 1.0 < 1e-7, "K -> 1 as the average SNR grows");
}

void c7_link(Verdict& v) {
  const CodeSpec code = CodeSpec::rsc(015, 013, 128);
  constexpr std::uint64_t n = 100'000;
  struct Case {
    std::vector<double> prefix_db;
    std::vector<double> total_db;
  };
  const std::vector<Case> cases{{{1.5}, {2, 3, 4, 5}},
                                {{3.5}, {4, 4.5, 5, 5.5}},
                                {{-1.5, -1.5}, {2.5, 3, 3.5}},
                                {{0, 0}, {3.5, 4, 4.5}}};
  int points = 0, a_ok = 0, b_points = 0, b_ok = 0, c_points = 0, c_ok = 0;
  double ratio_lo = INFINITY, ratio_hi = 0.0, worst_b = INFINITY;
  std::uint64_t stream = 0;
  for (const auto& cs : cases) {
    std::vector<double> prefix;
    double psum = 0.0;
    for (double db : cs.prefix_db) {
      prefix.push_back(db_to_linear(db));
      psum += prefix.back();
    }
    const std::size_t k = prefix.size() + 1;
    for (double tdb : cs.total_db) {
      auto sched = prefix;
      sched.push_back(db_to_linear(tdb) - psum);
      const auto cmp = compare_error_models(code, SnrSchedule(sched), n, n, derive_seed(707, stream++));
      ++points;
      // (a) DE is an upper bound at every round.
      bool a = true;
      for (std::size_t l = 0; l < k; ++l)
        a = a && cmp.exact.f_hat[l] <= cmp.f_de[l] + sigma3(cmp.exact.f_hat_stderr[l], cmp.f_de_stderr[l]);
      a_ok += a;
      // (b) IE underestimates once the single-round PERs are below 0.1.
      bool low_per = true;
      for (std::size_t l = 0; l < k; ++l) low_per = low_per && cmp.per[l].value < 0.1;
      if (k == 2 && low_per) {
        ++b_points;
        const double gap = cmp.exact.f_hat[1] - cmp.f_ie[1];
        const double s = std::hypot(cmp.exact.f_hat_stderr[1], cmp.f_ie_stderr[1]);
        worst_b = std::min(worst_b, gap / s);
        b_ok += gap >= 3 * s;
      }
      // (c) f_3 / DE_3 inside the factor-2 band around 1/2.
      if (k == 3) {
        ++c_points;
        const double r = cmp.exact.f_hat[2] / cmp.f_de[2];
        const double sr = r * std::hypot(cmp.exact.f_hat_stderr[2] / cmp.exact.f_hat[2],
                                         cmp.f_de_stderr[2] / cmp.f_de[2]);
        ratio_lo = std::min(ratio_lo, r);
        ratio_hi = std::max(ratio_hi, r);
        c_ok += r >= 0.25 - 3 * sr && r <= 1.0 + 3 * sr;
      }
    }
  }
  v.detail << "(a) " << a_ok << "/" << points << " points f_l <= DE + 3sigma; (b) " << b_ok << "/" << b_points
           << " low-PER points with f_2 - IE >= 3sigma (min " << worst_b << " sigma); (c) f_3/DE_3 in ["
           << ratio_lo << ", " << ratio_hi << "] over " << c_points << " points";
  v.require(a_ok == points, "(a) DE upper bound");
  v.require(b_points > 0 && b_ok == b_points, "(b) IE underestimates by >= 3 sigma");
  v.require(c_points > 0 && c_ok == c_points, "(c) f_3/DE_3 in [0.25, 1]");
}

void c8_witness(Verdict& v) {
  const CodeSpec code = CodeSpec::rsc(015, 013, 128);
  constexpr std::uint64_t n = 100'000;
  const double g = db_to_linear(1.5);
  const auto e = estimate_joint_errors(code, SnrSchedule({g, 0.0}), n, 808);
  const double p1 = e.marginal[0], p12 = e.f_hat[1];
  const double s = std::hypot(e.f_hat_stderr[1], 2 * p1 * e.marginal_stderr[0]);
  v.detail << "PER = " << p1 << ", #(E1&E2) = " << e.joint_count[1] << ", #(E2) = " << e.marginal_count[1]
           << ", P(E1,E2) - P(E1)^2 = " << p12 - p1 * p1 << " (" << (p12 - p1 * p1) / s << " sigma)";
  v.require(p1 >= 0.2 && p1 <= 0.8, "measured PER in [0.2, 0.8]");
  v.require(e.joint_count[1] == e.marginal_count[1], "#(E1&E2) == #(E2)");
  v.require(p12 - p1 * p1 >= 3 * s, "P(E1,E2) > P(E1)^2 by >= 3 sigma");
}

void c9_fading(Verdict& v) {
  const CodeSpec code = CodeSpec::rsc(015, 013, 128);
  constexpr std::uint64_t draws = 10'000, link = 20, per_trials = 20'000, ie_trials = 1'000'000;
  // Measured PER table, forced non-increasing, with PER(0) = 1.
  std::vector<double> grid;
  for (double db = -10.0; db <= 10.0 + 1e-9; db += 0.5) grid.push_back(db_to_linear(db));
  const auto curve = measure_per_curve(code, grid, per_trials, 909);
  std::vector<PerPoint> pts{{0.0, 1.0}};
  double running = 1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    running = std::min(running, curve[i].value);
    pts.push_back({grid[i], running});
  }
  const PerModel per = PerModel::table(pts);

  int checked = 0, ok = 0;
  double worst = 0.0;
  std::uint64_t stream = 0;
  for (double avg_db : {0.0, 3.0, 6.0, 9.0}) {
    const double avg = db_to_linear(avg_db);
    const auto exact = avg_failure_exact_mc_all(code, 3, avg, draws, link, derive_seed(909, 100 + stream));
    for (int k : {2, 3}) {
      const double de = avg_failure_de_numeric(per, k, avg);
      const auto ie = avg_failure_ie_mc(per, k, avg, ie_trials, derive_seed(909, 200 + 4 * stream + k));
      const McEstimate ex = exact[k - 1];
      const double vals[3] = {ex.value, de, ie.value}, ses[3] = {ex.std_error, 0.0, ie.std_error};
      v.detail << (checked ? "; " : "") << avg_db << "dB k=" << k << ": exact " << ex.value << ", DE " << de
               << ", IE " << ie.value;
      bool all = true;
      for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
          const double band = sigma3(ses[a], ses[b]) + 0.2 * std::max(vals[a], vals[b]);
          const double gap = std::abs(vals[a] - vals[b]);
          worst = std::max(worst, gap / band);
          all = all && gap <= band;
        }
      ++checked;
      ok += all;
    }
    ++stream;
  }
  v.detail << "; worst gap/band = " << worst;
  v.require(ok == checked, "all three averages within 3 sigma + 20%");
}

template <class F>
bool same_twice(F&& f) {
  return f(1u) == f(3u);
}

bool same(const McEstimate& a, const McEstimate& b) {
  return a.value == b.value && a.std_error == b.std_error && a.samples == b.samples;
}

void c10_determinism(Verdict& v) {
  const CodeSpec code = CodeSpec::rsc(015, 013, 64);
  const SnrSchedule sched({0.8, 0.5, 0.3});
  const PerModel per = PerModel::exponential_threshold(1.0, 1.0);
  const PepProblem prob{1.0, SnrSchedule({0.5, 1.0, 2.0})};
  std::vector<std::pair<std::string, bool>> checks;
  checks.emplace_back("pep_joint_mc", same_twice([&](unsigned w) {
                        const auto e = pep_joint_mc(prob, 300'000, 1, w);
                        return std::pair(pep_joint_mc_hits(prob, 300'000, 1, w), e.value);
                      }));
  checks.emplace_back("estimate_joint_errors", same_twice([&](unsigned w) {
                        const auto e = estimate_joint_errors(code, sched, 3000, 2, w);
                        return std::pair(e.joint_count, e.marginal_count);
                      }));
  checks.emplace_back("measure_per_curve", same_twice([&](unsigned w) {
                        std::vector<double> out;
                        for (const auto& e : measure_per_curve(code, std::vector<double>{0.5, 1.0}, 3000, 3, w))
                          out.insert(out.end(), {e.value, e.std_error});
                        return out;
                      }));
  checks.emplace_back("compare_error_models", same_twice([&](unsigned w) {
                        const auto c = compare_error_models(code, sched, 2000, 2000, 4, w);
                        std::vector<double> out = c.f_de;
                        out.insert(out.end(), c.f_ie.begin(), c.f_ie.end());
                        out.insert(out.end(), c.exact.f_hat.begin(), c.exact.f_hat.end());
                        return out;
                      }));
  checks.emplace_back("avg_failure_ie_mc", same_twice([&](unsigned w) {
                        const auto e = avg_failure_ie_mc(per, 3, 2.0, 200'000, 5, w);
                        return std::pair(e.value, e.std_error);
                      }));
  checks.emplace_back("avg_failure_exact_mc_all", same_twice([&](unsigned w) {
                        std::vector<double> out;
                        for (const auto& e : avg_failure_exact_mc_all(code, 2, 2.0, 200, 5, 6, w))
                          out.insert(out.end(), {e.value, e.std_error});
                        return out;
                      }));
  checks.emplace_back("avg_rounds_mc", same_twice([&](unsigned w) {
                        const auto e = avg_rounds_mc(per, 2.0, 200'000, 7, 1000, w);
                        return std::pair(e.value, e.std_error);
                      }));
  // Sequential sampler: rerun equality.
  checks.emplace_back("sample_error_sequence", [&] {
    const auto a = sample_error_sequence(ModelKind::IndependentErrors, per, sched, 3, 8);
    const auto b = sample_error_sequence(ModelKind::IndependentErrors, per, sched, 3, 8);
    return a.error_flags == b.error_flags && a.rounds_used == b.rounds_used;
  }());
  int ok = 0;
  for (const auto& [name, good] : checks) {
    ok += good;
    if (!good) v.require(false, name + " differs between worker counts");
  }
  v.detail << ok << "/" << checks.size() << " MC operations bit-identical with 1 vs 3 workers";
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria{
      {"PEP sandwich", c1_sandwich},
      {"upper bound attained by one-nonzero schedules", c2_upper_attainment},
      {"lower limit 2^-(k-1) as t grows", c3_lower_limit},
      {"quadrature vs Monte Carlo", c4_quadrature_vs_mc},
      {"random-walk lemmas", c5_lemmas},
      {"fading closed forms", c6_closed_forms},
      {"exact vs DE/IE link experiment", c7_link},
      {"non-independence witness", c8_witness},
      {"fading proximity", c9_fading},
      {"determinism across worker counts", c10_determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);

  int failed = 0;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[id - 1].second(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.pass;
    std::printf("CRITERION %2d %s: %s -- %s (%.1f s)\n", id, v.pass ? "PASS" : "FAIL", criteria[id - 1].first,
                v.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
