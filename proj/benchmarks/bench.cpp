#include <benchmark/benchmark.h>

#include <random>

#include "harqerr/conv_code.hpp"
#include "harqerr/parallel.hpp"
#include "harqerr/pep.hpp"
#include "harqerr/phy_sim.hpp"

using namespace harqerr;

static void BM_ViterbiDecode(benchmark::State& state) {
  const CodeSpec code = CodeSpec::rsc(015, 013, static_cast<int>(state.range(0)));
  const ViterbiDecoder dec(code);
  Engine e = make_engine(1, 0);
  std::normal_distribution<double> noise;
  std::vector<double> w(code.coded_bits());
  for (auto& x : w) x = 1.0 + noise(e);
  for (auto _ : state) benchmark::DoNotOptimize(dec.decode(w));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ViterbiDecode)->Arg(128)->Arg(512);

static void BM_PepJoint(benchmark::State& state) {
  std::vector<double> s;
  for (int l = 0; l < state.range(0); ++l) s.push_back(0.5 * (l + 1));
  const PepProblem p{1.0, SnrSchedule(s)};
  for (auto _ : state) benchmark::DoNotOptimize(pep_joint(p));
}
BENCHMARK(BM_PepJoint)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

static void BM_LinkTrial(benchmark::State& state) {
  const CodeSpec code;
  const SnrSchedule sched({1.0, 0.5});
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_joint_errors(code, sched, 1, ++seed, 1));
}
BENCHMARK(BM_LinkTrial)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
