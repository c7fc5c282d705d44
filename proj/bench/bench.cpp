// OpenMP kernels against their serial references.
//   ./build/bench/rem_bench --benchmark_filter=BruteForce
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>

#include "rem/assign.hpp"
#include "rem/sim.hpp"
#include "support/random_scenario.hpp"

using namespace rem;

namespace {

// Five nodes, `objects` objects: C(objects + 4, 4) splits to search.
Scenario brute_instance(std::int64_t objects) {
  Scenario s = remtest::table2();
  s.request.num_objects = objects;
  return s;
}

void BM_BruteForce(benchmark::State& state) {
  const Scenario s = brute_instance(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_optimal(s, s.node_ids(), 100'000'000));
  state.counters["splits"] = double(composition_count(state.range(0), 5));
}

void BM_BruteForceSerial(benchmark::State& state) {
  const Scenario s = brute_instance(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_optimal_serial(s, s.node_ids(), 100'000'000));
  state.counters["splits"] = double(composition_count(state.range(0), 5));
}

void BM_Compare(benchmark::State& state) {
  Scenario s = remtest::table2();
  s.request.num_objects = state.range(0);
  const auto cases = power_set_cases(s);
  for (auto _ : state) benchmark::DoNotOptimize(compare(s, cases));
}

void BM_CompareSerial(benchmark::State& state) {
  Scenario s = remtest::table2();
  s.request.num_objects = state.range(0);
  const auto cases = power_set_cases(s);
  for (auto _ : state) benchmark::DoNotOptimize(compare_serial(s, cases));
}

void BM_RemAssign(benchmark::State& state) {
  std::mt19937_64 rng(1);
  remtest::RandomScenarioShape shape;
  shape.min_nodes = shape.max_nodes = 5;
  shape.min_objects = shape.max_objects = state.range(0);
  const Scenario s = remtest::random_scenario(rng, shape);
  for (auto _ : state) benchmark::DoNotOptimize(rem_assign(s, s.node_ids()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_BruteForce)->Arg(12)->Arg(25)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BruteForceSerial)->Arg(12)->Arg(25)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Compare)->Arg(25)->Arg(100)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_CompareSerial)->Arg(25)->Arg(100)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RemAssign)->Arg(25)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
