// Copyright 2026 The kljnsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <vector>

#include "benchmark/benchmark.h"
#include "kljn/estimators.h"
#include "kljn/eve.h"
#include "kljn/loop_sim.h"
#include "kljn/noisegen.h"
#include "kljn/protocol.h"
#include "kljn/summary.h"

namespace kljn {
namespace {

void BM_Synthesize(benchmark::State& state) {
  SamplingSpec spec;
  spec.bit_period_s = state.range(0) / spec.sample_rate_hz;
  NoiseSource source{.resistance_ohm = 1e4, .temperature_k = 1e15};
  for (auto _ : state) {
    source.seed++;
    benchmark::DoNotOptimize(Synthesize(source, spec));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Synthesize)->Arg(4096)->Arg(1 << 16);

void BM_SimulateExchange(benchmark::State& state) {
  LoopConfig loop{.alice_ohm = 1e4, .bob_ohm = 1e5, .alice_k = 1e15,
                  .bob_k = 1e15, .wire_ohm = 1e3};
  SamplingSpec spec;
  uint64_t e = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(SimulateExchange(loop, spec, SeedsForExchange(1, e++)));
  }
}
BENCHMARK(BM_SimulateExchange);

void BM_MeasureAndQuantize(benchmark::State& state) {
  LoopConfig loop{.alice_ohm = 1e4, .bob_ohm = 1e5, .alice_k = 1e15,
                  .bob_k = 1e15};
  SamplingSpec spec;
  Trace trace = *SimulateExchange(loop, spec, SeedsForExchange(1, 0));
  SketchBasis basis(7, trace.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(Measure(trace.u_alice, trace.i_alice, spec, basis));
  }
}
BENCHMARK(BM_MeasureAndQuantize);

void BM_Psd(benchmark::State& state) {
  SamplingSpec spec;
  NoiseSource source{.resistance_ohm = 1e4, .temperature_k = 1e15, .seed = 3};
  std::vector<double> x = *Synthesize(source, spec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stats::Psd(x, spec.sample_rate_hz, 8));
  }
}
BENCHMARK(BM_Psd);

void BM_RunKeyExchange(benchmark::State& state) {
  SessionConfig config;
  config.wire_ohm = 1e3;
  DefenseConfig defense;
  RunOptions options;
  options.workers = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(RunKeyExchange(128, config, defense, options));
  }
  state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_RunKeyExchange)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_AttackSuite(benchmark::State& state) {
  SessionConfig config;
  config.wire_ohm = 1e3;
  eve::PublicParameters params = eve::PublicParameters::FromSession(config);
  LoopConfig loop{.alice_ohm = 1e4, .bob_ohm = 1e5, .alice_k = 1e15,
                  .bob_k = 1e15, .wire_ohm = 1e3};
  Trace trace = *SimulateExchange(loop, config.sampling, SeedsForExchange(1, 0));
  eve::EveView view = *eve::EveView::Create(0, trace, params);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eve::PassiveLevelAttack(view, 1));
    benchmark::DoNotOptimize(eve::ScheuerYarivAttack(view, 1));
    benchmark::DoNotOptimize(eve::HaoTemperatureAttack(view, 1));
    benchmark::DoNotOptimize(eve::HigherOrderCumulantAttack(view, 1));
  }
}
BENCHMARK(BM_AttackSuite);

}  // namespace
}  // namespace kljn

BENCHMARK_MAIN();
