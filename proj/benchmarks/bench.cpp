// Copyright 2026 The ltm-lab Authors
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


#include <benchmark/benchmark.h>

#include "ltm/experiments.hpp"
#include "ltm/gates.hpp"
#include "ltm/ltm.hpp"
#include "ltm/monte_carlo.hpp"
#include "ltm/spectral.hpp"
#include "ltm/variance.hpp"

namespace {

using namespace ltm;
namespace ex = ltm::experiments;

void BM_LtmExact(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    const Partition p = Partition::qubits(n);
    const Channel ch = Channel::mixture_with_replacement(0.2, ex::ghz_state(n), gates::crx_cascade(n, 0.5));
    for (auto _ : state) {
        benchmark::DoNotOptimize(ltm_exact(ch, true, p).entries.sum());
    }
}
BENCHMARK(BM_LtmExact)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

void BM_LtmStructured(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    const Partition p = Partition::qubits(n);
    const Channel ch = state.range(1) == 0 ? gates::cnot_double_cascade(n) : gates::crx_cascade(n, 0.5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ltm_structured(ch, true, p).entries.sum());
    }
}
BENCHMARK(BM_LtmStructured)->ArgsProduct({{4, 6, 8}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Decompose(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    const Partition p = Partition::qubits(n);
    const Ltm t = mixture_ltm(ltm_structured(gates::crx_cascade(n, 0.5), true, p), 0.1,
                              locality_vector(ex::ghz_state(n), p));
    for (auto _ : state) {
        benchmark::DoNotOptimize(decompose(t).q_radius);
    }
}
BENCHMARK(BM_Decompose)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_VarianceSequence(benchmark::State &state) {
    const int n = 6;
    const Partition p = Partition::qubits(n);
    const Ltm t = ltm_structured(gates::cnot_double_cascade(n), true, p);
    const LocalityVector lr = locality_vector(ex::ghz_state(n), p);
    const LocalityVector lh = locality_vector(ex::zz_chain(n, 1.0), p);
    for (auto _ : state) {
        benchmark::DoNotOptimize(variance_sequence(lr, t, lh, 0.0, static_cast<std::size_t>(state.range(0))).back());
    }
}
BENCHMARK(BM_VarianceSequence)->Arg(10)->Arg(100);

void BM_MonteCarlo(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    LayeredCircuitSpec spec;
    spec.partition = Partition::qubits(n);
    spec.layers = 4;
    spec.intermediate = {gates::crx_cascade(n, 0.5)};
    spec.observable = ex::zz_chain(n, 1.0);
    spec.initial_state = ex::ghz_state(n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimate_variance(spec, 1000, 1).variance);
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_MonteCarlo)->DenseRange(2, 6, 2)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
