#include <benchmark/benchmark.h>

#include "qpr/kernel.hpp"
#include "qpr/observables.hpp"
#include "qpr/pauli.hpp"
#include "qpr/ptdist.hpp"
#include "qpr/rng.hpp"
#include "qpr/shadows.hpp"
#include "qpr/statevec.hpp"
#include "qpr/varcirc.hpp"

namespace {

qpr::StateVector random_state(int n, uint64_t seed) {
    qpr::Rng rng(seed);
    qpr::StateVector psi;
    psi.n = n;
    psi.amps.resize(std::size_t(1) << n);
    for (auto& a : psi.amps) a = qpr::cplx(rng.gaussian(), rng.gaussian());
    psi.normalize();
    return psi;
}

void BM_ApplyHamiltonian(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const qpr::Hamiltonian h = qpr::build_cluster_chain(n, 1.0, 0.3, 0.2);
    const qpr::StateVector v = random_state(n, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qpr::apply_hamiltonian(h, v));
    }
}
BENCHMARK(BM_ApplyHamiltonian)->Arg(8)->Arg(10)->Arg(12)->Arg(14);

void BM_LanczosGroundState(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const qpr::Hamiltonian h = qpr::build_cluster_chain(n, 1.0, 0.3, 0.2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qpr::lanczos_ground_state(h, 1e-10, 500, 3));
    }
}
BENCHMARK(BM_LanczosGroundState)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_ExactKernelPair(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const qpr::StateVector a = random_state(n, 1);
    const qpr::StateVector b = random_state(n, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qpr::exact_kernel(a, b));
    }
}
BENCHMARK(BM_ExactKernelPair)->Arg(10)->Arg(12)->Arg(14);

void BM_SwapTestEstimate(benchmark::State& state) {
    const qpr::StateVector a = random_state(6, 1);
    const qpr::StateVector b = random_state(6, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qpr::swap_test_estimate(a, b, state.range(0), 7));
    }
}
BENCHMARK(BM_SwapTestEstimate)->Arg(128)->Arg(10000);

void BM_BrickworkApply(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const qpr::VariationalCircuit c =
        qpr::make_random_circuit(qpr::make_brickwork(n, n), 1.0, 5);
    const qpr::StateVector in = qpr::StateVector::zero_state(n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qpr::apply_circuit(c, in));
    }
}
BENCHMARK(BM_BrickworkApply)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_ShadowKernelPair(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    const qpr::ShadowRecord r1 = qpr::sample_shadows(random_state(10, 1), T, 3);
    const qpr::ShadowRecord r2 = qpr::sample_shadows(random_state(10, 2), T, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qpr::shadow_kernel(r1, r2, {}));
    }
}
BENCHMARK(BM_ShadowKernelPair)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_PartialReflection(benchmark::State& state) {
    const qpr::Hamiltonian h = qpr::build_bond_alternating_xxz(12, 0.5, 1.0, 0.5);
    const qpr::StateVector psi = qpr::lanczos_ground_state(h, 1e-10, 500, 3).state;
    const qpr::IntervalSpec spec = qpr::centered_interval(12, 6);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qpr::partial_reflection_invariant(psi, spec));
    }
}
BENCHMARK(BM_PartialReflection);

void BM_PtTraceDistance(benchmark::State& state) {
    const qpr::StateVector psi = random_state(12, 9);
    for (auto _ : state) {
        benchmark::DoNotOptimize(qpr::pt_trace_distance(psi));
    }
}
BENCHMARK(BM_PtTraceDistance);

}  // namespace

BENCHMARK_MAIN();
