#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "nembrane/effective_model.hpp"
#include "nembrane/energy3d.hpp"
#include "nembrane/microstructure.hpp"
#include "nembrane/qtensor.hpp"
#include "nembrane/sym3.hpp"

using namespace nembrane;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

SymTensor3 random_sym(std::mt19937_64& rng, double scale) {
    SymTensor3 A;
    A.a11 = uniform(rng, -scale, scale);
    A.a22 = uniform(rng, -scale, scale);
    A.a33 = uniform(rng, -scale, scale);
    A.a12 = uniform(rng, -scale, scale);
    A.a13 = uniform(rng, -scale, scale);
    A.a23 = uniform(rng, -scale, scale);
    return A;
}

void BM_eig_sym3(benchmark::State& state) {
    std::mt19937_64 rng(11);
    std::vector<SymTensor3> inputs(256);
    for (auto& A : inputs) A = random_sym(rng, 1.0);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(eig_sym3(inputs[i]));
        i = (i + 1) % inputs.size();
    }
}
BENCHMARK(BM_eig_sym3);

void BM_project_weighted_cold(benchmark::State& state) {
    std::mt19937_64 rng(22);
    const MaterialParams mat(1.0, 1.0);
    std::vector<SymTensor3> inputs(256);
    for (auto& A : inputs) A = random_sym(rng, 1.2);
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(project_QB_weighted(inputs[i], mat));
        i = (i + 1) % inputs.size();
    }
}
BENCHMARK(BM_project_weighted_cold);

void BM_project_weighted_warm(benchmark::State& state) {
    std::mt19937_64 rng(33);
    const MaterialParams mat(1.0, 1.0);
    const SymTensor3 base = random_sym(rng, 1.2);
    SymTensor3 warm = project_QB_weighted(base, mat).t;
    double phase = 0.0;
    for (auto _ : state) {
        phase += 1e-3;
        SymTensor3 A = base;
        A.a13 += 1e-3 * phase;
        const QTensor Q = project_QB_weighted(A, mat, kOptimalityTol, kProjectionMaxIter, &warm);
        warm = Q.t;
        benchmark::DoNotOptimize(warm);
    }
}
BENCHMARK(BM_project_weighted_warm);

void BM_foundation_density(benchmark::State& state) {
    const MaterialParams mat(1.0, 1.0);
    double u = 0.0;
    for (auto _ : state) {
        u += 1e-3;
        benchmark::DoNotOptimize(foundation_density({1.0 + 0.1 * std::sin(u), 0.2}, mat));
    }
}
BENCHMARK(BM_foundation_density);

void BM_pattern_sample(benchmark::State& state) {
    const LaminateBasis basis = build_laminate_basis({-0.2, -0.05, 0.25});
    const PatternSampler sampler{basis, 4};
    std::mt19937_64 rng(44);
    std::vector<std::array<double, 3>> pts(1024);
    for (auto& p : pts)
        p = {uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sampler.sample(pts[i]));
        i = (i + 1) % pts.size();
    }
}
BENCHMARK(BM_pattern_sample);

void BM_mollified_sample(benchmark::State& state) {
    const LaminateBasis basis = build_laminate_basis({-0.2, -0.05, 0.25});
    const PatternSampler sampler{basis, 4};
    const MollifiedField mol = mollify_field(sampler, 0.2 * sampler.min_face_separation());
    std::mt19937_64 rng(55);
    std::vector<std::array<double, 3>> pts(1024);
    for (auto& p : pts)
        p = {uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mol.sample(pts[i]));
        i = (i + 1) % pts.size();
    }
}
BENCHMARK(BM_mollified_sample);

}  // namespace

BENCHMARK_MAIN();
