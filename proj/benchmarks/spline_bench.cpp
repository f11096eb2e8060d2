#include "mqstab/quasi_interpolant.hpp"
#include "mqstab/spline.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace mqstab;

namespace {

void BM_EvalBasis(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const SplineSpace1D space = make_uniform_space(0.0, 1.0, 256, p);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (auto _ : state) {
        const BasisValues bv = eval_basis(space, unif(rng), 1);
        benchmark::DoNotOptimize(bv.values.data());
    }
}
BENCHMARK(BM_EvalBasis)->Arg(2)->Arg(3)->Arg(5);

void BM_ProlongationMatrix(benchmark::State& state) {
    const int ne = static_cast<int>(state.range(0));
    const SplineSpace1D fine = make_uniform_space(0.0, 1.0, ne, 3);
    const SplineSpace1D coarse = dyadic_coarsen(fine);
    for (auto _ : state) {
        const Eigen::MatrixXd P = prolongation_matrix(coarse, fine);
        benchmark::DoNotOptimize(P.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ProlongationMatrix)->RangeMultiplier(2)->Range(32, 512)->Complexity();

void BM_FluctuationApply(benchmark::State& state) {
    const int ne = static_cast<int>(state.range(0));
    const TensorSpace space({make_uniform_space(0.0, 1.0, ne, 3)});
    const MeshHierarchy hier = build_hierarchy(space, 3);
    const FluctuationOperator op(space, hier);
    std::mt19937 rng(2);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd v(space.dim());
    for (int i = 0; i < v.size(); ++i) v[i] = gauss(rng);
    for (auto _ : state) {
        const Eigen::VectorXd f = op.apply(2, v);
        benchmark::DoNotOptimize(f.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FluctuationApply)->RangeMultiplier(2)->Range(64, 512)->Complexity();

}  // namespace

BENCHMARK_MAIN();
