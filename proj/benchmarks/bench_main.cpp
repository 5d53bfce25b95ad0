#include "csc/curvature.hpp"
#include "csc/glue.hpp"
#include "csc/jacobi.hpp"
#include "csc/linear_solver.hpp"

#include <benchmark/benchmark.h>

using namespace csc;

static void BM_OrbitIntegration(benchmark::State& state) {
    for (auto _ : state) {
        DelaunayOrbit orb = integrate_orbit({Dimension(3), 0.5, 0.0});
        benchmark::DoNotOptimize(orb.period);
    }
}
BENCHMARK(BM_OrbitIntegration)->Unit(benchmark::kMillisecond);

static void BM_OrbitEval(benchmark::State& state) {
    DelaunayOrbit orb = integrate_orbit({Dimension(3), 0.5, 0.0});
    double t = 0.0;
    for (auto _ : state) {
        t += 0.37;
        benchmark::DoNotOptimize(orb.eval(t));
    }
}
BENCHMARK(BM_OrbitEval);

static void BM_Monodromy(benchmark::State& state) {
    DelaunayOrbit orb = integrate_orbit({Dimension(3), 0.5, 0.0});
    const int k = int(state.range(0));
    for (auto _ : state) {
        auto M = monodromy(orb, ModeIndex{k});
        benchmark::DoNotOptimize(M[0]);
    }
}
BENCHMARK(BM_Monodromy)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_GlueBuild(benchmark::State& state) {
    GlueConfig cfg;
    cfg.m = int(state.range(0));
    cfg.end1.tails = {{2, +1, 1e-3}};
    cfg.end2.tails = {{2, +1, 1e-3}};
    for (auto _ : state) {
        ApproximateSolution as = build_approximate_factor(cfg);
        benchmark::DoNotOptimize(as.R);
    }
}
BENCHMARK(BM_GlueBuild)->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_PsiEvaluation(benchmark::State& state) {
    GlueConfig cfg;
    cfg.m = 4;
    cfg.end1.tails = {{2, +1, 1e-3}};
    cfg.end2.tails = {{2, +1, 1e-3}};
    ApproximateSolution as = build_approximate_factor(cfg);
    WeightedNormSpec spec{cfg.delta, as.R};
    for (auto _ : state) {
        PsiField pf = psi(as.bg, spec);
        benchmark::DoNotOptimize(pf.sup_norm);
    }
}
BENCHMARK(BM_PsiEvaluation)->Unit(benchmark::kMillisecond);

static void BM_ModeSolve(benchmark::State& state) {
    GlueConfig cfg;
    cfg.m = int(state.range(0));
    ApproximateSolution as = build_approximate_factor(cfg);
    const ZonalGrid& g = *as.grid;
    Eigen::VectorXd w0(g.Nt), psi0 = Eigen::VectorXd::Zero(g.Nt);
    for (int i = 0; i < g.Nt; ++i) w0(i) = as.orbit->eval(g.tnodes[std::size_t(i)]).first;
    SolverContext ctx(as.grid, as.orbit, as.R, w0, psi0, cfg.delta);
    Eigen::VectorXd rhs(g.Nt);
    for (int i = 0; i < g.Nt; ++i) {
        const double t = g.tnodes[std::size_t(i)];
        rhs(i) = std::exp(-t * t);
    }
    for (auto _ : state) {
        auto r = ctx.solve_mode(0, rhs, 1e-9);
        benchmark::DoNotOptimize(r.residual_norm);
    }
}
BENCHMARK(BM_ModeSolve)->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
