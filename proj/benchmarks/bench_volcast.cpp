#include <benchmark/benchmark.h>

#include <vector>

#include "volcast/dsvm.hpp"
#include "volcast/forecast.hpp"
#include "volcast/garch.hpp"
#include "volcast/nets.hpp"
#include "volcast/rng.hpp"
#include "volcast/train.hpp"

using namespace volcast;

namespace {

struct ElboFixture {
    dsvm::GenerativeParams theta;
    dsvm::InferenceParams phi;
    std::vector<double> returns;
    std::vector<Array> eta;

    explicit ElboFixture(int T) {
        dsvm::ModelConfig cfg;
        Rng rng(1);
        theta = dsvm::init_generative(cfg, rng);
        phi = dsvm::init_inference(cfg, rng);
        returns.resize(T);
        for (double& r : returns) r = 0.5 * rng.normal();
        eta = dsvm::draw_eta(T, cfg.d_z, rng);
    }
};

std::vector<double> garch_series(int n) {
    Rng rng(2);
    std::vector<double> r(n);
    double sigma2 = 0.05 / (1.0 - 0.1 - 0.85);
    for (double& x : r) {
        x = std::sqrt(sigma2) * rng.normal();
        sigma2 = 0.05 + 0.1 * x * x + 0.85 * sigma2;
    }
    return r;
}

}  // namespace

static void BM_ElboValuePlain(benchmark::State& state) {
    ElboFixture f(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(dsvm::elbo_value(f.theta, f.phi, f.returns, f.eta));
}
BENCHMARK(BM_ElboValuePlain)->Arg(10)->Arg(50);

static void BM_ElboTapeForwardBackward(benchmark::State& state) {
    ElboFixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        Tape tape;
        auto tv = dsvm::bind(tape, f.theta);
        auto pv = dsvm::bind(tape, f.phi);
        Var e = dsvm::elbo(tape, tv, pv, f.returns, f.eta);
        tape.backward(e);
        benchmark::DoNotOptimize(tv.f1.w1.adjoint()[0]);
    }
}
BENCHMARK(BM_ElboTapeForwardBackward)->Arg(10)->Arg(50);

static void BM_GruStepPlain(benchmark::State& state) {
    Rng rng(3);
    GruParams p = init_gru(3, 10, rng);
    Array h(10, 1), x(3, 1);
    for (int i = 0; i < 10; ++i) h[i] = rng.normal();
    for (int i = 0; i < 3; ++i) x[i] = rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(gru_step(p, h, x));
}
BENCHMARK(BM_GruStepPlain);

static void BM_GarchFilter(benchmark::State& state) {
    auto r = garch_series(static_cast<int>(state.range(0)));
    garch::Spec spec{garch::Variant::kGarch, 1, 1};
    garch::Params p{0.05, {0.1}, {}, {0.85}};
    for (auto _ : state) benchmark::DoNotOptimize(garch::filter(spec, p, r, 0.33));
}
BENCHMARK(BM_GarchFilter)->Arg(1000)->Arg(5000);

static void BM_GarchFit(benchmark::State& state) {
    auto r = garch_series(static_cast<int>(state.range(0)));
    garch::Spec spec{garch::Variant::kGarch, 1, 1};
    for (auto _ : state) benchmark::DoNotOptimize(garch::fit(spec, r, 42));
}
BENCHMARK(BM_GarchFit)->Unit(benchmark::kMillisecond)->Arg(1000);

static void BM_PredictOne(benchmark::State& state) {
    ElboFixture f(10);
    Rng rng(4);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            forecast::predict_one(f.theta, f.phi, f.returns, static_cast<int>(state.range(0)),
                                  rng));
}
BENCHMARK(BM_PredictOne)->Unit(benchmark::kMillisecond)->Arg(100)->Arg(1000);

BENCHMARK_MAIN();
