#include <benchmark/benchmark.h>

#include <vector>

#include "flexplan/datagen.hpp"
#include "flexplan/gbt.hpp"
#include "flexplan/gn_integral.hpp"
#include "flexplan/planner.hpp"
#include "flexplan/qot.hpp"
#include "flexplan/rng.hpp"

using namespace flexplan;

namespace {

// Shared fixture: one sampled spectrum and a small model trained on synthetic
// rows, so the predict path is representative (non-trivial trees).
struct Bench {
    PhysParams phys;
    Scenario scenario;
    GbtModel model;
    NliFeatureVector features{};

    Bench() {
        scenario = sample_scenario(17, 0, phys);
        DataMatrix train;
        train.width = kFeatureWidth;
        Rng rng(3);
        for (int i = 0; i < 2000; ++i) {
            std::vector<double> x(kFeatureWidth);
            for (auto& v : x) v = rng.uniform(-60.0, 60.0);
            train.add_row(x, 0.2 * x[0] + 0.05 * x[11] + 0.01 * x[24]);
        }
        GbtHyperParams hp;
        hp.n_trees = 400;
        auto fitted = GbtModel::fit(train, {}, hp, 1);
        model = std::move(fitted.first);
        SciCache cache;
        features = features_for("bench", scenario.link, scenario.spectrum,
                                (int)scenario.spectrum.size() / 2, cache,
                                [](const FiberLink&, const ChannelConfig&) { return -60.0; });
    }
};

Bench& fixture() {
    static Bench bench;
    return bench;
}

}  // namespace

static void BM_MlPredict(benchmark::State& state) {
    Bench& b = fixture();
    for (auto _ : state) {
        double eta = b.model.predict(b.features);
        benchmark::DoNotOptimize(eta);
    }
}
BENCHMARK(BM_MlPredict);

static void BM_GnClosedChannel(benchmark::State& state) {
    Bench& b = fixture();
    int cut = (int)b.scenario.spectrum.size() / 2;
    for (auto _ : state) {
        NoiseBreakdown nb = gn_closed_eta(b.scenario.link, b.scenario.spectrum, cut);
        benchmark::DoNotOptimize(nb);
    }
}
BENCHMARK(BM_GnClosedChannel);

static void BM_OracleSci(benchmark::State& state) {
    Bench& b = fixture();
    GnIntegralOracle oracle(b.scenario.link, QuadratureSpec{b.phys.quad_tol_db, b.phys.quad_resolution});
    std::vector<ChannelConfig> one = {b.scenario.spectrum[0]};
    for (auto _ : state) {
        double eta = oracle.eta_db(one, 0, NliMode::SciOnly);
        benchmark::DoNotOptimize(eta);
    }
}
BENCHMARK(BM_OracleSci);

static void BM_OracleTotalChannel(benchmark::State& state) {
    Bench& b = fixture();
    GnIntegralOracle oracle(b.scenario.link, QuadratureSpec{b.phys.quad_tol_db, b.phys.quad_resolution});
    int cut = (int)b.scenario.spectrum.size() / 2;
    for (auto _ : state) {
        double eta = oracle.eta_db(b.scenario.spectrum, cut, NliMode::Total);
        benchmark::DoNotOptimize(eta);
    }
}
BENCHMARK(BM_OracleTotalChannel);

static void BM_FeatureAssembly(benchmark::State& state) {
    Bench& b = fixture();
    SciCache cache;
    auto constant = [](const FiberLink&, const ChannelConfig&) { return -60.0; };
    int cut = (int)b.scenario.spectrum.size() / 2;
    for (auto _ : state) {
        auto v = features_for("bench", b.scenario.link, b.scenario.spectrum, cut, cache, constant);
        benchmark::DoNotOptimize(v);
    }
}
BENCHMARK(BM_FeatureAssembly);

BENCHMARK_MAIN();
