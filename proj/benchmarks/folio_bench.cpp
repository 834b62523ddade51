#include <benchmark/benchmark.h>

#include "folio/autodiff.hpp"
#include "folio/environment.hpp"
#include "folio/policy.hpp"
#include "folio/rng.hpp"
#include "folio/synthetic.hpp"
#include "folio/trainer.hpp"

namespace {

folio::WeightVector random_simplex(std::size_t n, folio::Rng& rng) {
    std::vector<double> w(n + 1);
    double s = 0.0;
    for (auto& x : w) s += (x = -std::log(1.0 - rng.uniform01()));
    for (auto& x : w) x /= s;
    return folio::WeightVector::from_action(w);
}

folio::Market make_market(std::size_t n, std::size_t length, std::size_t window) {
    folio::SyntheticMarketSpec spec;
    for (std::size_t i = 0; i < n; ++i) spec.tickers.push_back("S" + std::to_string(i));
    spec.length = length;
    spec.seed = 7;
    auto series = folio::generate_synthetic(spec);
    return folio::Market(folio::align_assets(series, folio::AlignmentPolicy::intersect),
                         folio::NormalizationScheme::last_close(), window, 0.0025, 1.0);
}

void BM_TransactionFactor(benchmark::State& state) {
    folio::Rng rng(1);
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto from = random_simplex(n, rng);
    const auto to = random_simplex(n, rng);
    for (auto _ : state) benchmark::DoNotOptimize(folio::transaction_factor(from, to, 0.0025));
}
BENCHMARK(BM_TransactionFactor)->Arg(3)->Arg(11);

void BM_Conv1dForwardBackward(benchmark::State& state) {
    const std::size_t n = 11, t = 50;
    folio::Rng rng(2);
    folio::ad::Tensor input({3, n, t}), kernels({2, 3, 3});
    for (auto& x : input.storage()) x = rng.uniform(0.5, 1.5);
    for (auto& x : kernels.storage()) x = rng.uniform(-0.5, 0.5);
    for (auto _ : state) {
        folio::ad::Tape tape;
        auto out = folio::ad::sum(folio::ad::conv1d_over_time(tape.constant(input), tape.variable(kernels)));
        tape.backward(out);
        benchmark::DoNotOptimize(out.value());
    }
}
BENCHMARK(BM_Conv1dForwardBackward);

void BM_PolicyForward(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto market = make_market(n, 200, 50);
    const auto params = folio::init_policy(n, 50, 3);
    const auto s = market.state_at(100);
    const auto last = folio::WeightVector::uniform(n);
    for (auto _ : state) benchmark::DoNotOptimize(folio::policy_forward(params, s, last));
}
BENCHMARK(BM_PolicyForward)->Arg(3)->Arg(11);

void BM_TrainStep(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto batch = static_cast<std::size_t>(state.range(1));
    folio::TrainerConfig cfg;
    cfg.batch_size = batch;
    folio::Trainer trainer(make_market(n, 600, 50), folio::init_policy(n, 50, 4), cfg, 4);
    trainer.fill_buffer();
    for (auto _ : state) benchmark::DoNotOptimize(trainer.train_step());
}
BENCHMARK(BM_TrainStep)->Args({3, 50})->Args({11, 200})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
