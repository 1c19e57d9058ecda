#include <benchmark/benchmark.h>

#include "apple/nn/adam.hpp"
#include "apple/nn/mlp.hpp"
#include "apple/rng.hpp"

using namespace apple;

namespace {

nn::Matrix random_batch(Rng& rng, int rows, int cols) {
    nn::Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform();
    return m;
}

/// Predictor-sized network (721 -> 128 -> 128 -> 21) over a batch.
void BM_MlpForward(benchmark::State& state) {
    Rng rng(1);
    const auto net = nn::Mlp::he_uniform({721, 128, 128, 21}, rng);
    const auto x = random_batch(rng, 721, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(net.forward_batch(x));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpForward)->Arg(1)->Arg(64);

void BM_MlpTrainStep(benchmark::State& state) {
    Rng rng(2);
    auto net = nn::Mlp::he_uniform({721, 128, 128, 21}, rng);
    nn::AdamState adam(net, {});
    const int batch = static_cast<int>(state.range(0));
    const auto x = random_batch(rng, 721, batch);
    const auto og = random_batch(rng, 21, batch);
    for (auto _ : state) {
        nn::Mlp::Tape tape;
        benchmark::DoNotOptimize(net.forward_batch(x, tape));
        nn::adam_step(net, net.backward(tape, og), adam);
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpTrainStep)->Arg(64);

}  // namespace
