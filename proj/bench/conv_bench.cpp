// Serial reference kernels against the OpenMP kernels on the layer shapes of
// the dilated model (batch 32, 512 samples).

#include <benchmark/benchmark.h>

#include <vector>

#include "blw/kernels.hpp"
#include "blw/layers.hpp"
#include "blw/model.hpp"
#include "blw/rng.hpp"

using namespace blw;

namespace {

constexpr std::size_t kBatch = 32;

struct Case {
    ConvParams params;
    Tensor input;
    Tensor upstream;
};

// args: in channels, out channels, kernel, dilation.
Case make_case(const benchmark::State& state) {
    Rng rng(1);
    Case c;
    const auto cin = static_cast<std::size_t>(state.range(0));
    const auto cout = static_cast<std::size_t>(state.range(1));
    c.params = ConvParams::zeros(cout, cin, static_cast<std::size_t>(state.range(2)),
                                 static_cast<std::size_t>(state.range(3)));
    for (double& w : c.params.weights) w = rng.uniform(-0.1, 0.1);
    c.input = Tensor({kBatch, cin, kBeatLength});
    for (double& v : c.input.values()) v = rng.uniform(-1, 1);
    c.upstream = Tensor({kBatch, cout, kBeatLength});
    for (double& v : c.upstream.values()) v = rng.uniform(-1, 1);
    return c;
}

void set_macs(benchmark::State& state, const ConvParams& p, double passes) {
    const double macs = passes * static_cast<double>(kBatch * kBeatLength * p.weights.size());
    state.counters["MAC/s"] = benchmark::Counter(macs, benchmark::Counter::kIsIterationInvariantRate);
}

void forward(benchmark::State& state, Backend backend) {
    const Case c = make_case(state);
    for (auto _ : state) benchmark::DoNotOptimize(conv1d(c.input, c.params, backend));
    set_macs(state, c.params, 1);
}

void backward(benchmark::State& state, Backend backend) {
    const Case c = make_case(state);
    for (auto _ : state) benchmark::DoNotOptimize(conv1d_backward(c.input, c.params, c.upstream, backend));
    set_macs(state, c.params, 2);
}

void model_forward(benchmark::State& state) {
    ModelGraph m = build_model(ModelKind::deepfilter);
    Rng rng(2);
    initialize_weights(m, rng);
    Tensor x({static_cast<std::size_t>(state.range(0)), 1, kBeatLength});
    for (double& v : x.values()) v = rng.uniform(-1, 1);
    for (auto _ : state) benchmark::DoNotOptimize(forward(m, x));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

// First-layer branch, a wide middle branch (plain and dilated) and the head.
void shapes(benchmark::internal::Benchmark* b) {
    b->Args({1, 8, 15, 0})->Args({64, 8, 9, 0})->Args({64, 8, 9, 3})->Args({64, 8, 15, 3})->Args({16, 1, 9, 0});
    b->ArgNames({"cin", "cout", "k", "r"})->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK_CAPTURE(forward, reference, Backend::reference)->Apply(shapes);
BENCHMARK_CAPTURE(forward, parallel, Backend::parallel)->Apply(shapes);
BENCHMARK_CAPTURE(backward, reference, Backend::reference)->Apply(shapes);
BENCHMARK_CAPTURE(backward, parallel, Backend::parallel)->Apply(shapes);
BENCHMARK(model_forward)->Arg(1)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
