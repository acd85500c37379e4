#include <benchmark/benchmark.h>

#include <vector>

#include "gresnet/layers.hpp"
#include "gresnet/model.hpp"
#include "gresnet/optimizer.hpp"
#include "gresnet/rng.hpp"

using namespace gresnet;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  return draw_uniform(rng, rows, cols, -1.0, 1.0);
}

void BM_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1);
  const Matrix b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}
BENCHMARK(BM_matmul)->Arg(50)->Arg(128)->Arg(512);

void BM_batch_matmul_mnist_input(benchmark::State& state) {
  // The dominant op of a training step: 128 x 784 times 784 x 50.
  const Matrix x = random_matrix(128, 784, 3);
  const Matrix w = random_matrix(784, 50, 4);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(x, w));
}
BENCHMARK(BM_batch_matmul_mnist_input);

void BM_gated_block_forward(benchmark::State& state) {
  Rng rng(5);
  GatedBlockParams p;
  p.l1.dense.W = draw_uniform(rng, 50, 50, -0.3, 0.3);
  p.l1.bn = BatchNormParams::make(50);
  p.l2.dense.W = draw_uniform(rng, 50, 50, -0.3, 0.3);
  p.l2.bn = BatchNormParams::make(50);
  const Matrix x = random_matrix(128, 50, 6);
  for (auto _ : state) benchmark::DoNotOptimize(gated_block_forward(x, p, Mode::train));
}
BENCHMARK(BM_gated_block_forward);

void BM_gated_block_backward(benchmark::State& state) {
  Rng rng(7);
  GatedBlockParams p;
  p.l1.dense.W = draw_uniform(rng, 50, 50, -0.3, 0.3);
  p.l1.bn = BatchNormParams::make(50);
  p.l2.dense.W = draw_uniform(rng, 50, 50, -0.3, 0.3);
  p.l2.bn = BatchNormParams::make(50);
  const Matrix x = random_matrix(128, 50, 8);
  const Matrix grad = random_matrix(128, 50, 9);
  const auto [u, cache] = gated_block_forward(x, p, Mode::train);
  for (auto _ : state) benchmark::DoNotOptimize(gated_block_backward(grad, p, cache));
}
BENCHMARK(BM_gated_block_backward);

void BM_training_step(benchmark::State& state) {
  // Full forward/backward/update on one 128-sample batch, gresnet of the
  // benchmarked depth at MNIST dimensions.
  NetworkConfig cfg;
  cfg.family = Family::gresnet;
  cfg.depth = static_cast<int>(state.range(0));
  cfg.seed = 11;
  Network net = build_network(cfg);
  AdamNesterov opt(AdamNesterovConfig{});
  auto params = learnable_params(net);

  Rng rng(12);
  const Matrix x = draw_uniform(rng, 128, 784, 0.0, 1.0);
  std::vector<int> labels(128);
  for (auto& l : labels) l = static_cast<int>(rng.below(10));

  for (auto _ : state) {
    const auto [logits, cache] = network_forward(net, x, Mode::train);
    benchmark::DoNotOptimize(softmax_xent_forward(logits, labels).first);
    const NetworkGrads grads = network_backward(net, cache, labels);
    opt.step(params, grad_views(net, grads));
  }
}
BENCHMARK(BM_training_step)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_inference(benchmark::State& state) {
  NetworkConfig cfg;
  cfg.family = Family::gresnet;
  cfg.depth = static_cast<int>(state.range(0));
  cfg.seed = 13;
  Network net = build_network(cfg);
  Rng rng(14);
  const Matrix x = draw_uniform(rng, 512, 784, 0.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(network_logits(net, x));
}
BENCHMARK(BM_inference)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
