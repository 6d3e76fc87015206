#include <benchmark/benchmark.h>

#include <random>

#include "rainfree/blur_gradient.hpp"
#include "rainfree/metrics.hpp"
#include "rainfree/networks.hpp"
#include "rainfree/ops.hpp"

using namespace rainfree;

namespace {

Tensor noise(Shape s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0F, 1.0F);
  Tensor t(s);
  for (float& v : t.data()) v = u(rng);
  return t;
}

void BM_Conv3x3Forward(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const int ch = static_cast<int>(state.range(1));
  const ag::Var x = ag::constant(noise({1, ch, side, side}, 1));
  const ag::Var w = ag::constant(noise({ch, ch, 3, 3}, 2));
  const ag::Var b = ag::constant(Tensor({1, ch, 1, 1}));
  for (auto _ : state) benchmark::DoNotOptimize(ag::conv2d(x, w, b, {1, 1, ag::PadMode::kReflect}));
}
BENCHMARK(BM_Conv3x3Forward)->Args({64, 16})->Args({64, 64})->Args({128, 32});

void BM_Conv3x3ForwardBackward(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const int ch = static_cast<int>(state.range(1));
  const Tensor xv = noise({1, ch, side, side}, 1);
  const ag::Var w = ag::parameter(noise({ch, ch, 3, 3}, 2));
  const ag::Var b = ag::parameter(Tensor({1, ch, 1, 1}));
  for (auto _ : state) {
    const ag::Var x = ag::parameter(xv);
    const ag::Var y = ag::conv2d(x, w, b, {1, 1, ag::PadMode::kReflect});
    ag::backward(ag::mean_abs_diff(y, ag::constant(Tensor(y.shape()))));
  }
}
BENCHMARK(BM_Conv3x3ForwardBackward)->Args({64, 16})->Args({64, 64});

void BM_GeneratorForward(benchmark::State& state) {
  NetworkConfig cfg;
  cfg.base_channels = static_cast<int>(state.range(1));
  Generator g(cfg, GeneratorRole::kDerain);
  init_weights(g, 1);
  const Tensor x = noise({1, 3, static_cast<int>(state.range(0)), static_cast<int>(state.range(0))}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(g.infer(x));
}
BENCHMARK(BM_GeneratorForward)->Args({64, 16})->Args({64, 64})->Args({256, 16})->Unit(benchmark::kMillisecond);

void BM_GaussianBlur(benchmark::State& state) {
  const Tensor x = noise({1, 3, static_cast<int>(state.range(0)), static_cast<int>(state.range(0))}, 4);
  const double sigma = static_cast<double>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_blur(x, sigma));
}
BENCHMARK(BM_GaussianBlur)->Args({64, 3})->Args({64, 9})->Args({512, 9});

void BM_BackgroundGuidanceGrad(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Tensor r = noise({1, 3, side, side}, 5);
  const Tensor d = noise({1, 3, side, side}, 6);
  for (auto _ : state) benchmark::DoNotOptimize(background_guidance_loss_grad(r, d));
}
BENCHMARK(BM_BackgroundGuidanceGrad)->Arg(64)->Arg(256);

void BM_Ssim(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Tensor a = noise({1, 3, side, side}, 7);
  const Tensor b = noise({1, 3, side, side}, 8);
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(64)->Arg(512);

void BM_Psnr(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const Tensor a = noise({1, 3, side, side}, 9);
  const Tensor b = noise({1, 3, side, side}, 10);
  for (auto _ : state) benchmark::DoNotOptimize(psnr(a, b));
}
BENCHMARK(BM_Psnr)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
