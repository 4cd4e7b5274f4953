#include <random>

#include <benchmark/benchmark.h>

#include "noksha/imaging/morphology.hpp"
#include "noksha/model/pix2pix.hpp"
#include "noksha/nn/ops.hpp"
#include "noksha/skeleton/skeleton.hpp"
#include "noksha/train/trainer.hpp"

namespace {

using namespace noksha;

imaging::BinaryImage strokes(int side) {
  imaging::BinaryImage img(side, side);
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> pos(side / 8, side - side / 8);
  for (int s = 0; s < 6; ++s) {
    const int x0 = pos(rng), y0 = pos(rng), x1 = pos(rng), y1 = pos(rng);
    for (int t = 0; t <= 400; ++t) {
      const int cx = x0 + (x1 - x0) * t / 400, cy = y0 + (y1 - y0) * t / 400;
      for (int dy = -4; dy <= 4; ++dy)
        for (int dx = -4; dx <= 4; ++dx)
          if (dx * dx + dy * dy <= 16 && cx + dx >= 0 && cx + dx < side && cy + dy >= 0 && cy + dy < side)
            img.set(cx + dx, cy + dy, true);
    }
  }
  return img;
}

void BM_Conv2d(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto ch = static_cast<std::size_t>(state.range(1));
  nn::CounterRng rng(1);
  const auto x = nn::Tensor::randn({1, ch, side, side}, rng);
  const auto w = nn::Tensor::randn({2 * ch, ch, 4, 4}, rng);
  nn::NoGradGuard ng;
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d(x, w, std::optional<nn::Tensor>{}, {2, 1}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(side * side / 4 * 2 * ch * ch * 16));
}
BENCHMARK(BM_Conv2d)->Args({128, 16})->Args({64, 64})->Args({16, 256})->Unit(benchmark::kMillisecond);

void BM_ConvTranspose2d(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto ch = static_cast<std::size_t>(state.range(1));
  nn::CounterRng rng(2);
  const auto x = nn::Tensor::randn({1, ch, side, side}, rng);
  const auto w = nn::Tensor::randn({ch, ch / 2, 4, 4}, rng);
  nn::NoGradGuard ng;
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv_transpose2d(x, w, std::optional<nn::Tensor>{}, {2, 1}));
}
BENCHMARK(BM_ConvTranspose2d)->Args({64, 32})->Args({16, 256})->Unit(benchmark::kMillisecond);

void BM_Skeletonize(benchmark::State& state) {
  const auto img = strokes(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(skeleton::skeletonize(img));
}
BENCHMARK(BM_Skeletonize)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Erode(benchmark::State& state) {
  const auto img = strokes(256);
  const auto se = imaging::StructuringElement::square(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(imaging::erode(img, se));
}
BENCHMARK(BM_Erode)->Arg(3)->Arg(7)->Unit(benchmark::kMicrosecond);

void BM_Close(benchmark::State& state) {
  const auto img = strokes(256);
  const auto se = imaging::StructuringElement::disk(2);
  for (auto _ : state) benchmark::DoNotOptimize(imaging::close(img, se));
}
BENCHMARK(BM_Close)->Unit(benchmark::kMicrosecond);

void BM_TrainStepTiny(benchmark::State& state) {
  auto session = train::TrainingSession::create(train::TrainConfig::tiny());
  nn::CounterRng rng(3);
  const auto cond = nn::Tensor::uniform({1, 3, 64, 64}, rng, -1.0F, 1.0F);
  const auto target = nn::Tensor::uniform({1, 3, 64, 64}, rng, -1.0F, 1.0F);
  for (auto _ : state) benchmark::DoNotOptimize(train::train_step(session, cond, target, rng));
}
BENCHMARK(BM_TrainStepTiny)->Unit(benchmark::kMillisecond);

void BM_GeneratorInference(benchmark::State& state) {
  model::GeneratorConfig cfg;
  cfg.base_filters = static_cast<int>(state.range(0));
  const model::Generator g(cfg, 1);
  const nn::Tensor x({1, 3, 256, 256});
  nn::NoGradGuard ng;
  for (auto _ : state) {
    nn::CounterRng rng(0);
    benchmark::DoNotOptimize(g.forward(x, model::Mode::kInfer, rng));
  }
}
BENCHMARK(BM_GeneratorInference)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
