#include <benchmark/benchmark.h>

#include "markbench/corpus.hpp"
#include "markbench/denoise.hpp"
#include "markbench/evaluate.hpp"
#include "markbench/watermark.hpp"

namespace {

using namespace markbench;

const wm::WatermarkKey kKey{42};

void BM_Embed16k(benchmark::State& state) {
  AudioBuffer clip = corpus::synthesize_clip(0, 5.0, 16000, 1);
  for (auto _ : state) benchmark::DoNotOptimize(wm::embed(clip, kKey));
}
BENCHMARK(BM_Embed16k)->Unit(benchmark::kMillisecond);

void BM_Detect16k(benchmark::State& state) {
  AudioBuffer marked = wm::embed(corpus::synthesize_clip(0, 5.0, 16000, 1), kKey);
  for (auto _ : state) benchmark::DoNotOptimize(wm::detect(marked, kKey));
}
BENCHMARK(BM_Detect16k)->Unit(benchmark::kMillisecond);

// Full-band clip: band-split, embed at 16 kHz, recombine.
void BM_EmbedBanded44k(benchmark::State& state) {
  AudioBuffer clip = corpus::synthesize_clip(0, 5.0, 44100, 1);
  eval::WatermarkSpec spec{"ss", eval::BuiltinWatermark{kKey}, std::nullopt};
  auto runner = eval::make_runner(spec, 44100, 0);
  for (auto _ : state) benchmark::DoNotOptimize(runner.embed(clip));
}
BENCHMARK(BM_EmbedBanded44k)->Unit(benchmark::kMillisecond);

void BM_DenoiseAttack(benchmark::State& state) {
  AudioBuffer clip = corpus::synthesize_clip(0, 5.0, 44100, 1);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(attack::denoise_attack(clip, 10.0, attack::Denoiser{}, seed++));
}
BENCHMARK(BM_DenoiseAttack)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
