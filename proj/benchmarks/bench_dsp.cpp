#include <benchmark/benchmark.h>

#include <vector>

#include "markbench/corpus.hpp"
#include "markbench/fft.hpp"
#include "markbench/resample.hpp"
#include "markbench/rng.hpp"
#include "markbench/stft.hpp"
#include "markbench/transforms.hpp"

namespace {

using namespace markbench;

AudioBuffer speech(int rate, double seconds = 5.0) { return corpus::synthesize_clip(0, seconds, rate, 1); }

void BM_FftForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Fft fft(n);
  CounterRng rng(3);
  std::vector<Complex> data(n);
  for (auto& c : data) c = {rng.uniform() - 0.5, rng.uniform() - 0.5};
  for (auto _ : state) {
    fft.forward(data);
    benchmark::DoNotOptimize(data.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_FftForward)->RangeMultiplier(4)->Range(256, 16384);

void BM_StftRoundTrip(benchmark::State& state) {
  AudioBuffer clip = speech(16000);
  StftParams params(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0) / 4));
  for (auto _ : state) benchmark::DoNotOptimize(istft(stft(clip, params)));
}
BENCHMARK(BM_StftRoundTrip)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_Resample(benchmark::State& state) {
  AudioBuffer clip = speech(static_cast<int>(state.range(0)));
  const int target = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(resample(clip, target));
}
BENCHMARK(BM_Resample)->Args({44100, 16000})->Args({16000, 44100})->Args({48000, 16000})->Unit(benchmark::kMillisecond);

void BM_SynthesizeClip(benchmark::State& state) {
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(corpus::synthesize_clip(i++, 5.0, 44100, 7));
}
BENCHMARK(BM_SynthesizeClip)->Unit(benchmark::kMillisecond);

void BM_PitchShift(benchmark::State& state) {
  AudioBuffer clip = speech(16000);
  for (auto _ : state) benchmark::DoNotOptimize(dsp::pitch_shift(clip, 2.0));
}
BENCHMARK(BM_PitchShift)->Unit(benchmark::kMillisecond);

}  // namespace
