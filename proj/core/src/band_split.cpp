#include "markbench/band_split.hpp"

#include <cmath>
#include <string>

#include "markbench/errors.hpp"
#include "markbench/filters.hpp"
#include "markbench/resample.hpp"

namespace markbench::band {

Crossover split_bands(const AudioBuffer& buffer, double crossover_hz) {
  const auto taps = dsp::fir_lowpass(kCrossoverTaps, crossover_hz, buffer.sample_rate(), kCrossoverBeta);
  const auto work = to_work(buffer.samples());
  auto low = dsp::fir_apply_centered(work, taps);
  std::vector<double> high(work.size());
  for (std::size_t i = 0; i < work.size(); ++i) high[i] = work[i] - low[i];
  return {AudioBuffer(to_samples(low), buffer.sample_rate()), AudioBuffer(to_samples(high), buffer.sample_rate())};
}

AudioBuffer process_banded(const Processor& inner, int native_rate, const AudioBuffer& buffer) {
  if (native_rate <= 0) throw ParameterError("native rate must be positive");
  if (buffer.sample_rate() == native_rate) return inner(buffer);
  if (buffer.sample_rate() < native_rate) {
    throw ParameterError("band split needs audio at >= the native rate (" + std::to_string(native_rate) +
                         " Hz), got " + std::to_string(buffer.sample_rate()) + " Hz");
  }
  const Crossover bands = split_bands(buffer, native_rate / 2.0);
  const AudioBuffer low_native = resample(bands.low, native_rate);
  AudioBuffer processed;
  try {
    processed = inner(low_native);
  } catch (const Error& e) {
    throw Error(std::string("band-split inner processor failed: ") + e.what());
  }
  if (processed.sample_rate() != native_rate) {
    processed = resample(processed, native_rate);
  }
  const AudioBuffer up = resample(processed, buffer.sample_rate());

  // Restore the level the processed low band had at the native rate.
  const double up_rms = up.rms();
  const double scale = up_rms > 0.0 ? processed.rms() / up_rms : 1.0;

  std::vector<double> out(buffer.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double low = i < up.size() ? up[i] * scale : 0.0;
    out[i] = low + bands.high[i];
  }
  return AudioBuffer(to_samples(out), buffer.sample_rate());
}

BandedEmbedder::BandedEmbedder(Processor inner, int native_rate) : inner_(std::move(inner)), native_rate_(native_rate) {
  if (native_rate <= 0) throw ParameterError("native rate must be positive");
}

AudioBuffer BandedEmbedder::embed(const AudioBuffer& buffer) const {
  return process_banded(inner_, native_rate_, buffer);
}

AudioBuffer embed_banded(const BandedEmbedder& embedder, const AudioBuffer& buffer) {
  return embedder.embed(buffer);
}

double detect_banded(const Scorer& detector, int native_rate, const AudioBuffer& buffer) {
  if (buffer.sample_rate() == native_rate) return detector(buffer);
  if (buffer.sample_rate() < native_rate) {
    throw ParameterError("banded detection needs audio at >= the native rate");
  }
  return detector(resample(buffer, native_rate));
}

}  // namespace markbench::band
