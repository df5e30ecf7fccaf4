#pragma once

#include <functional>

#include "markbench/audio_buffer.hpp"

namespace markbench::band {

/// Audio-to-audio processor running at a fixed native rate (a watermark
/// embedder, or a codec/denoiser plugin).
using Processor = std::function<AudioBuffer(const AudioBuffer&)>;
using Scorer = std::function<double(const AudioBuffer&)>;

inline constexpr std::size_t kCrossoverTaps = 255;
inline constexpr double kCrossoverBeta = 7.0;

/// Complementary linear-phase crossover at a given frequency: low + high
/// reconstructs the input exactly (both bands are delay-compensated).
struct Crossover {
  AudioBuffer low;
  AudioBuffer high;
};
Crossover split_bands(const AudioBuffer& buffer, double crossover_hz);

/// Wraps a native-rate processor so it can run on higher-rate audio:
///  1. split at the native Nyquist into complementary low and high bands,
///  2. resample the low band to the native rate and process it,
///  3. resample back, restore the native-rate RMS, and add the high band.
/// Output rate and length equal the input. At the native rate the processor
/// is called directly.
AudioBuffer process_banded(const Processor& inner, int native_rate, const AudioBuffer& buffer);

class BandedEmbedder {
 public:
  BandedEmbedder(Processor inner, int native_rate);

  [[nodiscard]] int native_rate() const { return native_rate_; }
  [[nodiscard]] double crossover_hz() const { return native_rate_ / 2.0; }

  [[nodiscard]] AudioBuffer embed(const AudioBuffer& buffer) const;

 private:
  Processor inner_;
  int native_rate_;
};

AudioBuffer embed_banded(const BandedEmbedder& embedder, const AudioBuffer& buffer);

/// Resamples to the native rate (discarding the un-watermarked high band)
/// and scores with the inner detector.
double detect_banded(const Scorer& detector, int native_rate, const AudioBuffer& buffer);

}  // namespace markbench::band
