#pragma once

#include <cstdint>
#include <vector>

#include "markbench/audio_buffer.hpp"
#include "markbench/stft.hpp"

namespace markbench::wm {

/// Secret and embedding settings of the built-in spread-spectrum watermark.
struct WatermarkKey {
  std::uint64_t key = 0;
  double band_lo = 300.0;   // Hz
  double band_hi = 3400.0;  // Hz
  double strength_db = -30.0;  // target watermark-to-signal ratio

  /// Throws ParameterError unless 0 < band_lo < band_hi <= native Nyquist and strength_db < 0.
  void validate(int native_rate) const;

  friend bool operator==(const WatermarkKey&, const WatermarkKey&) = default;
};

/// Layout of the pseudorandom pattern on the STFT grid. The +-1 pattern is
/// constant over chips of `chip_bins` x `chip_frames` cells and repeats
/// every `period_frames` frames.
struct PatternLayout {
  std::size_t chip_bins = 4;
  std::size_t chip_frames = 4;
  std::size_t period_frames = 32;
};

/// Default analysis grid at 16 kHz: 16 ms windows, 4 ms hop. Short windows
/// leave harmonics unresolved, so the log spectrum follows the smooth vocal
/// envelope and varies little between frames.
inline StftParams default_watermark_stft() { return StftParams(256, 64); }

/// Spread-spectrum watermark acting on the log-magnitude spectrogram.
///
/// Embedding adds alpha * P to log|X| for bins inside [band_lo, band_hi],
/// where P is the key's +-1 chip pattern tiled over frames, and resynthesizes
/// with the original phase. alpha is solved so the perturbation sits at
/// strength_db relative to the signal.
///
/// Detection whitens log|Y| by subtracting, per bin, its temporal mean over
/// a sliding window of +-kWhiteningRadius frames (silent frames are masked
/// out), folds frames onto the pattern period, and returns the best
/// normalized correlation with P over all period offsets.
class SpreadSpectrumWatermark {
 public:
  static constexpr int kDefaultNativeRate = 16000;
  static constexpr std::size_t kWhiteningRadius = 4;
  /// Frames whose in-band energy is below this fraction of the clip's mean
  /// frame energy are treated as silence.
  static constexpr double kSilenceRatio = 1e-6;

  explicit SpreadSpectrumWatermark(int native_rate = kDefaultNativeRate, StftParams params = default_watermark_stft(),
                                   PatternLayout layout = {});

  [[nodiscard]] int native_rate() const { return native_rate_; }
  [[nodiscard]] const StftParams& params() const { return params_; }
  [[nodiscard]] const PatternLayout& layout() const { return layout_; }

  [[nodiscard]] AudioBuffer embed(const AudioBuffer& buffer, const WatermarkKey& key) const;
  [[nodiscard]] double detect(const AudioBuffer& buffer, const WatermarkKey& key) const;

  /// +-1 chip value for (bin index within the band, frame phase within the period).
  [[nodiscard]] int pattern(const WatermarkKey& key, std::size_t band_bin, std::size_t frame_phase) const;

 private:
  struct Band {
    std::size_t first = 0;
    std::size_t count = 0;
  };
  [[nodiscard]] Band band_bins(const WatermarkKey& key) const;
  void check_input(const AudioBuffer& buffer, const WatermarkKey& key) const;

  int native_rate_;
  StftParams params_;
  PatternLayout layout_;
};

/// Convenience wrappers around a default-configured watermark (16 kHz).
AudioBuffer embed(const AudioBuffer& buffer, const WatermarkKey& key);
double detect(const AudioBuffer& buffer, const WatermarkKey& key);

}  // namespace markbench::wm
