#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "markbench/audio_buffer.hpp"
#include "markbench/fft.hpp"

namespace markbench {

enum class WindowKind { hann };

/// Analysis parameters. Construction validates the constant-overlap-add
/// requirements: power-of-two fft size, hop dividing it, at least 50% overlap.
class StftParams {
 public:
  StftParams(std::size_t fft_size = 1024, std::size_t hop_size = 256, WindowKind window = WindowKind::hann);

  [[nodiscard]] std::size_t fft_size() const { return fft_size_; }
  [[nodiscard]] std::size_t hop_size() const { return hop_size_; }
  [[nodiscard]] WindowKind window() const { return window_; }
  [[nodiscard]] std::size_t bins() const { return fft_size_ / 2 + 1; }

  /// Periodic window of length fft_size().
  [[nodiscard]] std::vector<double> window_samples() const;

  friend bool operator==(const StftParams&, const StftParams&) = default;

 private:
  std::size_t fft_size_;
  std::size_t hop_size_;
  WindowKind window_;
};

/// Complex one-sided STFT, stored frame-major: at(frame, bin).
///
/// Frame f covers input samples [f*hop - (fft - hop), f*hop + hop), with
/// zeros outside the signal, so every sample is covered by fft/hop frames.
class Spectrogram {
 public:
  Spectrogram(StftParams params, int source_rate, std::size_t source_length, std::size_t frames);

  [[nodiscard]] const StftParams& params() const { return params_; }
  [[nodiscard]] int source_rate() const { return source_rate_; }
  [[nodiscard]] std::size_t source_length() const { return source_length_; }
  [[nodiscard]] std::size_t frames() const { return frames_; }
  [[nodiscard]] std::size_t bins() const { return params_.bins(); }

  Complex& at(std::size_t frame, std::size_t bin) { return data_[frame * bins() + bin]; }
  [[nodiscard]] const Complex& at(std::size_t frame, std::size_t bin) const { return data_[frame * bins() + bin]; }
  std::span<Complex> frame(std::size_t f) { return {data_.data() + f * bins(), bins()}; }
  [[nodiscard]] std::span<const Complex> frame(std::size_t f) const { return {data_.data() + f * bins(), bins()}; }

  /// Centre frequency of a bin in Hz.
  [[nodiscard]] double bin_hz(std::size_t bin) const;
  /// Index of the bin nearest to a frequency, clamped to the valid range.
  [[nodiscard]] std::size_t nearest_bin(double hz) const;

 private:
  StftParams params_;
  int source_rate_;
  std::size_t source_length_;
  std::size_t frames_;
  std::vector<Complex> data_;
};

Spectrogram stft(const AudioBuffer& buffer, const StftParams& params = {});
Spectrogram stft(std::span<const double> samples, int sample_rate, const StftParams& params = {});

/// Weighted overlap-add inverse; restores source_length() samples exactly.
AudioBuffer istft(const Spectrogram& spec);
std::vector<double> istft_work(const Spectrogram& spec);

/// Sum over frames of the squared analysis window at each sample, i.e. the
/// weighted overlap-add normalizer. Constant (fft * 3/8 / hop for Hann) on
/// fully covered samples.
double window_power_per_sample(const StftParams& params);

/// 10*log10(E[ref^2] / E[(test-ref)^2]). Returns +infinity when test == ref.
double measure_snr(const AudioBuffer& reference, const AudioBuffer& test);
double measure_snr(std::span<const float> reference, std::span<const float> test);

}  // namespace markbench
