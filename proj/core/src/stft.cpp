#include "markbench/stft.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "markbench/errors.hpp"

namespace markbench {

StftParams::StftParams(std::size_t fft_size, std::size_t hop_size, WindowKind window)
    : fft_size_(fft_size), hop_size_(hop_size), window_(window) {
  if (!is_power_of_two(fft_size) || fft_size < 4) {
    throw ParameterError("STFT fft size must be a power of two >= 4, got " + std::to_string(fft_size));
  }
  if (hop_size == 0 || hop_size > fft_size / 2 || fft_size % hop_size != 0) {
    throw ParameterError("STFT hop " + std::to_string(hop_size) + " violates constant overlap-add for fft " +
                         std::to_string(fft_size) + " (hop must divide fft with >= 50% overlap)");
  }
}

std::vector<double> StftParams::window_samples() const {
  std::vector<double> w(fft_size_);
  for (std::size_t n = 0; n < fft_size_; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(fft_size_));
  }
  return w;
}

double window_power_per_sample(const StftParams& params) {
  double sum = 0.0;
  for (double v : params.window_samples()) sum += v * v;
  return sum / static_cast<double>(params.hop_size());
}

Spectrogram::Spectrogram(StftParams params, int source_rate, std::size_t source_length, std::size_t frames)
    : params_(params),
      source_rate_(source_rate),
      source_length_(source_length),
      frames_(frames),
      data_(frames * params.bins()) {}

double Spectrogram::bin_hz(std::size_t bin) const {
  return static_cast<double>(bin) * source_rate_ / static_cast<double>(params_.fft_size());
}

std::size_t Spectrogram::nearest_bin(double hz) const {
  const double b = std::round(hz * static_cast<double>(params_.fft_size()) / source_rate_);
  if (b <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(b), bins() - 1);
}

namespace {

std::size_t frame_count(std::size_t length, const StftParams& p) {
  // Frames start at f*hop - (fft - hop) and the last one must reach the end.
  return (length + p.hop_size() - 1) / p.hop_size() + (p.fft_size() / p.hop_size()) - 1;
}

}  // namespace

Spectrogram stft(std::span<const double> samples, int sample_rate, const StftParams& params) {
  const std::size_t n = params.fft_size();
  const std::size_t hop = params.hop_size();
  const std::size_t frames = samples.empty() ? 0 : frame_count(samples.size(), params);
  Spectrogram spec(params, sample_rate, samples.size(), frames);
  const Fft fft(n);
  const auto window = params.window_samples();
  std::vector<double> frame(n);
  const auto lead = static_cast<std::ptrdiff_t>(n - hop);
  const auto len = static_cast<std::ptrdiff_t>(samples.size());
  for (std::size_t f = 0; f < frames; ++f) {
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(f * hop) - lead;
    for (std::size_t i = 0; i < n; ++i) {
      const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(i);
      frame[i] = (idx >= 0 && idx < len) ? samples[static_cast<std::size_t>(idx)] * window[i] : 0.0;
    }
    fft.forward_real(frame, spec.frame(f));
  }
  return spec;
}

Spectrogram stft(const AudioBuffer& buffer, const StftParams& params) {
  const auto work = to_work(buffer.samples());
  return stft(work, buffer.sample_rate(), params);
}

std::vector<double> istft_work(const Spectrogram& spec) {
  const StftParams& params = spec.params();
  const std::size_t n = params.fft_size();
  const std::size_t hop = params.hop_size();
  const auto len = static_cast<std::ptrdiff_t>(spec.source_length());
  std::vector<double> out(spec.source_length(), 0.0);
  std::vector<double> norm(spec.source_length(), 0.0);
  const Fft fft(n);
  const auto window = params.window_samples();
  std::vector<double> frame(n);
  const auto lead = static_cast<std::ptrdiff_t>(n - hop);
  for (std::size_t f = 0; f < spec.frames(); ++f) {
    fft.inverse_real(spec.frame(f), frame);
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(f * hop) - lead;
    for (std::size_t i = 0; i < n; ++i) {
      const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(i);
      if (idx < 0 || idx >= len) continue;
      out[static_cast<std::size_t>(idx)] += frame[i] * window[i];
      norm[static_cast<std::size_t>(idx)] += window[i] * window[i];
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (norm[i] > 1e-12) out[i] /= norm[i];
  }
  return out;
}

AudioBuffer istft(const Spectrogram& spec) {
  return AudioBuffer(to_samples(istft_work(spec)), spec.source_rate());
}

double measure_snr(std::span<const float> reference, std::span<const float> test) {
  if (reference.size() != test.size()) {
    throw ParameterError("measure_snr: length mismatch (" + std::to_string(reference.size()) + " vs " +
                         std::to_string(test.size()) + ")");
  }
  double signal = 0.0;
  double noise = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double r = reference[i];
    const double d = static_cast<double>(test[i]) - r;
    signal += r * r;
    noise += d * d;
  }
  if (signal <= 0.0) throw UndefinedSnrError("measure_snr: reference has zero energy");
  if (noise == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / noise);
}

double measure_snr(const AudioBuffer& reference, const AudioBuffer& test) {
  if (reference.sample_rate() != test.sample_rate()) {
    throw ParameterError("measure_snr: sample rate mismatch");
  }
  return measure_snr(reference.samples(), test.samples());
}

}  // namespace markbench
