#include "markbench/watermark.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "markbench/errors.hpp"
#include "markbench/rng.hpp"

namespace markbench::wm {
namespace {

constexpr double kInitialAlpha = 0.05;
constexpr int kMaxSolveIterations = 8;
constexpr double kSolveToleranceDb = 0.01;
constexpr double kLogFloor = 1e-12;

double energy(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

}  // namespace

void WatermarkKey::validate(int native_rate) const {
  const double nyquist = native_rate / 2.0;
  if (!(band_lo > 0.0 && band_lo < band_hi && band_hi <= nyquist)) {
    throw ParameterError("watermark band [" + std::to_string(band_lo) + ", " + std::to_string(band_hi) +
                         "] Hz must satisfy 0 < lo < hi <= " + std::to_string(nyquist));
  }
  if (!(strength_db < 0.0) || !std::isfinite(strength_db)) {
    throw ParameterError("watermark strength must be a finite negative dB value");
  }
}

SpreadSpectrumWatermark::SpreadSpectrumWatermark(int native_rate, StftParams params, PatternLayout layout)
    : native_rate_(native_rate), params_(params), layout_(layout) {
  if (native_rate <= 0) throw ParameterError("native rate must be positive");
  if (layout.chip_bins == 0 || layout.chip_frames == 0 || layout.period_frames == 0 ||
      layout.period_frames % layout.chip_frames != 0) {
    throw ParameterError("pattern period must be a positive multiple of the chip length");
  }
}

SpreadSpectrumWatermark::Band SpreadSpectrumWatermark::band_bins(const WatermarkKey& key) const {
  const double bin_hz = static_cast<double>(native_rate_) / static_cast<double>(params_.fft_size());
  const auto first = static_cast<std::size_t>(std::ceil(key.band_lo / bin_hz));
  const auto last = std::min(params_.bins() - 1, static_cast<std::size_t>(std::floor(key.band_hi / bin_hz)));
  if (last < first) throw ParameterError("watermark band contains no STFT bins");
  return {first, last - first + 1};
}

int SpreadSpectrumWatermark::pattern(const WatermarkKey& key, std::size_t band_bin, std::size_t frame_phase) const {
  const std::size_t chips_per_period = layout_.period_frames / layout_.chip_frames;
  const std::size_t chip = (band_bin / layout_.chip_bins) * chips_per_period +
                           (frame_phase % layout_.period_frames) / layout_.chip_frames;
  const std::uint64_t bits = mix64(derive_seed(key.key, "ss-pattern") ^ mix64(chip));
  return (bits >> 63) ? 1 : -1;
}

void SpreadSpectrumWatermark::check_input(const AudioBuffer& buffer, const WatermarkKey& key) const {
  key.validate(native_rate_);
  if (buffer.sample_rate() != native_rate_) {
    throw ParameterError("watermark expects audio at " + std::to_string(native_rate_) + " Hz, got " +
                         std::to_string(buffer.sample_rate()) + " Hz");
  }
  if (buffer.size() < static_cast<std::size_t>(native_rate_)) {
    throw LengthError("watermark needs at least 1 s of audio, got " + std::to_string(buffer.size()) + " samples");
  }
}

AudioBuffer SpreadSpectrumWatermark::embed(const AudioBuffer& buffer, const WatermarkKey& key) const {
  check_input(buffer, key);
  const auto x = to_work(buffer.samples());
  const double signal_energy = energy(x);
  if (signal_energy <= 0.0) return buffer;

  const Spectrogram spec = stft(x, native_rate_, params_);
  const Band band = band_bins(key);
  std::vector<int> signs(spec.frames() * band.count);
  for (std::size_t f = 0; f < spec.frames(); ++f) {
    for (std::size_t b = 0; b < band.count; ++b) signs[f * band.count + b] = pattern(key, b, f);
  }

  // The perturbation istft(X * (exp(alpha P) - 1)) is linear in the spectrum,
  // so each trial alpha costs one inverse transform.
  const auto perturbation = [&](double alpha) {
    Spectrogram delta(params_, native_rate_, x.size(), spec.frames());
    const double up = std::expm1(alpha);
    const double down = std::expm1(-alpha);
    for (std::size_t f = 0; f < spec.frames(); ++f) {
      for (std::size_t b = 0; b < band.count; ++b) {
        const std::size_t bin = band.first + b;
        delta.at(f, bin) = spec.at(f, bin) * (signs[f * band.count + b] > 0 ? up : down);
      }
    }
    return istft_work(delta);
  };

  const double target_db = -key.strength_db;
  double alpha = kInitialAlpha;
  std::vector<double> d = perturbation(alpha);
  for (int it = 0; it < kMaxSolveIterations; ++it) {
    const double noise = energy(d);
    if (noise <= 0.0) break;  // no energy inside the band
    const double snr = 10.0 * std::log10(signal_energy / noise);
    if (std::abs(snr - target_db) < kSolveToleranceDb) break;
    alpha *= std::pow(10.0, (snr - target_db) / 20.0);
    d = perturbation(alpha);
  }

  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + d[i];
  return AudioBuffer(to_samples(y), native_rate_);
}

double SpreadSpectrumWatermark::detect(const AudioBuffer& buffer, const WatermarkKey& key) const {
  check_input(buffer, key);
  const Spectrogram spec = stft(buffer, params_);
  const Band band = band_bins(key);
  const std::size_t period = layout_.period_frames;
  const std::size_t frames = spec.frames();

  std::vector<double> logmag(frames * band.count);
  std::vector<double> frame_energy(frames, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t b = 0; b < band.count; ++b) {
      const double mag = std::abs(spec.at(f, band.first + b));
      frame_energy[f] += mag * mag;
      logmag[f * band.count + b] = std::log(mag + kLogFloor);
    }
  }
  double mean_energy = 0.0;
  for (double e : frame_energy) mean_energy += e;
  mean_energy /= static_cast<double>(frames);
  std::vector<char> active(frames);
  for (std::size_t f = 0; f < frames; ++f) active[f] = mean_energy > 0.0 && frame_energy[f] >= kSilenceRatio * mean_energy;

  // Sliding per-bin mean over active frames via prefix sums.
  std::vector<double> prefix((frames + 1) * band.count, 0.0);
  std::vector<std::size_t> count_prefix(frames + 1, 0);
  for (std::size_t f = 0; f < frames; ++f) {
    count_prefix[f + 1] = count_prefix[f] + (active[f] ? 1 : 0);
    for (std::size_t b = 0; b < band.count; ++b) {
      prefix[(f + 1) * band.count + b] = prefix[f * band.count + b] + (active[f] ? logmag[f * band.count + b] : 0.0);
    }
  }
  std::vector<double> residual(frames * band.count, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    if (!active[f]) continue;
    const std::size_t lo = f >= kWhiteningRadius ? f - kWhiteningRadius : 0;
    const std::size_t hi = std::min(frames, f + kWhiteningRadius + 1);
    const auto n = static_cast<double>(count_prefix[hi] - count_prefix[lo]);
    for (std::size_t b = 0; b < band.count; ++b) {
      const double mean = (prefix[hi * band.count + b] - prefix[lo * band.count + b]) / n;
      residual[f * band.count + b] = logmag[f * band.count + b] - mean;
    }
  }

  std::vector<double> folded(period * band.count, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t b = 0; b < band.count; ++b) folded[(f % period) * band.count + b] += residual[f * band.count + b];
  }

  const std::size_t chips_per_period = period / layout_.chip_frames;
  const std::size_t freq_chips = (band.count + layout_.chip_bins - 1) / layout_.chip_bins;
  std::vector<double> chip_sum(freq_chips * chips_per_period);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t offset = 0; offset < period; ++offset) {
    std::fill(chip_sum.begin(), chip_sum.end(), 0.0);
    for (std::size_t phase = 0; phase < period; ++phase) {
      const std::size_t ct = ((phase + offset) % period) / layout_.chip_frames;
      for (std::size_t b = 0; b < band.count; ++b) {
        chip_sum[(b / layout_.chip_bins) * chips_per_period + ct] += folded[phase * band.count + b];
      }
    }
    double dot = 0.0, norm = 0.0;
    for (std::size_t cf = 0; cf < freq_chips; ++cf) {
      for (std::size_t ct = 0; ct < chips_per_period; ++ct) {
        const double s = chip_sum[cf * chips_per_period + ct];
        dot += s * pattern(key, cf * layout_.chip_bins, ct * layout_.chip_frames);
        norm += s * s;
      }
    }
    const double score = norm > 0.0 ? dot / std::sqrt(norm * static_cast<double>(chip_sum.size())) : 0.0;
    best = std::max(best, score);
  }
  return best;
}

AudioBuffer embed(const AudioBuffer& buffer, const WatermarkKey& key) {
  return SpreadSpectrumWatermark().embed(buffer, key);
}

double detect(const AudioBuffer& buffer, const WatermarkKey& key) {
  return SpreadSpectrumWatermark().detect(buffer, key);
}

}  // namespace markbench::wm
