#include "markbench/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>
#include <string>

#include "markbench/errors.hpp"
#include "markbench/filters.hpp"

namespace markbench {
namespace {

constexpr int kTableDensity = 4096;  // kernel samples per zero crossing

/// Windowed sinc in units of zero crossings: K(u) for u in [0, extent].
class KernelTable {
 public:
  KernelTable() {
    extent_ = resampler::kZeroCrossings * resampler::kRolloff;
    const auto n = static_cast<std::size_t>(std::ceil(extent_ * kTableDensity)) + 2;
    values_.resize(n);
    const double i0_beta = dsp::bessel_i0(resampler::kKaiserBeta);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = static_cast<double>(i) / kTableDensity;
      if (u >= extent_) {
        values_[i] = 0.0;
        continue;
      }
      const double r = u / extent_;
      const double window = dsp::bessel_i0(resampler::kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
      const double sinc = u == 0.0 ? 1.0 : std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
      values_[i] = sinc * window;
    }
  }

  [[nodiscard]] double extent() const { return extent_; }

  [[nodiscard]] double operator()(double u) const {
    u = std::abs(u);
    const double pos = u * kTableDensity;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= values_.size()) return 0.0;
    const double frac = pos - static_cast<double>(i);
    return values_[i] + frac * (values_[i + 1] - values_[i]);
  }

 private:
  double extent_ = 0.0;
  std::vector<double> values_;
};

const KernelTable& kernel() {
  static const KernelTable table;
  return table;
}

constexpr long kMaxPolyphases = 4096;

// Rational ratio up/down with few distinct phases: precompute one filter per
// output phase so the inner loop is a plain dot product.
std::vector<double> resample_polyphase(std::span<const double> input, long up, long down, std::size_t out_len) {
  const KernelTable& k = kernel();
  const double g = resampler::kRolloff * std::min(1.0, static_cast<double>(up) / static_cast<double>(down));
  const auto reach = static_cast<long>(std::ceil(k.extent() / g)) + 1;
  const long taps = 2 * reach + 1;
  std::vector<double> bank(static_cast<std::size_t>(up * taps));
  for (long p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / static_cast<double>(up);
    for (long j = -reach; j <= reach; ++j) {
      bank[static_cast<std::size_t>(p * taps + j + reach)] = g * k(g * (frac - static_cast<double>(j)));
    }
  }
  const auto n_in = static_cast<long>(input.size());
  std::vector<double> out(out_len, 0.0);
  for (std::size_t n = 0; n < out_len; ++n) {
    const long pos = static_cast<long>(n) * down;
    const long base = pos / up;
    const long phase = pos % up;
    const double* h = &bank[static_cast<std::size_t>(phase * taps)];
    const long first = base - reach;
    const long lo = std::max(0L, first);
    const long hi = std::min(n_in - 1, base + reach);
    double acc = 0.0;
    for (long i = lo; i <= hi; ++i) acc += input[static_cast<std::size_t>(i)] * h[i - first];
    out[n] = acc;
  }
  return out;
}

}  // namespace

std::vector<double> resample_by_step(std::span<const double> input, double step, std::size_t out_len) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ParameterError("resample step must be positive");
  const KernelTable& k = kernel();
  // Filter bandwidth in input-sample units: g zero crossings per input sample.
  const double g = resampler::kRolloff * std::min(1.0, 1.0 / step);
  const double half_width = k.extent() / g;  // in input samples
  const auto n_in = static_cast<std::ptrdiff_t>(input.size());
  std::vector<double> out(out_len, 0.0);
  for (std::size_t n = 0; n < out_len; ++n) {
    const double t = static_cast<double>(n) * step;
    const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(t - half_width)));
    const auto hi = std::min<std::ptrdiff_t>(n_in - 1, static_cast<std::ptrdiff_t>(std::floor(t + half_width)));
    double acc = 0.0;
    for (std::ptrdiff_t i = lo; i <= hi; ++i) {
      acc += input[static_cast<std::size_t>(i)] * k(g * (t - static_cast<double>(i)));
    }
    out[n] = acc * g;
  }
  return out;
}

AudioBuffer resample(const AudioBuffer& buffer, int target_rate) {
  if (target_rate <= 0) throw ParameterError("target rate must be positive, got " + std::to_string(target_rate));
  if (target_rate == buffer.sample_rate()) return buffer;
  const double ratio = static_cast<double>(target_rate) / buffer.sample_rate();
  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(buffer.size()) * ratio));
  const auto work = to_work(buffer.samples());
  const long common = std::gcd(static_cast<long>(buffer.sample_rate()), static_cast<long>(target_rate));
  const long up = target_rate / common;
  const long down = buffer.sample_rate() / common;
  if (up <= kMaxPolyphases) {
    return AudioBuffer(to_samples(resample_polyphase(work, up, down, out_len)), target_rate);
  }
  const double step = static_cast<double>(buffer.sample_rate()) / target_rate;
  return AudioBuffer(to_samples(resample_by_step(work, step, out_len)), target_rate);
}

}  // namespace markbench
