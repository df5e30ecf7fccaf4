#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace markbench {

/// Mono sample sequence with its sample rate.
///
/// Samples are nominally in [-1, 1]. Every operation in the toolkit keeps
/// them finite and never changes the channel count (always one).
class AudioBuffer {
 public:
  AudioBuffer() = default;
  AudioBuffer(std::vector<float> samples, int sample_rate);

  static AudioBuffer zeros(std::size_t length, int sample_rate);

  [[nodiscard]] int sample_rate() const { return sample_rate_; }
  [[nodiscard]] std::size_t size() const { return samples_.size(); }
  [[nodiscard]] bool empty() const { return samples_.empty(); }
  [[nodiscard]] double duration_s() const {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

  [[nodiscard]] std::span<const float> samples() const { return samples_; }
  [[nodiscard]] std::span<float> samples() { return samples_; }
  [[nodiscard]] const std::vector<float>& vec() const { return samples_; }
  [[nodiscard]] std::vector<float>&& take() && { return std::move(samples_); }

  float operator[](std::size_t i) const { return samples_[i]; }
  float& operator[](std::size_t i) { return samples_[i]; }

  /// Mean of squared samples; zero for an empty buffer.
  [[nodiscard]] double mean_power() const;
  [[nodiscard]] double rms() const;
  [[nodiscard]] bool all_finite() const;

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;

 private:
  std::vector<float> samples_;
  int sample_rate_ = 1;
};

/// Converts a double-precision work buffer back to storage precision,
/// replacing non-finite values by zero.
std::vector<float> to_samples(std::span<const double> work);
std::vector<double> to_work(std::span<const float> samples);

}  // namespace markbench
