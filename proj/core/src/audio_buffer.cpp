#include "markbench/audio_buffer.hpp"

#include <cmath>

#include "markbench/errors.hpp"

namespace markbench {

AudioBuffer::AudioBuffer(std::vector<float> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (sample_rate <= 0) {
    throw ParameterError("sample rate must be positive, got " + std::to_string(sample_rate));
  }
}

AudioBuffer AudioBuffer::zeros(std::size_t length, int sample_rate) {
  return AudioBuffer(std::vector<float>(length, 0.0f), sample_rate);
}

double AudioBuffer::mean_power() const {
  if (samples_.empty()) return 0.0;
  double acc = 0.0;
  for (float s : samples_) acc += static_cast<double>(s) * s;
  return acc / static_cast<double>(samples_.size());
}

double AudioBuffer::rms() const { return std::sqrt(mean_power()); }

bool AudioBuffer::all_finite() const {
  for (float s : samples_) {
    if (!std::isfinite(s)) return false;
  }
  return true;
}

std::vector<float> to_samples(std::span<const double> work) {
  std::vector<float> out(work.size());
  for (std::size_t i = 0; i < work.size(); ++i) {
    out[i] = std::isfinite(work[i]) ? static_cast<float>(work[i]) : 0.0f;
  }
  return out;
}

std::vector<double> to_work(std::span<const float> samples) {
  return {samples.begin(), samples.end()};
}

}  // namespace markbench
