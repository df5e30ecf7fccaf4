#include "markbench/denoise.hpp"

#include <cmath>
#include <string>

#include "markbench/band_split.hpp"
#include "markbench/errors.hpp"
#include "markbench/transforms.hpp"

namespace markbench::attack {

AudioBuffer spectral_subtract_denoise(const AudioBuffer& buffer, std::span<const double> noise_power,
                                      double oversubtraction, const StftParams& params) {
  if (noise_power.size() != params.bins()) {
    throw ParameterError("noise profile has " + std::to_string(noise_power.size()) + " bins, expected " +
                         std::to_string(params.bins()));
  }
  if (buffer.empty()) return buffer;
  Spectrogram spec = stft(buffer, params);
  for (std::size_t f = 0; f < spec.frames(); ++f) {
    auto frame = spec.frame(f);
    for (std::size_t k = 0; k < frame.size(); ++k) {
      const double mag = std::abs(frame[k]);
      if (mag <= 0.0) continue;
      const double cleaned = std::max(mag - oversubtraction * std::sqrt(noise_power[k]), kSpectralFloor * mag);
      frame[k] *= cleaned / mag;
    }
  }
  return istft(spec);
}

std::vector<double> white_noise_profile(double variance, const StftParams& params) {
  double window_energy = 0.0;
  for (double w : params.window_samples()) window_energy += w * w;
  return std::vector<double>(params.bins(), variance * window_energy);
}

std::vector<double> estimate_noise_profile(const AudioBuffer& noise, const StftParams& params) {
  const Spectrogram spec = stft(noise, params);
  std::vector<double> profile(params.bins(), 0.0);
  if (spec.frames() == 0) return profile;
  for (std::size_t f = 0; f < spec.frames(); ++f) {
    for (std::size_t k = 0; k < params.bins(); ++k) profile[k] += std::norm(spec.at(f, k));
  }
  for (double& p : profile) p /= static_cast<double>(spec.frames());
  return profile;
}

AudioBuffer denoise_attack(const AudioBuffer& buffer, double snr_db, const Denoiser& denoiser, std::uint64_t seed) {
  const AudioBuffer noisy = dsp::add_noise(buffer, snr_db, seed);
  if (denoiser.plugin) {
    const auto run = [&](const AudioBuffer& in) { return plugin::run_transform_plugin(*denoiser.plugin, in, seed); };
    if (denoiser.plugin_rate && *denoiser.plugin_rate < noisy.sample_rate()) {
      return band::process_banded(run, *denoiser.plugin_rate, noisy);
    }
    return run(noisy);
  }
  const double variance = std::isinf(snr_db) ? 0.0 : buffer.mean_power() / std::pow(10.0, snr_db / 10.0);
  const StftParams params;
  return spectral_subtract_denoise(noisy, white_noise_profile(variance, params), denoiser.oversubtraction, params);
}

}  // namespace markbench::attack
