#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "markbench/audio_buffer.hpp"
#include "markbench/plugin.hpp"
#include "markbench/stft.hpp"

namespace markbench::attack {

inline constexpr double kSpectralFloor = 0.05;

/// Magnitude-domain spectral subtraction with the original phase.
///
/// Per bin: |Y| - oversubtraction * sqrt(noise_power), floored at
/// kSpectralFloor * |Y|. `noise_power` holds one expected |N_k|^2 per STFT bin.
AudioBuffer spectral_subtract_denoise(const AudioBuffer& buffer, std::span<const double> noise_power,
                                      double oversubtraction = 2.0, const StftParams& params = {});

/// Expected per-bin STFT power of white noise with the given per-sample variance.
std::vector<double> white_noise_profile(double variance, const StftParams& params = {});

/// Per-bin mean STFT power of a noise-only recording.
std::vector<double> estimate_noise_profile(const AudioBuffer& noise, const StftParams& params = {});

struct Denoiser {
  double oversubtraction = 2.0;
  std::optional<plugin::PluginSpec> plugin;  // external denoiser replaces the built-in one
  std::optional<int> plugin_rate;            // band-split the plugin at this native rate
};

/// Adds white Gaussian noise at snr_db, then denoises. The built-in denoiser
/// is given the injected-noise variance as its profile.
AudioBuffer denoise_attack(const AudioBuffer& buffer, double snr_db, const Denoiser& denoiser, std::uint64_t seed);

}  // namespace markbench::attack
