#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "markbench/audio_buffer.hpp"

namespace markbench {

/// Band-limited (Kaiser-windowed sinc) sample-rate conversion.
///
/// Output length is round(len * target / source). Identical rates return the
/// input unchanged. When downsampling, content above the target Nyquist is
/// attenuated by at least 60 dB.
AudioBuffer resample(const AudioBuffer& buffer, int target_rate);

/// Reads `input` at positions n * step for n in [0, out_len) with a
/// windowed-sinc interpolator whose cutoff is scaled for step > 1.
/// This is the primitive behind both rate conversion and playback-speed change.
std::vector<double> resample_by_step(std::span<const double> input, double step, std::size_t out_len);

namespace resampler {
inline constexpr int kZeroCrossings = 64;  // kernel half-width in zero crossings
inline constexpr double kKaiserBeta = 7.857;  // 80 dB design attenuation
inline constexpr double kRolloff = 0.945;  // passband edge relative to the lower Nyquist
}  // namespace resampler

}  // namespace markbench
