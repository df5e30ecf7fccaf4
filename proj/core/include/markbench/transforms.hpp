#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "markbench/audio_buffer.hpp"
#include "markbench/plugin.hpp"

namespace markbench::dsp {

/// Closed interval a parameter is drawn from; lo == hi means fixed.
struct Range {
  double lo = 0.0;
  double hi = 0.0;

  static Range fixed(double v) { return {v, v}; }
  [[nodiscard]] bool is_fixed() const { return lo == hi; }
  friend bool operator==(const Range&, const Range&) = default;
};

inline constexpr std::array<double, 6> kDefaultEqCenters{125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0};

struct NoiseParams {
  double snr_db = 20.0;  // +infinity disables
  friend bool operator==(const NoiseParams&, const NoiseParams&) = default;
};
struct EqualizeParams {
  std::array<double, 6> centers_hz = kDefaultEqCenters;
  std::optional<std::array<double, 6>> gains_db;  // drawn from gain_range when absent
  Range gain_range{-1.0, 1.0};
  double q = 1.41421356237309515;  // one-octave bandwidth
  friend bool operator==(const EqualizeParams&, const EqualizeParams&) = default;
};
struct LowPassParams {
  double cutoff_hz = 4000.0;
  friend bool operator==(const LowPassParams&, const LowPassParams&) = default;
};
struct HighPassParams {
  double cutoff_hz = 500.0;
  friend bool operator==(const HighPassParams&, const HighPassParams&) = default;
};
struct PitchShiftParams {
  Range semitones{-1.0, 1.0};
  friend bool operator==(const PitchShiftParams&, const PitchShiftParams&) = default;
};
struct SpeedParams {
  Range factor{0.95, 1.05};
  friend bool operator==(const SpeedParams&, const SpeedParams&) = default;
};
struct TimeStretchParams {
  Range factor{0.95, 1.05};
  friend bool operator==(const TimeStretchParams&, const TimeStretchParams&) = default;
};
struct ReverbParams {
  /// Impulse-response WAV files; one is picked per application. Empty selects
  /// the built-in exponential-decay generator.
  std::vector<std::string> ir_paths;
  double rt60_s = 0.5;
  friend bool operator==(const ReverbParams&, const ReverbParams&) = default;
};
struct GainParams {
  double db = 0.0;
  friend bool operator==(const GainParams&, const GainParams&) = default;
};
struct DropoutParams {
  double p = 0.001;
  friend bool operator==(const DropoutParams&, const DropoutParams&) = default;
};
struct QuantizeParams {
  int bits = 16;
  friend bool operator==(const QuantizeParams&, const QuantizeParams&) = default;
};
struct TimeShiftParams {
  long samples = 0;
  bool wrap = false;  // rotate instead of zero-padding
  friend bool operator==(const TimeShiftParams&, const TimeShiftParams&) = default;
};
/// Noise injection followed by denoising (built-in spectral subtraction
/// unless a denoiser plugin is configured).
struct DenoiseParams {
  double snr_db = 20.0;
  double oversubtraction = 2.0;
  std::optional<plugin::PluginSpec> denoiser;
  std::optional<int> denoiser_rate;  // band-split the plugin at this rate
  friend bool operator==(const DenoiseParams&, const DenoiseParams&) = default;
};
struct PluginParams {
  plugin::PluginSpec spec;
  std::optional<int> native_rate;  // band-split wrap when the audio rate is higher
  friend bool operator==(const PluginParams&, const PluginParams&) = default;
};

using TransformParams =
    std::variant<NoiseParams, EqualizeParams, LowPassParams, HighPassParams, PitchShiftParams, ReverbParams,
                 SpeedParams, TimeStretchParams, GainParams, DropoutParams, QuantizeParams, TimeShiftParams,
                 DenoiseParams, PluginParams>;

enum class TransformKind {
  noise,
  equalize,
  low_pass,
  high_pass,
  pitch_shift,
  reverb,
  speed,
  time_stretch,
  gain,
  dropout,
  quantize,
  time_shift,
  denoise,
  plugin,
};

std::string_view to_string(TransformKind kind);
TransformKind parse_transform_kind(std::string_view name);

/// Declarative, seedable description of one transformation.
struct TransformSpec {
  TransformParams params;
  std::uint64_t seed = 0;

  [[nodiscard]] TransformKind kind() const { return static_cast<TransformKind>(params.index()); }
  /// Throws ParameterError when a parameter is outside its legal range.
  void validate() const;

  friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

/// Dispatches to the kind-specific operation. Equal (spec, buffer) give
/// bit-equal output; the sample rate is always preserved.
AudioBuffer apply(const TransformSpec& spec, const AudioBuffer& buffer);

AudioBuffer add_noise(const AudioBuffer& buffer, double snr_db, std::uint64_t seed);
AudioBuffer equalize(const AudioBuffer& buffer, std::span<const double> gains_db, std::span<const double> centers_hz,
                     double q = 1.41421356237309515);
AudioBuffer low_pass(const AudioBuffer& buffer, double cutoff_hz);
AudioBuffer high_pass(const AudioBuffer& buffer, double cutoff_hz);
AudioBuffer pitch_shift(const AudioBuffer& buffer, double semitones);
AudioBuffer speed(const AudioBuffer& buffer, double factor);
AudioBuffer time_stretch(const AudioBuffer& buffer, double factor);
AudioBuffer reverb(const AudioBuffer& buffer, const AudioBuffer& impulse_response);
AudioBuffer gain(const AudioBuffer& buffer, double db);
AudioBuffer dropout(const AudioBuffer& buffer, double p, std::uint64_t seed);
AudioBuffer quantize(const AudioBuffer& buffer, int bits);
AudioBuffer time_shift(const AudioBuffer& buffer, long samples, bool wrap = false);

/// Exponentially decaying Gaussian-noise impulse response with a unit
/// direct-path tap; energy falls by 60 dB after rt60_s.
AudioBuffer synthetic_impulse_response(int sample_rate, double rt60_s, std::uint64_t seed);

inline constexpr int kFilterOrder = 8;

}  // namespace markbench::dsp
