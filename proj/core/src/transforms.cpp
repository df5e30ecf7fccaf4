#include "markbench/transforms.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "markbench/band_split.hpp"
#include "markbench/denoise.hpp"
#include "markbench/errors.hpp"
#include "markbench/filters.hpp"
#include "markbench/phase_vocoder.hpp"
#include "markbench/resample.hpp"
#include "markbench/rng.hpp"
#include "markbench/wav.hpp"

namespace markbench::dsp {
namespace {

constexpr std::string_view kKindNames[] = {
    "noise", "equalize", "low_pass", "high_pass", "pitch_shift", "reverb",   "speed",
    "time_stretch", "gain", "dropout", "quantize", "time_shift", "denoise", "plugin",
};

double draw(const Range& range, CounterRng& rng) {
  return range.is_fixed() ? range.lo : rng.uniform(range.lo, range.hi);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ParameterError(message);
}

void require_range(const Range& r, double lo, double hi, const char* what) {
  require(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi, std::string(what) + ": invalid range");
  require(r.lo >= lo && r.hi <= hi,
          std::string(what) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

AudioBuffer from_work(const std::vector<double>& work, int rate) { return AudioBuffer(to_samples(work), rate); }

AudioBuffer run_filter(const AudioBuffer& buffer, const std::vector<Biquad>& cascade) {
  auto work = to_work(buffer.samples());
  filter_in_place(cascade, work);
  return from_work(work, buffer.sample_rate());
}

}  // namespace

std::string_view to_string(TransformKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

TransformKind parse_transform_kind(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
    if (kKindNames[i] == name) return static_cast<TransformKind>(i);
  }
  throw ParameterError("unknown transform kind '" + std::string(name) + "'");
}

void TransformSpec::validate() const {
  std::visit(
      [](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NoiseParams>) {
          require(!std::isnan(p.snr_db) && p.snr_db != -std::numeric_limits<double>::infinity(),
                  "noise: snr_db must be finite or +inf");
        } else if constexpr (std::is_same_v<P, EqualizeParams>) {
          for (std::size_t i = 0; i < p.centers_hz.size(); ++i) {
            require(p.centers_hz[i] > 0.0, "equalize: band centers must be positive");
            if (i > 0) require(p.centers_hz[i] > p.centers_hz[i - 1], "equalize: band centers must increase");
          }
          require(p.q > 0.0, "equalize: q must be positive");
          if (p.gains_db) {
            for (double g : *p.gains_db) require(std::isfinite(g), "equalize: gains must be finite");
          } else {
            require_range(p.gain_range, -24.0, 24.0, "equalize gain");
          }
        } else if constexpr (std::is_same_v<P, LowPassParams> || std::is_same_v<P, HighPassParams>) {
          require(p.cutoff_hz > 0.0 && std::isfinite(p.cutoff_hz), "filter: cutoff must be positive");
        } else if constexpr (std::is_same_v<P, PitchShiftParams>) {
          require_range(p.semitones, -12.0, 12.0, "pitch_shift semitones");
        } else if constexpr (std::is_same_v<P, SpeedParams>) {
          require_range(p.factor, 0.5, 2.0, "speed factor");
        } else if constexpr (std::is_same_v<P, TimeStretchParams>) {
          require_range(p.factor, 0.5, 2.0, "time_stretch factor");
        } else if constexpr (std::is_same_v<P, ReverbParams>) {
          require(p.rt60_s > 0.0 && p.rt60_s <= 10.0, "reverb: rt60 must lie in (0, 10] s");
        } else if constexpr (std::is_same_v<P, GainParams>) {
          require(std::isfinite(p.db), "gain: db must be finite");
        } else if constexpr (std::is_same_v<P, DropoutParams>) {
          require(p.p >= 0.0 && p.p <= 1.0, "dropout: p must lie in [0, 1]");
        } else if constexpr (std::is_same_v<P, QuantizeParams>) {
          require(p.bits >= 2 && p.bits <= 16, "quantize: bits must lie in [2, 16]");
        } else if constexpr (std::is_same_v<P, DenoiseParams>) {
          require(!std::isnan(p.snr_db) && p.snr_db != -std::numeric_limits<double>::infinity(),
                  "denoise: snr_db must be finite or +inf");
          require(p.oversubtraction >= 0.0, "denoise: oversubtraction must be non-negative");
        } else if constexpr (std::is_same_v<P, PluginParams>) {
          p.spec.validate();
        }
      },
      params);
}

AudioBuffer add_noise(const AudioBuffer& buffer, double snr_db, std::uint64_t seed) {
  if (snr_db == std::numeric_limits<double>::infinity()) return buffer;
  const double signal_power = buffer.mean_power();
  if (!(signal_power > 0.0)) throw UndefinedSnrError("add_noise: input has zero energy");
  CounterRng rng(derive_seed(seed, "noise"));
  std::vector<double> noise(buffer.size());
  double noise_power = 0.0;
  for (double& v : noise) {
    v = rng.normal();
    noise_power += v * v;
  }
  noise_power /= static_cast<double>(noise.size());
  const double scale = std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0) / noise_power);
  std::vector<double> out(buffer.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = buffer[i] + scale * noise[i];
  return from_work(out, buffer.sample_rate());
}

AudioBuffer equalize(const AudioBuffer& buffer, std::span<const double> gains_db, std::span<const double> centers_hz,
                     double q) {
  if (gains_db.size() != centers_hz.size()) throw ParameterError("equalize: gains and centers differ in size");
  const double nyquist = buffer.sample_rate() / 2.0;
  std::vector<Biquad> cascade;
  for (std::size_t i = 0; i < centers_hz.size(); ++i) {
    if (!(centers_hz[i] < nyquist)) throw ParameterError("equalize: band center above Nyquist");
    if (i > 0 && !(centers_hz[i] > centers_hz[i - 1])) throw ParameterError("equalize: band centers must increase");
    if (gains_db[i] == 0.0) continue;
    cascade.push_back(peaking(centers_hz[i], gains_db[i], q, buffer.sample_rate()));
  }
  if (cascade.empty()) return buffer;
  return run_filter(buffer, cascade);
}

AudioBuffer low_pass(const AudioBuffer& buffer, double cutoff_hz) {
  return run_filter(buffer, butterworth_lowpass(kFilterOrder, cutoff_hz, buffer.sample_rate()));
}

AudioBuffer high_pass(const AudioBuffer& buffer, double cutoff_hz) {
  return run_filter(buffer, butterworth_highpass(kFilterOrder, cutoff_hz, buffer.sample_rate()));
}

AudioBuffer time_stretch(const AudioBuffer& buffer, double factor) {
  if (!(factor >= 0.5 && factor <= 2.0)) throw ParameterError("time_stretch: factor must lie in [0.5, 2]");
  if (factor == 1.0) return buffer;
  const auto work = to_work(buffer.samples());
  return from_work(phase_vocoder_stretch(work, factor), buffer.sample_rate());
}

AudioBuffer speed(const AudioBuffer& buffer, double factor) {
  if (!(factor >= 0.5 && factor <= 2.0)) throw ParameterError("speed: factor must lie in [0.5, 2]");
  if (factor == 1.0) return buffer;
  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(buffer.size()) / factor));
  const auto work = to_work(buffer.samples());
  return from_work(resample_by_step(work, factor, out_len), buffer.sample_rate());
}

AudioBuffer pitch_shift(const AudioBuffer& buffer, double semitones) {
  if (!(std::abs(semitones) <= 12.0)) throw ParameterError("pitch_shift: |semitones| must be <= 12");
  if (semitones == 0.0) return buffer;
  const double ratio = std::pow(2.0, semitones / 12.0);
  // Stretch to len * ratio at constant pitch, then play back ratio times faster.
  const auto work = to_work(buffer.samples());
  const auto stretched = phase_vocoder_stretch(work, 1.0 / ratio);
  return from_work(resample_by_step(stretched, ratio, buffer.size()), buffer.sample_rate());
}

AudioBuffer reverb(const AudioBuffer& buffer, const AudioBuffer& impulse_response) {
  if (impulse_response.sample_rate() != buffer.sample_rate()) {
    throw ParameterError("reverb: impulse response rate " + std::to_string(impulse_response.sample_rate()) +
                         " differs from audio rate " + std::to_string(buffer.sample_rate()));
  }
  if (buffer.empty() || impulse_response.empty()) return buffer;
  const auto x = to_work(buffer.samples());
  const auto h = to_work(impulse_response.samples());
  auto wet = fft_convolve(x, h);
  wet.resize(x.size());
  double in_energy = 0.0, out_energy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    in_energy += x[i] * x[i];
    out_energy += wet[i] * wet[i];
  }
  if (out_energy > 0.0) {
    const double scale = std::sqrt(in_energy / out_energy);
    for (double& v : wet) v *= scale;
  }
  return from_work(wet, buffer.sample_rate());
}

AudioBuffer gain(const AudioBuffer& buffer, double db) {
  if (db == 0.0) return buffer;
  const double g = std::pow(10.0, db / 20.0);
  std::vector<double> out(buffer.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = buffer[i] * g;
  return from_work(out, buffer.sample_rate());
}

AudioBuffer dropout(const AudioBuffer& buffer, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("dropout: p must lie in [0, 1]");
  AudioBuffer out = buffer;
  if (p == 0.0) return out;
  CounterRng rng(derive_seed(seed, "dropout"));
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (rng.uniform() < p) out[i] = 0.0f;
  }
  return out;
}

AudioBuffer quantize(const AudioBuffer& buffer, int bits) {
  if (bits < 2 || bits > 16) throw ParameterError("quantize: bits must lie in [2, 16]");
  const double levels = std::ldexp(1.0, bits - 1);  // levels per unit amplitude
  AudioBuffer out = buffer;
  for (float& s : out.samples()) {
    double code = std::round(static_cast<double>(s) * levels);
    code = std::clamp(code, -levels, levels - 1.0);
    s = static_cast<float>(code / levels);
  }
  return out;
}

AudioBuffer time_shift(const AudioBuffer& buffer, long samples, bool wrap) {
  const auto n = static_cast<long>(buffer.size());
  if (samples == 0 || n == 0) return buffer;
  std::vector<float> out(buffer.size(), 0.0f);
  for (long i = 0; i < n; ++i) {
    long src = i - samples;
    if (wrap) {
      src = ((src % n) + n) % n;
    } else if (src < 0 || src >= n) {
      continue;
    }
    out[static_cast<std::size_t>(i)] = buffer[static_cast<std::size_t>(src)];
  }
  return AudioBuffer(std::move(out), buffer.sample_rate());
}

AudioBuffer synthetic_impulse_response(int sample_rate, double rt60_s, std::uint64_t seed) {
  if (!(rt60_s > 0.0)) throw ParameterError("impulse response rt60 must be positive");
  const auto length = static_cast<std::size_t>(std::ceil(1.5 * rt60_s * sample_rate));
  CounterRng rng(derive_seed(seed, "impulse_response"));
  // Amplitude decays by 60 dB (a factor 1000) after rt60 seconds.
  const double decay = std::log(1000.0) / (rt60_s * sample_rate);
  const double tail_level = 0.3;
  std::vector<double> h(length);
  h[0] = 1.0;
  for (std::size_t i = 1; i < length; ++i) {
    h[i] = tail_level * rng.normal() * std::exp(-decay * static_cast<double>(i));
  }
  return from_work(h, sample_rate);
}

AudioBuffer apply(const TransformSpec& spec, const AudioBuffer& buffer) {
  spec.validate();
  CounterRng rng(derive_seed(spec.seed, "params"));
  return std::visit(
      [&](const auto& p) -> AudioBuffer {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NoiseParams>) {
          return add_noise(buffer, p.snr_db, spec.seed);
        } else if constexpr (std::is_same_v<P, EqualizeParams>) {
          std::array<double, 6> gains{};
          if (p.gains_db) {
            gains = *p.gains_db;
          } else {
            for (double& g : gains) g = draw(p.gain_range, rng);
          }
          return equalize(buffer, gains, p.centers_hz, p.q);
        } else if constexpr (std::is_same_v<P, LowPassParams>) {
          return low_pass(buffer, p.cutoff_hz);
        } else if constexpr (std::is_same_v<P, HighPassParams>) {
          return high_pass(buffer, p.cutoff_hz);
        } else if constexpr (std::is_same_v<P, PitchShiftParams>) {
          return pitch_shift(buffer, draw(p.semitones, rng));
        } else if constexpr (std::is_same_v<P, SpeedParams>) {
          return speed(buffer, draw(p.factor, rng));
        } else if constexpr (std::is_same_v<P, TimeStretchParams>) {
          return time_stretch(buffer, draw(p.factor, rng));
        } else if constexpr (std::is_same_v<P, ReverbParams>) {
          if (p.ir_paths.empty()) {
            return reverb(buffer, synthetic_impulse_response(buffer.sample_rate(), p.rt60_s, spec.seed));
          }
          const std::size_t pick = rng.next_u64() % p.ir_paths.size();
          AudioBuffer ir = read_wav(p.ir_paths[pick]);
          if (ir.sample_rate() != buffer.sample_rate()) ir = resample(ir, buffer.sample_rate());
          return reverb(buffer, ir);
        } else if constexpr (std::is_same_v<P, GainParams>) {
          return gain(buffer, p.db);
        } else if constexpr (std::is_same_v<P, DropoutParams>) {
          return dropout(buffer, p.p, spec.seed);
        } else if constexpr (std::is_same_v<P, QuantizeParams>) {
          return quantize(buffer, p.bits);
        } else if constexpr (std::is_same_v<P, TimeShiftParams>) {
          return time_shift(buffer, p.samples, p.wrap);
        } else if constexpr (std::is_same_v<P, DenoiseParams>) {
          attack::Denoiser denoiser{p.oversubtraction, p.denoiser, p.denoiser_rate};
          return attack::denoise_attack(buffer, p.snr_db, denoiser, spec.seed);
        } else {
          const auto run = [&](const AudioBuffer& in) { return plugin::run_transform_plugin(p.spec, in, spec.seed); };
          if (p.native_rate && *p.native_rate < buffer.sample_rate()) {
            return band::process_banded(run, *p.native_rate, buffer);
          }
          return run(buffer);
        }
      },
      spec.params);
}

}  // namespace markbench::dsp
