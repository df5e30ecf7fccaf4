#include "markbench/cascade.hpp"

#include <sstream>
#include <type_traits>
#include <variant>

#include "markbench/errors.hpp"
#include "markbench/rng.hpp"

namespace markbench::attack {

namespace {

std::string range_text(const dsp::Range& r) {
  std::ostringstream os;
  if (r.is_fixed()) {
    os << r.lo;
  } else {
    os << '[' << r.lo << ',' << r.hi << ']';
  }
  return os.str();
}

std::string stage_text(const dsp::TransformSpec& spec) {
  std::ostringstream os;
  os << dsp::to_string(spec.kind()) << '(';
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, dsp::NoiseParams>) {
          os << "snr_db=" << p.snr_db;
        } else if constexpr (std::is_same_v<P, dsp::EqualizeParams>) {
          os << "gain_db=" << (p.gains_db ? std::string("fixed") : range_text(p.gain_range));
        } else if constexpr (std::is_same_v<P, dsp::LowPassParams> || std::is_same_v<P, dsp::HighPassParams>) {
          os << "cutoff_hz=" << p.cutoff_hz;
        } else if constexpr (std::is_same_v<P, dsp::PitchShiftParams>) {
          os << "semitones=" << range_text(p.semitones);
        } else if constexpr (std::is_same_v<P, dsp::SpeedParams> || std::is_same_v<P, dsp::TimeStretchParams>) {
          os << "factor=" << range_text(p.factor);
        } else if constexpr (std::is_same_v<P, dsp::ReverbParams>) {
          os << (p.ir_paths.empty() ? "rt60_s=" + std::to_string(p.rt60_s) : std::to_string(p.ir_paths.size()) + " irs");
        } else if constexpr (std::is_same_v<P, dsp::GainParams>) {
          os << "db=" << p.db;
        } else if constexpr (std::is_same_v<P, dsp::DropoutParams>) {
          os << "p=" << p.p;
        } else if constexpr (std::is_same_v<P, dsp::QuantizeParams>) {
          os << "bits=" << p.bits;
        } else if constexpr (std::is_same_v<P, dsp::TimeShiftParams>) {
          os << "samples=" << p.samples << (p.wrap ? ",wrap" : "");
        } else if constexpr (std::is_same_v<P, dsp::DenoiseParams>) {
          os << "snr_db=" << p.snr_db << (p.denoiser ? ",plugin" : "");
        } else {
          os << p.spec.executable.filename().string();
        }
      },
      spec.params);
  os << ')';
  return os.str();
}

}  // namespace

void CascadeSpec::validate() const {
  for (const auto& s : stages) s.validate();
}

CascadeSpec CascadeSpec::reseeded(std::uint64_t trial_seed) const {
  CascadeSpec out = *this;
  for (std::size_t i = 0; i < out.stages.size(); ++i) {
    out.stages[i].seed = derive_seed(derive_seed(trial_seed, i), stages[i].seed);
  }
  return out;
}

std::string CascadeSpec::describe() const {
  if (stages.empty()) return "identity";
  std::string out;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (i > 0) out += " > ";
    out += stage_text(stages[i]);
  }
  return out;
}

AudioBuffer apply_cascade(const CascadeSpec& cascade, const AudioBuffer& buffer) {
  AudioBuffer current = buffer;
  for (const auto& stage : cascade.stages) {
    AudioBuffer next = dsp::apply(stage, current);
    if (next.sample_rate() != current.sample_rate()) {
      throw Error("cascade stage " + stage_text(stage) + " changed the sample rate");
    }
    current = std::move(next);
  }
  return current;
}

}  // namespace markbench::attack
