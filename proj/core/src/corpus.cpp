#include "markbench/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "markbench/errors.hpp"
#include "markbench/parallel.hpp"
#include "markbench/resample.hpp"
#include "markbench/rng.hpp"
#include "markbench/wav.hpp"

namespace markbench::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path CorpusManifest::resolve(const ManifestEntry& entry) const {
  if (entry.wav_path.is_absolute() || root.empty()) return entry.wav_path;
  return root / entry.wav_path;
}

CorpusManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open manifest " + path.string());

  CorpusManifest manifest;
  manifest.root = path.parent_path();
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw LoadError(where + ": malformed record: " + e.what());
    }
    if (!record.is_object() || !record.contains("clip_id") || !record.contains("wav_path") ||
        !record["clip_id"].is_string() || !record["wav_path"].is_string()) {
      throw LoadError(where + ": record needs string fields clip_id and wav_path");
    }
    ManifestEntry entry;
    entry.clip_id = record["clip_id"].get<std::string>();
    entry.wav_path = record["wav_path"].get<std::string>();
    if (entry.clip_id.empty()) throw LoadError(where + ": empty clip_id");
    if (auto it = record.find("transcript"); it != record.end() && !it->is_null()) {
      entry.transcript = it->get<std::string>();
    }
    if (auto it = record.find("speaker_id"); it != record.end() && !it->is_null()) {
      entry.speaker_id = it->get<std::string>();
    }
    if (!seen.insert(entry.clip_id).second) {
      throw LoadError(where + ": duplicate clip_id '" + entry.clip_id + "'");
    }
    const fs::path file = manifest.resolve(entry);
    std::ifstream probe(file, std::ios::binary);
    if (!probe) throw LoadError(where + ": clip '" + entry.clip_id + "' is not readable: " + file.string());
    manifest.entries.push_back(std::move(entry));
  }
  if (manifest.entries.empty()) throw LoadError("manifest " + path.string() + " has no entries");
  return manifest;
}

void write_manifest(const CorpusManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  for (const auto& e : manifest.entries) {
    json record{{"clip_id", e.clip_id}, {"wav_path", e.wav_path.generic_string()}};
    if (e.transcript) record["transcript"] = *e.transcript;
    if (e.speaker_id) record["speaker_id"] = *e.speaker_id;
    out << record.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Clip> load_clips(const CorpusManifest& manifest, int sample_rate, double duration_s,
                             std::size_t workers) {
  if (sample_rate <= 0) throw ParameterError("sample rate must be positive");
  std::vector<Clip> clips(manifest.entries.size());
  parallel_for(clips.size(), workers, [&](std::size_t i) {
    const auto& entry = manifest.entries[i];
    AudioBuffer audio;
    try {
      audio = read_wav(manifest.resolve(entry));
    } catch (const Error& e) {
      throw LoadError("clip '" + entry.clip_id + "': " + e.what());
    }
    audio = resample(audio, sample_rate);
    if (duration_s > 0.0) {
      const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
      std::vector<float> s = std::move(audio).take();
      s.resize(n, 0.0f);
      audio = AudioBuffer(std::move(s), sample_rate);
    }
    clips[i] = Clip{entry.clip_id, std::move(audio), entry.transcript};
  });
  return clips;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTaperStart = 3500.0;
constexpr double kTaperEnd = 5000.0;
constexpr std::size_t kControlBlock = 32;
constexpr double kTargetRms = 0.1;
constexpr double kPeakLimit = 0.95;

// Two-pole resonator with unit gain at DC.
struct Resonator {
  double a1 = 0.0, a2 = 0.0, g = 1.0;
  double y1 = 0.0, y2 = 0.0;

  void tune(double freq, double bandwidth, double rate) {
    const double r = std::exp(-std::numbers::pi * bandwidth / rate);
    const double c = std::cos(kTwoPi * freq / rate);
    a1 = 2.0 * r * c;
    a2 = -r * r;
    g = 1.0 - a1 - a2;
  }
  double step(double x) {
    const double y = g * x + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

double harmonic_taper(double freq) {
  if (freq <= kTaperStart) return 1.0;
  if (freq >= kTaperEnd) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (freq - kTaperStart) / (kTaperEnd - kTaperStart)));
}

double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

constexpr std::size_t kFormants = 3;
constexpr std::array<double, kFormants> kFormantLo{300.0, 850.0, 2200.0};
constexpr std::array<double, kFormants> kFormantHi{850.0, 2300.0, 3100.0};
constexpr std::array<double, kFormants> kFormantBandwidth{80.0, 120.0, 160.0};

// One syllable: duration, loudness, pitch accent and vowel (formant) target.
struct Syllable {
  double start = 0.0;
  double duration = 0.0;
  double level = 1.0;
  double accent = 0.0;
  std::array<double, kFormants> formants{};
};

std::vector<Syllable> plan_syllables(CounterRng& rng, double duration_s) {
  std::vector<Syllable> out;
  double t = 0.0;
  while (t < duration_s) {
    Syllable s;
    s.start = t;
    s.duration = rng.uniform(0.12, 0.35);
    s.level = rng.uniform(0.5, 1.0);
    s.accent = rng.uniform(0.0, 0.12);
    for (std::size_t k = 0; k < kFormants; ++k) s.formants[k] = rng.uniform(kFormantLo[k], kFormantHi[k]);
    out.push_back(s);
    t += s.duration;
  }
  return out;
}

}  // namespace

std::string synthetic_clip_id(std::size_t index) {
  std::ostringstream os;
  os << "synth_";
  os.width(5);
  os.fill('0');
  os << index;
  return os.str();
}

AudioBuffer synthesize_clip(std::size_t index, double duration_s, int sample_rate, std::uint64_t seed) {
  if (sample_rate <= 0 || !(duration_s > 0.0)) throw ParameterError("synthetic clip needs positive rate and duration");
  CounterRng rng(derive_seed(derive_seed(seed, "corpus"), index));
  const double fs = sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));

  const double f0_base = rng.uniform(80.0, 260.0);
  const double vibrato_rate = rng.uniform(4.5, 6.5);
  const double vibrato_depth = rng.uniform(0.003, 0.01);
  const double vibrato_phase = rng.uniform(0.0, kTwoPi);
  const double breath_level = rng.uniform(0.01, 0.03);
  const std::vector<Syllable> syllables = plan_syllables(rng, duration_s);

  std::array<Resonator, kFormants> voice_tract;
  std::array<Resonator, kFormants> breath_tract;

  const auto max_harmonics = static_cast<std::size_t>(kTaperEnd / f0_base) + 1;
  std::vector<double> weights(max_harmonics + 1, 0.0);
  CounterRng noise(derive_seed(rng.key(), "aspiration"));

  std::vector<double> out(n);
  double phase = 0.0;
  double f0 = f0_base;
  double envelope = 1.0;
  std::size_t current = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % kControlBlock == 0) {
      const double t = i / fs;
      while (current + 1 < syllables.size() && t >= syllables[current + 1].start) ++current;
      const Syllable& syl = syllables[current];
      const Syllable& prev_syl = syllables[current == 0 ? 0 : current - 1];
      const double u = (t - syl.start) / syl.duration;
      // Pitch and vowel glide from the previous syllable's targets.
      const double glide = smoothstep(u / 0.4);
      const double accent = prev_syl.accent + (syl.accent - prev_syl.accent) * glide;
      // Accent and vibrato are non-negative, so f0 never drops below f0_base.
      f0 = f0_base * (1.0 + accent) * (1.0 + vibrato_depth * (1.0 + std::sin(kTwoPi * vibrato_rate * t + vibrato_phase)));
      const double shape = std::sin(std::numbers::pi * std::clamp(u, 0.0, 1.0));
      envelope = 0.25 + 0.75 * syl.level * shape * std::sqrt(shape);
      for (std::size_t h = 1; h <= max_harmonics; ++h) weights[h] = harmonic_taper(h * f0) / h;
      for (std::size_t k = 0; k < kFormants; ++k) {
        const double freq = prev_syl.formants[k] + (syl.formants[k] - prev_syl.formants[k]) * glide;
        voice_tract[k].tune(freq, kFormantBandwidth[k], fs);
        breath_tract[k].tune(freq, kFormantBandwidth[k], fs);
      }
    }
    // sin(h*phase) by the Chebyshev recurrence.
    const double c2 = 2.0 * std::cos(phase);
    double prev = 0.0;
    double cur = std::sin(phase);
    double voiced = 0.0;
    for (std::size_t h = 1; h <= max_harmonics && weights[h] > 0.0; ++h) {
      voiced += weights[h] * cur;
      const double next = c2 * cur - prev;
      prev = cur;
      cur = next;
    }
    phase += kTwoPi * f0 / fs;
    if (phase > kTwoPi) phase -= kTwoPi;

    double v = voiced;
    double b = noise.normal() * breath_level;
    for (auto& r : voice_tract) v = r.step(v);
    for (auto& r : breath_tract) b = r.step(b);
    out[i] = envelope * (v + b);
  }

  double power = 0.0;
  double peak = 0.0;
  for (double x : out) {
    power += x * x;
    peak = std::max(peak, std::abs(x));
  }
  const double rms = std::sqrt(power / std::max<std::size_t>(n, 1));
  double scale = rms > 0.0 ? kTargetRms / rms : 0.0;
  if (peak * scale > kPeakLimit) scale = kPeakLimit / peak;
  for (double& x : out) x *= scale;
  return AudioBuffer(to_samples(out), sample_rate);
}

std::vector<Clip> synthetic_clips(std::size_t n_clips, double duration_s, int sample_rate, std::uint64_t seed,
                                  std::size_t workers) {
  if (n_clips == 0) throw ParameterError("synthetic corpus needs at least one clip");
  std::vector<Clip> clips(n_clips);
  parallel_for(n_clips, workers, [&](std::size_t i) {
    clips[i] = Clip{synthetic_clip_id(i), synthesize_clip(i, duration_s, sample_rate, seed), std::nullopt};
  });
  return clips;
}

CorpusManifest generate_synthetic_corpus(std::size_t n_clips, double duration_s, int sample_rate, std::uint64_t seed,
                                         const fs::path& out_dir, std::size_t workers) {
  if (n_clips == 0) throw ParameterError("synthetic corpus needs at least one clip");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  CorpusManifest manifest;
  manifest.root = out_dir;
  manifest.entries.resize(n_clips);
  parallel_for(n_clips, workers, [&](std::size_t i) {
    const std::string id = synthetic_clip_id(i);
    const fs::path name = id + ".wav";
    write_wav(synthesize_clip(i, duration_s, sample_rate, seed), out_dir / name, WavEncoding::float32);
    manifest.entries[i] = ManifestEntry{id, name, std::nullopt, std::nullopt};
  });
  write_manifest(manifest, out_dir / "manifest.jsonl");
  return manifest;
}

}  // namespace markbench::corpus
