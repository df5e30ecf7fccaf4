#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "markbench/audio_buffer.hpp"

namespace markbench::corpus {

struct ManifestEntry {
  std::string clip_id;
  std::filesystem::path wav_path;  // absolute, or relative to the manifest root
  std::optional<std::string> transcript;
  std::optional<std::string> speaker_id;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Corpus description. On disk this is JSON Lines: one object per line with
/// "clip_id" and "wav_path" (relative paths resolve against the manifest's
/// directory) and optional "transcript" and "speaker_id".
struct CorpusManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;

  [[nodiscard]] std::filesystem::path resolve(const ManifestEntry& entry) const;
};

/// Loads and validates a manifest. Throws LoadError for a missing or empty
/// file, malformed lines, duplicate ids, or unreadable clips.
CorpusManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);

/// A clip ready for evaluation.
struct Clip {
  std::string id;
  AudioBuffer audio;
  std::optional<std::string> transcript;
};

/// Reads every clip, resamples it to `sample_rate` and crops or zero-pads it
/// to `duration_s` (<= 0 keeps the original length).
std::vector<Clip> load_clips(const CorpusManifest& manifest, int sample_rate, double duration_s,
                             std::size_t workers = 1);

inline constexpr std::size_t kDefaultClipCount = 200;
inline constexpr double kDefaultDurationS = 5.0;
inline constexpr int kDefaultSampleRate = 44100;

/// Speech-like clip: a harmonic source (fundamental 80-260 Hz with vibrato and
/// per-syllable pitch accents) under a syllabic amplitude envelope, shaped by
/// formant resonators that glide between per-syllable vowel targets, plus
/// low-level aspiration noise. Syllable lengths are random (120-350 ms).
/// Deterministic in (seed, index).
AudioBuffer synthesize_clip(std::size_t index, double duration_s, int sample_rate, std::uint64_t seed);

std::string synthetic_clip_id(std::size_t index);

/// In-memory synthetic corpus.
std::vector<Clip> synthetic_clips(std::size_t n_clips, double duration_s, int sample_rate, std::uint64_t seed,
                                  std::size_t workers = 1);

/// Writes n_clips float32 WAVs plus manifest.jsonl into out_dir.
CorpusManifest generate_synthetic_corpus(std::size_t n_clips, double duration_s, int sample_rate, std::uint64_t seed,
                                         const std::filesystem::path& out_dir, std::size_t workers = 1);

}  // namespace markbench::corpus
