#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <iterator>

#include "markbench/corpus.hpp"
#include "markbench/errors.hpp"
#include "markbench/wav.hpp"
#include "oracles.hpp"

using namespace markbench;
using namespace markbench::corpus;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string expect_load_error(const fs::path& manifest) {
  try {
    load_manifest(manifest);
  } catch (const LoadError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected LoadError for " << manifest;
  return {};
}

// Fraction of energy between lo and hi, from Hann-windowed naive DFTs of
// consecutive segments.
double band_fraction(const AudioBuffer& b, double lo, double hi, std::size_t segments) {
  const std::size_t n = 512;
  double band = 0.0, total = 0.0;
  const std::size_t stride = (b.size() - n) / segments;
  for (std::size_t s = 0; s < segments; ++s) {
    std::vector<std::complex<double>> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n);
      x[i] = w * b[s * stride + i];
    }
    const auto spec = oracle::dft(x);
    for (std::size_t k = 0; k <= n / 2; ++k) {
      const double f = static_cast<double>(k) * b.sample_rate() / n;
      const double p = std::norm(spec[k]);
      total += p;
      if (f >= lo && f <= hi) band += p;
    }
  }
  return band / total;
}

}  // namespace

TEST(Manifest, ValidTwoEntries) {
  oracle::TempDir dir;
  write_wav(oracle::sine(440, 16000, 1600), dir / "a.wav");
  write_wav(oracle::sine(220, 16000, 800), dir / "b.wav");
  write_text(dir / "m.jsonl",
             "{\"clip_id\": \"a\", \"wav_path\": \"a.wav\", \"transcript\": \"hello\", \"speaker_id\": \"s1\"}\n"
             "\n"
             "{\"clip_id\": \"b\", \"wav_path\": \"" + (dir / "b.wav").string() + "\"}\n");
  const auto m = load_manifest(dir / "m.jsonl");
  ASSERT_EQ(m.entries.size(), 2u);
  EXPECT_EQ(m.entries[0].clip_id, "a");
  EXPECT_EQ(m.entries[0].transcript, "hello");
  EXPECT_EQ(m.entries[0].speaker_id, "s1");
  EXPECT_FALSE(m.entries[1].transcript.has_value());
  EXPECT_EQ(m.resolve(m.entries[0]), dir / "a.wav");
}

TEST(Manifest, Errors) {
  oracle::TempDir dir;
  write_wav(oracle::sine(440, 16000, 1600), dir / "a.wav");

  write_text(dir / "empty.jsonl", "\n");
  EXPECT_NE(expect_load_error(dir / "empty.jsonl").find("no entries"), std::string::npos);

  write_text(dir / "dup.jsonl",
             "{\"clip_id\": \"spk7_001\", \"wav_path\": \"a.wav\"}\n{\"clip_id\": \"spk7_001\", \"wav_path\": \"a.wav\"}\n");
  EXPECT_NE(expect_load_error(dir / "dup.jsonl").find("spk7_001"), std::string::npos);

  write_text(dir / "missing.jsonl", "{\"clip_id\": \"x\", \"wav_path\": \"nope.wav\"}\n");
  EXPECT_NE(expect_load_error(dir / "missing.jsonl").find("'x'"), std::string::npos);

  write_text(dir / "bad.jsonl", "{\"clip_id\": \"x\", \"wav_path\": \n");
  expect_load_error(dir / "bad.jsonl");
  write_text(dir / "fields.jsonl", "{\"id\": \"x\"}\n");
  expect_load_error(dir / "fields.jsonl");

  expect_load_error(dir / "does-not-exist.jsonl");
}

TEST(Manifest, WriteLoadRoundTrip) {
  oracle::TempDir dir;
  write_wav(oracle::sine(440, 16000, 1600), dir / "a.wav");
  CorpusManifest m;
  m.root = dir.path();
  m.entries = {{"a", "a.wav", "some words", std::nullopt}, {"b", "a.wav", std::nullopt, "spk"}};
  write_manifest(m, dir / "m.jsonl");
  const auto back = load_manifest(dir / "m.jsonl");
  EXPECT_EQ(back.entries, m.entries);
}

TEST(LoadClips, ResamplesCropsAndPads) {
  oracle::TempDir dir;
  write_wav(oracle::sine(440, 44100, 44100 * 2), dir / "long.wav");
  write_wav(oracle::sine(440, 8000, 4000), dir / "short.wav");
  CorpusManifest m;
  m.root = dir.path();
  m.entries = {{"long", "long.wav", "t", std::nullopt}, {"short", "short.wav", std::nullopt, std::nullopt}};
  const auto clips = load_clips(m, 16000, 1.0);
  ASSERT_EQ(clips.size(), 2u);
  EXPECT_EQ(clips[0].audio.size(), 16000u);
  EXPECT_EQ(clips[1].audio.size(), 16000u);
  EXPECT_EQ(clips[0].audio.sample_rate(), 16000);
  EXPECT_EQ(clips[0].transcript, "t");
  EXPECT_NEAR(oracle::peak_frequency(clips[0].audio, 400, 480), 440.0, 1.0);
  // The 0.5 s clip is zero-padded.
  EXPECT_GT(std::abs(clips[1].audio[4000]), 0.0f);
  EXPECT_EQ(clips[1].audio[12000], 0.0f);

  const auto native = load_clips(m, 16000, 0.0);
  EXPECT_EQ(native[0].audio.size(), 32000u);
  EXPECT_EQ(native[1].audio.size(), 8000u);
}

TEST(LoadClips, UnreadableClipNamesIt) {
  oracle::TempDir dir;
  write_text(dir / "junk.wav", "not a wav file at all");
  CorpusManifest m;
  m.root = dir.path();
  m.entries = {{"junk", "junk.wav", std::nullopt, std::nullopt}};
  try {
    load_clips(m, 16000, 1.0);
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("junk"), std::string::npos);
  }
}

TEST(Synthetic, DeterministicAndSeedDependent) {
  EXPECT_EQ(synthesize_clip(3, 1.0, 16000, 5), synthesize_clip(3, 1.0, 16000, 5));
  EXPECT_NE(synthesize_clip(3, 1.0, 16000, 5), synthesize_clip(3, 1.0, 16000, 6));
  EXPECT_NE(synthesize_clip(3, 1.0, 16000, 5), synthesize_clip(4, 1.0, 16000, 5));
  EXPECT_EQ(synthetic_clips(4, 1.0, 16000, 5, 1)[2].audio, synthetic_clips(4, 1.0, 16000, 5, 3)[2].audio);
  EXPECT_EQ(synthetic_clip_id(7), "synth_00007");
}

TEST(Synthetic, LevelLengthAndSpeechBand) {
  for (std::size_t i = 0; i < 12; ++i) {
    const auto clip = synthesize_clip(i, 2.0, 16000, 1);
    ASSERT_EQ(clip.size(), 32000u);
    EXPECT_TRUE(clip.all_finite());
    EXPECT_LE(std::abs(20.0 * std::log10(clip.rms() / 0.1)), 1.0) << i;
    float peak = 0;
    for (float v : clip.samples()) peak = std::max(peak, std::abs(v));
    EXPECT_LT(peak, 1.0f);
    EXPECT_GE(band_fraction(clip, 80.0, 4000.0, 16), 0.9) << i;
  }
}

TEST(Synthetic, GeneratedCorpusOnDisk) {
  oracle::TempDir a, b;
  const auto ma = generate_synthetic_corpus(6, 5.0, 44100, 9, a.path(), 2);
  const auto mb = generate_synthetic_corpus(6, 5.0, 44100, 9, b.path(), 1);
  ASSERT_EQ(ma.entries.size(), 6u);
  const auto loaded = load_manifest(a / "manifest.jsonl");
  EXPECT_EQ(loaded.entries, ma.entries);
  for (const auto& e : ma.entries) {
    const auto audio = read_wav(ma.resolve(e));
    EXPECT_EQ(audio.size(), 220500u);
    EXPECT_EQ(audio.sample_rate(), 44100);
    EXPECT_EQ(read_bytes(ma.resolve(e)), read_bytes(mb.resolve(e))) << e.clip_id;
  }
  EXPECT_THROW(generate_synthetic_corpus(0, 5.0, 44100, 9, a.path()), ParameterError);
}
