#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "markbench/audio_buffer.hpp"
#include "markbench/band_split.hpp"
#include "markbench/cascade.hpp"
#include "markbench/plugin.hpp"
#include "markbench/watermark.hpp"

namespace markbench::eval {

enum class Condition { watermarked, clean };

std::string_view to_string(Condition c);
Condition parse_condition(std::string_view name);

/// Outcome of detecting one (clip, watermark, transform, condition) cell.
/// A failed trial has no score and carries the error text.
struct TrialRecord {
  std::string clip_id;
  std::string watermark_id;
  std::string transform_id;
  Condition condition = Condition::clean;
  std::optional<double> score;
  std::map<std::string, double> quality;
  std::optional<std::string> error;

  [[nodiscard]] bool ok() const { return score.has_value(); }
  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Watermark under test: the built-in spread-spectrum scheme or an
/// embedder/detector plugin pair, optionally band-split at native_rate.
struct BuiltinWatermark {
  wm::WatermarkKey key;
  friend bool operator==(const BuiltinWatermark&, const BuiltinWatermark&) = default;
};
struct PluginWatermark {
  plugin::PluginSpec embedder;
  plugin::PluginSpec detector;
  friend bool operator==(const PluginWatermark&, const PluginWatermark&) = default;
};

struct WatermarkSpec {
  std::string id;
  std::variant<BuiltinWatermark, PluginWatermark> scheme;
  /// Rate the scheme runs at; audio above it is band-split. Defaults to
  /// 16 kHz for the built-in scheme and to the audio rate for plugins.
  std::optional<int> native_rate;

  void validate() const;
  friend bool operator==(const WatermarkSpec&, const WatermarkSpec&) = default;
};

/// Embed/detect callables bound to a WatermarkSpec for audio at one rate.
struct WatermarkRunner {
  band::Processor embed;
  band::Scorer detect;
};
WatermarkRunner make_runner(const WatermarkSpec& spec, int audio_rate, std::uint64_t seed);

/// Quality metrics computed between untransformed and transformed
/// watermarked audio.
struct MetricsConfig {
  bool sim = true;  // MFCC-embedding cosine similarity
  bool lsd = true;  // log-spectral distance, skipped when lengths differ
  std::vector<plugin::PluginSpec> plugins;

  friend bool operator==(const MetricsConfig&, const MetricsConfig&) = default;
};

inline constexpr const char* kSimMetric = "sim";
inline constexpr const char* kLsdMetric = "lsd_db";
inline constexpr const char* kCerMetric = "asr_cer";
inline constexpr const char* kMosMetric = "squim_mos";

std::map<std::string, double> quality_metrics(const MetricsConfig& config, const AudioBuffer& reference,
                                              const AudioBuffer& test, std::uint64_t seed);

struct RowResult {
  std::string watermark_id;
  double tpr = 0.0;
  double threshold = 0.0;
  double auc = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t failed = 0;
  friend bool operator==(const RowResult&, const RowResult&) = default;
};

struct ReportRow {
  std::string transform_id;
  std::map<std::string, double> quality;  // means over successful watermarked trials
  std::vector<RowResult> detection;       // in watermark order
  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct ReportMetadata {
  std::size_t corpus_size = 0;
  std::uint64_t seed = 0;
  double fpr = 0.01;
  std::vector<std::string> watermark_ids;
  std::vector<std::string> plugins;  // executable and arguments of every plugin involved
  friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

struct RobustnessReport {
  std::vector<ReportRow> rows;  // in transform order
  ReportMetadata metadata;
  friend bool operator==(const RobustnessReport&, const RobustnessReport&) = default;
};

/// Builds the report from trial records. Each (transform, watermark) cell is
/// calibrated on its own transformed clean scores; failed trials are counted
/// and left out. Transform and watermark order follow the given id lists.
RobustnessReport aggregate(const std::vector<TrialRecord>& records, const std::vector<std::string>& transform_ids,
                           ReportMetadata metadata);

}  // namespace markbench::eval
