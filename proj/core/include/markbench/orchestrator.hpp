#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "markbench/cascade.hpp"
#include "markbench/corpus.hpp"
#include "markbench/evaluate.hpp"
#include "markbench/report.hpp"

namespace markbench::orchestrator {

struct SyntheticCorpus {
  std::size_t clips = corpus::kDefaultClipCount;
  std::uint64_t seed = 0;
  friend bool operator==(const SyntheticCorpus&, const SyntheticCorpus&) = default;
};

/// Where clips come from and how they are normalized at load time.
struct CorpusSource {
  std::optional<std::filesystem::path> manifest;
  std::optional<SyntheticCorpus> synthetic;
  int sample_rate = corpus::kDefaultSampleRate;
  double duration_s = corpus::kDefaultDurationS;
  std::size_t limit = 0;  // 0 keeps every clip
  friend bool operator==(const CorpusSource&, const CorpusSource&) = default;
};

struct LabeledTransform {
  std::string label;
  attack::CascadeSpec cascade;
  std::optional<report::SweepPoint> sweep;
  friend bool operator==(const LabeledTransform&, const LabeledTransform&) = default;
};

/// Everything an evaluation run needs. Serialized as one JSON document.
struct EvaluationPlan {
  CorpusSource corpus;
  std::vector<eval::WatermarkSpec> watermarks;
  std::vector<LabeledTransform> transforms;
  eval::MetricsConfig metrics;
  double fpr = 0.01;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "markbench-run";
  std::size_t workers = 1;

  /// Throws ParameterError for duplicate labels/ids, an fpr outside (0, 1),
  /// a missing corpus source or invalid nested specs.
  void validate() const;
  friend bool operator==(const EvaluationPlan&, const EvaluationPlan&) = default;
};

void to_json(nlohmann::json& j, const EvaluationPlan& plan);
void from_json(const nlohmann::json& j, EvaluationPlan& plan);
EvaluationPlan load_plan(const std::filesystem::path& path);
void save_plan(const EvaluationPlan& plan, const std::filesystem::path& path);

/// Worker count after the MARKBENCH_WORKERS environment override.
std::size_t effective_workers(const EvaluationPlan& plan);

std::vector<corpus::Clip> load_corpus(const EvaluationPlan& plan, std::size_t workers = 1);

struct RunStats {
  std::size_t trials = 0;      // (clip, watermark, transform) cells
  std::size_t cache_hits = 0;
  std::size_t failed = 0;      // cells with at least one failed condition
};

/// Runs every (clip, watermark, transform) trial and returns records ordered
/// by watermark, transform, clip, then condition (watermarked first). With a
/// cache directory, finished trials are stored there keyed by a content hash
/// of (clip audio, watermark, cascade, seed, metrics) and reused.
std::vector<eval::TrialRecord> run_trials(const EvaluationPlan& plan, const std::vector<corpus::Clip>& clips,
                                          std::size_t workers, const std::optional<std::filesystem::path>& cache_dir,
                                          RunStats* stats = nullptr, std::ostream* progress = nullptr);

eval::ReportMetadata report_metadata(const EvaluationPlan& plan, std::size_t corpus_size);
std::vector<std::string> transform_ids(const EvaluationPlan& plan);

/// In-memory evaluation: no files are read or written besides the corpus.
eval::RobustnessReport evaluate(const EvaluationPlan& plan);

struct RunResult {
  std::filesystem::path run_dir;
  eval::RobustnessReport report;
  RunStats stats;
};

/// Full run into plan.output_dir:
///   plan.json               resolved plan
///   records/trials.jsonl    one TrialRecord per line
///   records/run.json        transform order, report metadata, sweep points
///   reports/report.{csv,json,txt}, reports/plot_data.csv (sweeps only)
///   cache/<hash>.json       per-trial cache
RunResult run_parallel(const EvaluationPlan& plan, std::ostream* progress = nullptr);

/// Rebuilds the report from a run directory's records without recomputation.
eval::RobustnessReport rerender(const std::filesystem::path& run_dir);
std::map<std::string, report::SweepPoint> load_sweeps(const std::filesystem::path& run_dir);

void write_records(const std::vector<eval::TrialRecord>& records, const std::filesystem::path& path);
std::vector<eval::TrialRecord> read_records(const std::filesystem::path& path);

}  // namespace markbench::orchestrator
