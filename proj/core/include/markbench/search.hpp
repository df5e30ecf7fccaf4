#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "markbench/cascade.hpp"
#include "markbench/corpus.hpp"
#include "markbench/evaluate.hpp"

namespace markbench::attack {

/// Built-in quality metrics usable as floors. Both compare the attacked
/// watermarked clip with the untouched watermarked clip.
inline constexpr const char* kSnrMetric = "snr_db";  // over the common prefix
inline constexpr const char* kSimFloorMetric = "sim";

struct AttackSearchConfig {
  std::vector<dsp::TransformSpec> candidates;
  /// metric name -> minimum acceptable mean over the calibration split
  std::map<std::string, double> quality_floor = {{kSnrMetric, 10.0}};
  std::size_t max_stages = 2;
  std::size_t beam_width = 4;
  double fpr = 0.01;
  /// Extra metrics (by plugin) that floors may refer to.
  std::vector<plugin::PluginSpec> metric_plugins;

  /// Throws ParameterError on max_stages or beam_width of 0, an fpr outside
  /// (0, 1), or a floor naming a metric nothing computes.
  void validate() const;
  friend bool operator==(const AttackSearchConfig&, const AttackSearchConfig&) = default;
};

/// Watermark as seen by the attacker's evaluation loop.
struct SearchTarget {
  band::Processor embed;
  band::Scorer detect;
};

struct CascadeScore {
  CascadeSpec cascade;
  double tpr = 1.0;                        // on the held-out split
  std::map<std::string, double> quality;   // means on the calibration split
  bool admissible = false;
};

struct SearchOutcome {
  CascadeSpec cascade;
  double tpr = 1.0;
  std::map<std::string, double> quality;
  double baseline_tpr = 1.0;       // identity cascade on the held-out split
  bool fallback = false;           // no admissible cascade; identity returned
  std::size_t evaluated = 0;       // cascades scored, identity included
  std::size_t calibration_clips = 0;
  std::size_t heldout_clips = 0;
  std::uint64_t seed = 0;
};

/// Which split a clip falls in: fnv1a(clip_id) parity, odd = held-out.
bool is_heldout(const std::string& clip_id);

/// Scores one cascade: quality means on the calibration clips, TPR at the
/// configured FPR on the held-out clips. `marked` parallels `clips`.
CascadeScore score_cascade(const AttackSearchConfig& cfg, const CascadeSpec& cascade, const SearchTarget& target,
                           const std::vector<corpus::Clip>& clips, const std::vector<AudioBuffer>& marked,
                           std::uint64_t seed, std::size_t workers = 1);

/// Strict ordering used to pick the best cascade: lower TPR, then fewer
/// stages, then higher quality (metrics compared in name order).
bool better(const CascadeScore& a, const CascadeScore& b);

/// Beam search over stage sequences of up to max_stages candidates. Cascades
/// meeting every quality floor fill the beam first, the rest get any spare
/// slots. The best admissible cascade seen is returned (identity with
/// `fallback` set if there is none). Warnings (small corpus, degenerate
/// split) go to `log`.
SearchOutcome search_cascade(const AttackSearchConfig& cfg, const SearchTarget& target,
                             const std::vector<corpus::Clip>& clips, std::uint64_t seed, std::size_t workers = 1,
                             std::ostream* log = nullptr);

void to_json(nlohmann::json& j, const AttackSearchConfig& cfg);
void from_json(const nlohmann::json& j, AttackSearchConfig& cfg);
void to_json(nlohmann::json& j, const SearchOutcome& outcome);

}  // namespace markbench::attack
