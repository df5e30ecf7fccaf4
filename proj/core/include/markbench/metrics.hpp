#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "markbench/audio_buffer.hpp"

namespace markbench::metrics {

/// Decision threshold for "score >= tau means watermarked" whose false-positive
/// rate on `clean_scores` does not exceed `fpr`.
///
/// With k = floor(fpr * N), tau is the smallest observed clean score with at
/// most k clean scores at or above it. When no observed score qualifies (k = 0,
/// or the top score is tied more than k times) tau is nudged just above the
/// maximum, so no clean score passes.
double calibrate_threshold(std::span<const double> clean_scores, double fpr);

/// Fraction of positives at or above the threshold calibrated on clean scores.
double tpr_at_fpr(std::span<const double> positive_scores, std::span<const double> clean_scores, double fpr = 0.01);

/// Fraction of scores at or above tau.
double pass_rate(std::span<const double> scores, double tau);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0, 0) to (1, 1), fpr non-decreasing
  double auc = 0.0;
};

/// Empirical ROC over all distinct thresholds; AUC by the trapezoid rule.
RocCurve roc(std::span<const double> positive_scores, std::span<const double> clean_scores);

/// Lower-cases ASCII letters, collapses whitespace runs to one space and trims.
std::u32string normalize_transcript(std::string_view utf8);
std::size_t edit_distance(std::u32string_view a, std::u32string_view b);

/// Character error rate: unit-cost Levenshtein distance over the normalized
/// reference length. Throws ParameterError when the reference normalizes to empty.
double cer(std::string_view reference, std::string_view hypothesis);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

inline constexpr std::size_t kMfccCoefficients = 20;
inline constexpr std::size_t kMelBands = 40;

/// Speaker-embedding proxy: mean and standard deviation over frames of
/// MFCCs 1..20 (c0, the level term, is excluded), i.e. 40 values.
std::vector<double> mfcc_embedding(const AudioBuffer& buffer);

/// Mean over frames of the RMS (over bins) log-magnitude difference in dB.
double log_spectral_distance(const AudioBuffer& reference, const AudioBuffer& test);

}  // namespace markbench::metrics
