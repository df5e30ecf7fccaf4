#pragma once

#include <map>
#include <string>

#include "markbench/evaluate.hpp"

namespace markbench::report {

/// Quality columns always present, in this order, before any plugin-provided
/// metrics; missing values render as "n/a".
inline constexpr const char* kQualityColumns[] = {eval::kCerMetric, eval::kSimMetric, eval::kMosMetric,
                                                  eval::kLsdMetric};

/// One row per transform: quality columns, then for each watermark its
/// TPR at the configured FPR, calibrated threshold and failed-trial count.
std::string render_csv(const eval::RobustnessReport& report);
std::string render_json(const eval::RobustnessReport& report);
/// Fixed-width text table with the CSV's columns.
std::string render_table(const eval::RobustnessReport& report);

/// Codec operating point of a transform row, for bitrate-sweep plots.
struct SweepPoint {
  std::string codec;
  double bitrate_kbps = 0.0;
  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

/// Tidy CSV (codec, bitrate, watermark, tpr, quality) over rows that carry a
/// sweep point; `quality_metric` selects the quality column.
std::string render_plot_data(const eval::RobustnessReport& report, const std::map<std::string, SweepPoint>& sweep,
                             const std::string& quality_metric = eval::kSimMetric);

}  // namespace markbench::report
