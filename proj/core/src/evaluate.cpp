#include "markbench/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <tuple>

#include "markbench/errors.hpp"
#include "markbench/metrics.hpp"

namespace markbench::eval {

std::string_view to_string(Condition c) { return c == Condition::watermarked ? "watermarked" : "clean"; }

Condition parse_condition(std::string_view name) {
  if (name == "watermarked") return Condition::watermarked;
  if (name == "clean") return Condition::clean;
  throw ParameterError("unknown condition '" + std::string(name) + "'");
}

void WatermarkSpec::validate() const {
  if (id.empty()) throw ParameterError("watermark id must not be empty");
  if (native_rate && *native_rate <= 0) throw ParameterError("watermark '" + id + "': native rate must be positive");
  if (const auto* b = std::get_if<BuiltinWatermark>(&scheme)) {
    b->key.validate(native_rate.value_or(wm::SpreadSpectrumWatermark::kDefaultNativeRate));
  } else {
    const auto& p = std::get<PluginWatermark>(scheme);
    p.embedder.validate();
    p.detector.validate();
  }
}

WatermarkRunner make_runner(const WatermarkSpec& spec, int audio_rate, std::uint64_t seed) {
  spec.validate();
  band::Processor embed;
  band::Scorer detect;
  int native = audio_rate;
  if (const auto* b = std::get_if<BuiltinWatermark>(&spec.scheme)) {
    native = spec.native_rate.value_or(wm::SpreadSpectrumWatermark::kDefaultNativeRate);
    const auto scheme = std::make_shared<wm::SpreadSpectrumWatermark>(native);
    const wm::WatermarkKey key = b->key;
    embed = [scheme, key](const AudioBuffer& x) { return scheme->embed(x, key); };
    detect = [scheme, key](const AudioBuffer& x) { return scheme->detect(x, key); };
  } else {
    const auto& p = std::get<PluginWatermark>(spec.scheme);
    native = spec.native_rate.value_or(audio_rate);
    embed = [e = p.embedder, seed](const AudioBuffer& x) { return plugin::run_embed_plugin(e, x, seed); };
    detect = [d = p.detector, seed](const AudioBuffer& x) { return plugin::run_detect_plugin(d, x, seed); };
  }
  if (audio_rate < native) {
    throw ParameterError("watermark '" + spec.id + "' runs at " + std::to_string(native) + " Hz but audio is at " +
                         std::to_string(audio_rate) + " Hz");
  }
  if (audio_rate == native) return {embed, detect};
  return {[embed, native](const AudioBuffer& x) { return band::process_banded(embed, native, x); },
          [detect, native](const AudioBuffer& x) { return band::detect_banded(detect, native, x); }};
}

std::map<std::string, double> quality_metrics(const MetricsConfig& config, const AudioBuffer& reference,
                                              const AudioBuffer& test, std::uint64_t seed) {
  std::map<std::string, double> out;
  const auto one_second = [](const AudioBuffer& b) { return b.size() >= static_cast<std::size_t>(b.sample_rate()); };
  if (config.sim && one_second(reference) && one_second(test) && reference.sample_rate() == test.sample_rate()) {
    const auto a = metrics::mfcc_embedding(reference);
    const auto b = metrics::mfcc_embedding(test);
    out[kSimMetric] = metrics::cosine_similarity(a, b);
  }
  if (config.lsd && reference.size() == test.size() && reference.sample_rate() == test.sample_rate()) {
    out[kLsdMetric] = metrics::log_spectral_distance(reference, test);
  }
  for (const auto& p : config.plugins) {
    for (const auto& [name, value] : plugin::run_metric_plugin(p, reference, test, seed)) out[name] = value;
  }
  return out;
}

RobustnessReport aggregate(const std::vector<TrialRecord>& records, const std::vector<std::string>& transform_ids,
                           ReportMetadata metadata) {
  using Key = std::tuple<std::string, std::string, std::string>;  // transform, watermark, clip
  struct Pair {
    const TrialRecord* marked = nullptr;
    const TrialRecord* clean = nullptr;
  };
  std::map<Key, Pair> pairs;
  for (const auto& r : records) {
    Pair& p = pairs[{r.transform_id, r.watermark_id, r.clip_id}];
    (r.condition == Condition::watermarked ? p.marked : p.clean) = &r;
  }

  RobustnessReport report;
  report.metadata = std::move(metadata);
  for (const auto& transform : transform_ids) {
    ReportRow row;
    row.transform_id = transform;
    std::map<std::string, std::pair<double, std::size_t>> quality_sums;
    for (const auto& watermark : report.metadata.watermark_ids) {
      RowResult cell;
      cell.watermark_id = watermark;
      std::vector<double> pos;
      std::vector<double> neg;
      auto it = pairs.lower_bound({transform, watermark, std::string()});
      for (; it != pairs.end() && std::get<0>(it->first) == transform && std::get<1>(it->first) == watermark; ++it) {
        const Pair& p = it->second;
        // A clip counts only when both conditions succeeded, keeping the cell balanced.
        if (!p.marked || !p.clean || !p.marked->ok() || !p.clean->ok()) {
          ++cell.failed;
          continue;
        }
        pos.push_back(*p.marked->score);
        neg.push_back(*p.clean->score);
        for (const auto& [name, value] : p.marked->quality) {
          auto& [sum, n] = quality_sums[name];
          sum += value;
          ++n;
        }
      }
      cell.positives = pos.size();
      cell.negatives = neg.size();
      if (neg.empty()) {
        cell.threshold = std::numeric_limits<double>::quiet_NaN();
        cell.auc = std::numeric_limits<double>::quiet_NaN();
      } else {
        cell.threshold = metrics::calibrate_threshold(neg, report.metadata.fpr);
        cell.tpr = metrics::pass_rate(pos, cell.threshold);
        cell.auc = metrics::roc(pos, neg).auc;
      }
      row.detection.push_back(std::move(cell));
    }
    for (const auto& [name, acc] : quality_sums) row.quality[name] = acc.first / static_cast<double>(acc.second);
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace markbench::eval
