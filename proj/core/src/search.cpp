#include "markbench/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <set>

#include "markbench/errors.hpp"
#include "markbench/metrics.hpp"
#include "markbench/parallel.hpp"
#include "markbench/rng.hpp"
#include "markbench/serialize.hpp"
#include "markbench/stft.hpp"

namespace markbench::attack {

using nlohmann::json;

namespace {

constexpr std::size_t kRecommendedClips = 50;

bool builtin_metric(const std::string& name) { return name == kSnrMetric || name == kSimFloorMetric; }

struct ClipQuality {
  std::map<std::string, double> values;
  bool ok = true;
};

ClipQuality clip_quality(const AttackSearchConfig& cfg, const AudioBuffer& reference, const AudioBuffer& attacked,
                         std::uint64_t seed) {
  ClipQuality q;
  if (cfg.quality_floor.count(kSnrMetric)) {
    std::size_t n = std::min(reference.size(), attacked.size());
    try {
      q.values[kSnrMetric] = measure_snr(reference.samples().first(n), attacked.samples().first(n));
    } catch (const Error&) {
      q.values[kSnrMetric] = -std::numeric_limits<double>::infinity();
    }
  }
  if (cfg.quality_floor.count(kSimFloorMetric)) {
    eval::MetricsConfig mc;
    mc.lsd = false;
    auto m = eval::quality_metrics(mc, reference, attacked, seed);
    auto it = m.find(eval::kSimMetric);
    // Too short to embed: count as failing the floor.
    q.values[kSimFloorMetric] = it == m.end() ? -std::numeric_limits<double>::infinity() : it->second;
  }
  if (!cfg.metric_plugins.empty()) {
    eval::MetricsConfig mc;
    mc.sim = false;
    mc.lsd = false;
    mc.plugins = cfg.metric_plugins;
    for (const auto& [k, v] : eval::quality_metrics(mc, reference, attacked, seed))
      if (cfg.quality_floor.count(k) && !builtin_metric(k)) q.values[k] = v;
  }
  return q;
}

}  // namespace

void AttackSearchConfig::validate() const {
  if (max_stages < 1) throw ParameterError("max_stages must be at least 1");
  if (beam_width < 1) throw ParameterError("beam_width must be at least 1");
  if (!(fpr > 0.0 && fpr < 1.0)) throw ParameterError("search fpr must lie in (0, 1)");
  for (const auto& c : candidates) c.validate();
  for (const auto& [name, _] : quality_floor)
    if (!builtin_metric(name) && metric_plugins.empty())
      throw ParameterError("quality floor '" + name + "' refers to a metric that is not configured");
  for (const auto& p : metric_plugins) p.validate();
}

bool is_heldout(const std::string& clip_id) { return (fnv1a(clip_id) & 1U) != 0; }

bool better(const CascadeScore& a, const CascadeScore& b) {
  if (a.tpr != b.tpr) return a.tpr < b.tpr;
  if (a.cascade.stages.size() != b.cascade.stages.size()) return a.cascade.stages.size() < b.cascade.stages.size();
  for (auto ia = a.quality.begin(), ib = b.quality.begin(); ia != a.quality.end() && ib != b.quality.end();
       ++ia, ++ib)
    if (ia->second != ib->second) return ia->second > ib->second;
  return false;
}

CascadeScore score_cascade(const AttackSearchConfig& cfg, const CascadeSpec& cascade, const SearchTarget& target,
                           const std::vector<corpus::Clip>& clips, const std::vector<AudioBuffer>& marked,
                           std::uint64_t seed, std::size_t workers) {
  const std::size_t n = clips.size();
  std::vector<char> heldout(n);
  bool any_held = false, any_cal = false;
  for (std::size_t i = 0; i < n; ++i) {
    heldout[i] = is_heldout(clips[i].id);
    (heldout[i] ? any_held : any_cal) = true;
  }
  // A degenerate split (tiny corpora) falls back to using every clip for both roles.
  const bool shared = !(any_held && any_cal);

  std::vector<ClipQuality> quality(n);
  std::vector<double> pos(n, std::numeric_limits<double>::quiet_NaN()), neg(n, pos[0]);
  parallel_for(n, workers, [&](std::size_t i) {
    const std::string& id = clips[i].id;
    if (shared || !heldout[i]) {
      AudioBuffer attacked = apply_cascade(cascade.reseeded(derive_seed(derive_seed(seed, id), "calibration")),
                                           marked[i]);
      quality[i] = clip_quality(cfg, marked[i], attacked, derive_seed(seed, id));
    }
    if (shared || heldout[i]) {
      pos[i] = target.detect(apply_cascade(cascade.reseeded(derive_seed(derive_seed(seed, id), "watermarked")),
                                           marked[i]));
      neg[i] = target.detect(
          apply_cascade(cascade.reseeded(derive_seed(derive_seed(seed, id), "clean")), clips[i].audio));
    }
  });

  CascadeScore out;
  out.cascade = cascade;
  std::vector<double> p, c;
  std::map<std::string, double> sums;
  std::size_t cal = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (shared || heldout[i]) {
      p.push_back(pos[i]);
      c.push_back(neg[i]);
    }
    if (shared || !heldout[i]) {
      ++cal;
      for (const auto& [k, v] : quality[i].values) sums[k] += v;
    }
  }
  for (const auto& [k, s] : sums) out.quality[k] = s / static_cast<double>(cal);
  out.tpr = p.empty() ? 1.0 : metrics::tpr_at_fpr(p, c, cfg.fpr);
  out.admissible = true;
  for (const auto& [name, floor] : cfg.quality_floor) {
    auto it = out.quality.find(name);
    if (it == out.quality.end() || !(it->second >= floor)) out.admissible = false;
  }
  return out;
}

SearchOutcome search_cascade(const AttackSearchConfig& cfg, const SearchTarget& target,
                             const std::vector<corpus::Clip>& clips, std::uint64_t seed, std::size_t workers,
                             std::ostream* log) {
  cfg.validate();
  if (clips.empty()) throw ParameterError("attack search needs at least one clip");
  if (log && clips.size() < kRecommendedClips)
    *log << "[markbench] warning: attack search on " << clips.size() << " clips (at least " << kRecommendedClips
         << " recommended); TPR estimates will be coarse\n";

  SearchOutcome outcome;
  outcome.seed = seed;
  for (const auto& c : clips) (is_heldout(c.id) ? outcome.heldout_clips : outcome.calibration_clips)++;
  if (log && (outcome.heldout_clips == 0 || outcome.calibration_clips == 0))
    *log << "[markbench] warning: clip ids fall in one split only; calibration and held-out share all clips\n";

  std::vector<AudioBuffer> marked(clips.size());
  parallel_for(clips.size(), workers, [&](std::size_t i) { marked[i] = target.embed(clips[i].audio); });

  const std::uint64_t eval_seed = derive_seed(seed, "search");
  CascadeScore identity = score_cascade(cfg, CascadeSpec{}, target, clips, marked, eval_seed, workers);
  outcome.baseline_tpr = identity.tpr;
  outcome.evaluated = 1;

  std::optional<CascadeScore> best;
  std::vector<CascadeSpec> beam = {CascadeSpec{}};
  for (std::size_t depth = 1; depth <= cfg.max_stages && !cfg.candidates.empty(); ++depth) {
    std::vector<CascadeScore> level;
    for (const auto& prefix : beam)
      for (const auto& cand : cfg.candidates) {
        CascadeSpec next = prefix;
        next.stages.push_back(cand);
        level.push_back(score_cascade(cfg, next, target, clips, marked, eval_seed, workers));
      }
    outcome.evaluated += level.size();
    if (log)
      *log << "[markbench] search depth " << depth << ": " << level.size() << " cascades, "
           << std::count_if(level.begin(), level.end(), [](const auto& s) { return s.admissible; })
           << " admissible\n";

    // Admissible cascades take the beam first. Spare slots go to the best
    // inadmissible ones, since a later stage can restore quality (gain down
    // then up); with a wide enough beam this is exhaustive enumeration.
    std::stable_sort(level.begin(), level.end(), [](const CascadeScore& a, const CascadeScore& b) {
      if (a.admissible != b.admissible) return a.admissible;
      return better(a, b);
    });
    if (!level.empty() && level.front().admissible && (!best || better(level.front(), *best))) best = level.front();

    beam.clear();
    for (std::size_t i = 0; i < level.size() && beam.size() < cfg.beam_width; ++i) beam.push_back(level[i].cascade);
    if (beam.empty()) break;
  }

  if (best) {
    outcome.cascade = best->cascade;
    outcome.tpr = best->tpr;
    outcome.quality = best->quality;
  } else {
    outcome.cascade = CascadeSpec{};
    outcome.tpr = identity.tpr;
    outcome.quality = identity.quality;
    outcome.fallback = true;
    if (log) *log << "[markbench] warning: no admissible cascade; returning identity\n";
  }
  return outcome;
}

void to_json(json& j, const AttackSearchConfig& cfg) {
  json floors = json::object();
  for (const auto& [k, v] : cfg.quality_floor) floors[k] = json_util::number(v);
  j = {{"candidates", cfg.candidates}, {"quality_floor", floors},         {"max_stages", cfg.max_stages},
       {"beam_width", cfg.beam_width}, {"fpr", cfg.fpr},                  {"metric_plugins", cfg.metric_plugins}};
}

void from_json(const json& j, AttackSearchConfig& cfg) {
  if (!j.is_object()) throw LoadError("attack search config must be a JSON object");
  static const std::set<std::string> known = {"candidates", "quality_floor", "max_stages",
                                              "beam_width", "fpr",           "metric_plugins"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw LoadError("unknown attack search field '" + key + "'");
  try {
    AttackSearchConfig c;
    c.candidates = json_util::require(j, "candidates").get<std::vector<dsp::TransformSpec>>();
    if (j.contains("quality_floor")) {
      c.quality_floor.clear();
      for (const auto& [k, v] : j.at("quality_floor").items()) c.quality_floor[k] = json_util::to_double(v);
    }
    c.max_stages = j.value("max_stages", c.max_stages);
    c.beam_width = j.value("beam_width", c.beam_width);
    c.fpr = j.value("fpr", c.fpr);
    if (j.contains("metric_plugins")) c.metric_plugins = j.at("metric_plugins").get<std::vector<plugin::PluginSpec>>();
    cfg = std::move(c);
  } catch (const json::exception& e) {
    throw LoadError(std::string("malformed attack search config: ") + e.what());
  }
}

void to_json(json& j, const SearchOutcome& o) {
  json quality = json::object();
  for (const auto& [k, v] : o.quality) quality[k] = json_util::number(v);
  j = {{"cascade", o.cascade},
       {"description", o.cascade.describe()},
       {"tpr_at_fpr", o.tpr},
       {"quality", quality},
       {"baseline_tpr", o.baseline_tpr},
       {"fallback", o.fallback},
       {"evaluated", o.evaluated},
       {"calibration_clips", o.calibration_clips},
       {"heldout_clips", o.heldout_clips},
       {"seed", o.seed}};
}

}  // namespace markbench::attack
