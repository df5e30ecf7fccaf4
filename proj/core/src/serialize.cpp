#include "markbench/serialize.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <type_traits>

#include "markbench/errors.hpp"

using nlohmann::json;

namespace markbench::json_util {

json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

double to_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  throw LoadError("expected a number, got " + j.dump());
}

const json& require(const json& j, const char* key) {
  if (!j.is_object()) throw LoadError(std::string("expected an object holding '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) throw LoadError(std::string("missing required field '") + key + "'");
  return *it;
}

}  // namespace markbench::json_util

namespace markbench {
namespace {

using json_util::number;
using json_util::to_double;

json range_json(const dsp::Range& r) {
  if (r.is_fixed()) return number(r.lo);
  return json::array({number(r.lo), number(r.hi)});
}

dsp::Range parse_range(const json& j) {
  if (j.is_array()) {
    if (j.size() != 2) throw LoadError("range must have two elements");
    return {to_double(j[0]), to_double(j[1])};
  }
  return dsp::Range::fixed(to_double(j));
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

void read_double(const json& j, const char* key, double& out) {
  if (auto it = j.find(key); it != j.end()) out = to_double(*it);
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& what) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw LoadError(what + ": unknown field '" + key + "'");
  }
}

}  // namespace

namespace plugin {

void to_json(json& j, const PluginSpec& spec) {
  j = json{{"executable", spec.executable.string()},
           {"role", std::string(to_string(spec.role))},
           {"args", spec.args},
           {"timeout_s", spec.timeout_s}};
  if (!spec.workdir.empty()) j["workdir"] = spec.workdir.string();
}

void from_json(const json& j, PluginSpec& spec) {
  reject_unknown(j, {"executable", "role", "args", "timeout_s", "workdir"}, "plugin");
  spec = PluginSpec{};
  spec.executable = json_util::require(j, "executable").get<std::string>();
  if (auto it = j.find("role"); it != j.end()) spec.role = parse_role(it->get<std::string>());
  read_if(j, "args", spec.args);
  read_double(j, "timeout_s", spec.timeout_s);
  if (auto it = j.find("workdir"); it != j.end()) spec.workdir = it->get<std::string>();
}

}  // namespace plugin

namespace wm {

void to_json(json& j, const WatermarkKey& key) {
  j = json{{"key", key.key}, {"band_lo", key.band_lo}, {"band_hi", key.band_hi}, {"strength_db", key.strength_db}};
}

void from_json(const json& j, WatermarkKey& key) {
  reject_unknown(j, {"key", "band_lo", "band_hi", "strength_db"}, "watermark key");
  key = WatermarkKey{};
  key.key = json_util::require(j, "key").get<std::uint64_t>();
  read_double(j, "band_lo", key.band_lo);
  read_double(j, "band_hi", key.band_hi);
  read_double(j, "strength_db", key.strength_db);
}

}  // namespace wm

namespace dsp {

void to_json(json& j, const TransformSpec& spec) {
  j = json{{"kind", std::string(to_string(spec.kind()))}, {"seed", spec.seed}};
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NoiseParams>) {
          j["snr_db"] = number(p.snr_db);
        } else if constexpr (std::is_same_v<P, EqualizeParams>) {
          j["centers_hz"] = p.centers_hz;
          if (p.gains_db) j["gains_db"] = *p.gains_db;
          j["gain_range"] = range_json(p.gain_range);
          j["q"] = p.q;
        } else if constexpr (std::is_same_v<P, LowPassParams> || std::is_same_v<P, HighPassParams>) {
          j["cutoff_hz"] = p.cutoff_hz;
        } else if constexpr (std::is_same_v<P, PitchShiftParams>) {
          j["semitones"] = range_json(p.semitones);
        } else if constexpr (std::is_same_v<P, SpeedParams> || std::is_same_v<P, TimeStretchParams>) {
          j["factor"] = range_json(p.factor);
        } else if constexpr (std::is_same_v<P, ReverbParams>) {
          j["ir_paths"] = p.ir_paths;
          j["rt60_s"] = p.rt60_s;
        } else if constexpr (std::is_same_v<P, GainParams>) {
          j["db"] = p.db;
        } else if constexpr (std::is_same_v<P, DropoutParams>) {
          j["p"] = p.p;
        } else if constexpr (std::is_same_v<P, QuantizeParams>) {
          j["bits"] = p.bits;
        } else if constexpr (std::is_same_v<P, TimeShiftParams>) {
          j["samples"] = p.samples;
          j["wrap"] = p.wrap;
        } else if constexpr (std::is_same_v<P, DenoiseParams>) {
          j["snr_db"] = number(p.snr_db);
          j["oversubtraction"] = p.oversubtraction;
          if (p.denoiser) j["denoiser"] = *p.denoiser;
          if (p.denoiser_rate) j["denoiser_rate"] = *p.denoiser_rate;
        } else {
          j["plugin"] = p.spec;
          if (p.native_rate) j["native_rate"] = *p.native_rate;
        }
      },
      spec.params);
}

void from_json(const json& j, TransformSpec& spec) {
  const auto kind = parse_transform_kind(json_util::require(j, "kind").get<std::string>());
  spec = TransformSpec{};
  read_if(j, "seed", spec.seed);
  const std::string what = "transform '" + std::string(to_string(kind)) + "'";
  switch (kind) {
    case TransformKind::noise: {
      reject_unknown(j, {"kind", "seed", "snr_db"}, what);
      NoiseParams p;
      read_double(j, "snr_db", p.snr_db);
      spec.params = p;
      break;
    }
    case TransformKind::equalize: {
      reject_unknown(j, {"kind", "seed", "centers_hz", "gains_db", "gain_range", "q"}, what);
      EqualizeParams p;
      read_if(j, "centers_hz", p.centers_hz);
      if (auto it = j.find("gains_db"); it != j.end() && !it->is_null()) p.gains_db = it->get<std::array<double, 6>>();
      if (auto it = j.find("gain_range"); it != j.end()) p.gain_range = parse_range(*it);
      read_double(j, "q", p.q);
      spec.params = p;
      break;
    }
    case TransformKind::low_pass: {
      reject_unknown(j, {"kind", "seed", "cutoff_hz"}, what);
      LowPassParams p;
      read_double(j, "cutoff_hz", p.cutoff_hz);
      spec.params = p;
      break;
    }
    case TransformKind::high_pass: {
      reject_unknown(j, {"kind", "seed", "cutoff_hz"}, what);
      HighPassParams p;
      read_double(j, "cutoff_hz", p.cutoff_hz);
      spec.params = p;
      break;
    }
    case TransformKind::pitch_shift: {
      reject_unknown(j, {"kind", "seed", "semitones"}, what);
      PitchShiftParams p;
      if (auto it = j.find("semitones"); it != j.end()) p.semitones = parse_range(*it);
      spec.params = p;
      break;
    }
    case TransformKind::reverb: {
      reject_unknown(j, {"kind", "seed", "ir_paths", "rt60_s"}, what);
      ReverbParams p;
      read_if(j, "ir_paths", p.ir_paths);
      read_double(j, "rt60_s", p.rt60_s);
      spec.params = p;
      break;
    }
    case TransformKind::speed: {
      reject_unknown(j, {"kind", "seed", "factor"}, what);
      SpeedParams p;
      if (auto it = j.find("factor"); it != j.end()) p.factor = parse_range(*it);
      spec.params = p;
      break;
    }
    case TransformKind::time_stretch: {
      reject_unknown(j, {"kind", "seed", "factor"}, what);
      TimeStretchParams p;
      if (auto it = j.find("factor"); it != j.end()) p.factor = parse_range(*it);
      spec.params = p;
      break;
    }
    case TransformKind::gain: {
      reject_unknown(j, {"kind", "seed", "db"}, what);
      GainParams p;
      read_double(j, "db", p.db);
      spec.params = p;
      break;
    }
    case TransformKind::dropout: {
      reject_unknown(j, {"kind", "seed", "p"}, what);
      DropoutParams p;
      read_double(j, "p", p.p);
      spec.params = p;
      break;
    }
    case TransformKind::quantize: {
      reject_unknown(j, {"kind", "seed", "bits"}, what);
      QuantizeParams p;
      read_if(j, "bits", p.bits);
      spec.params = p;
      break;
    }
    case TransformKind::time_shift: {
      reject_unknown(j, {"kind", "seed", "samples", "wrap"}, what);
      TimeShiftParams p;
      read_if(j, "samples", p.samples);
      read_if(j, "wrap", p.wrap);
      spec.params = p;
      break;
    }
    case TransformKind::denoise: {
      reject_unknown(j, {"kind", "seed", "snr_db", "oversubtraction", "denoiser", "denoiser_rate"}, what);
      DenoiseParams p;
      read_double(j, "snr_db", p.snr_db);
      read_double(j, "oversubtraction", p.oversubtraction);
      if (auto it = j.find("denoiser"); it != j.end() && !it->is_null()) p.denoiser = it->get<plugin::PluginSpec>();
      if (auto it = j.find("denoiser_rate"); it != j.end() && !it->is_null()) p.denoiser_rate = it->get<int>();
      spec.params = p;
      break;
    }
    case TransformKind::plugin: {
      reject_unknown(j, {"kind", "seed", "plugin", "native_rate"}, what);
      PluginParams p;
      p.spec = json_util::require(j, "plugin").get<plugin::PluginSpec>();
      if (auto it = j.find("native_rate"); it != j.end() && !it->is_null()) p.native_rate = it->get<int>();
      spec.params = p;
      break;
    }
  }
}

}  // namespace dsp

namespace attack {

void to_json(json& j, const CascadeSpec& cascade) { j = json{{"stages", cascade.stages}}; }

void from_json(const json& j, CascadeSpec& cascade) {
  cascade = CascadeSpec{};
  if (j.is_array()) {
    cascade.stages = j.get<std::vector<dsp::TransformSpec>>();
  } else {
    cascade.stages = json_util::require(j, "stages").get<std::vector<dsp::TransformSpec>>();
  }
}

}  // namespace attack

namespace eval {

void to_json(json& j, const WatermarkSpec& spec) {
  j = json{{"id", spec.id}};
  if (const auto* b = std::get_if<BuiltinWatermark>(&spec.scheme)) {
    j["builtin"] = b->key;
  } else {
    const auto& p = std::get<PluginWatermark>(spec.scheme);
    j["plugin"] = json{{"embedder", p.embedder}, {"detector", p.detector}};
  }
  if (spec.native_rate) j["native_rate"] = *spec.native_rate;
}

void from_json(const json& j, WatermarkSpec& spec) {
  reject_unknown(j, {"id", "builtin", "plugin", "native_rate"}, "watermark");
  spec = WatermarkSpec{};
  spec.id = json_util::require(j, "id").get<std::string>();
  const bool builtin = j.contains("builtin");
  const bool external = j.contains("plugin");
  if (builtin == external) throw LoadError("watermark '" + spec.id + "' needs exactly one of 'builtin' or 'plugin'");
  if (builtin) {
    spec.scheme = BuiltinWatermark{j["builtin"].get<wm::WatermarkKey>()};
  } else {
    const auto& p = j["plugin"];
    PluginWatermark pw{json_util::require(p, "embedder").get<plugin::PluginSpec>(),
                       json_util::require(p, "detector").get<plugin::PluginSpec>()};
    pw.embedder.role = plugin::Role::embedder;
    pw.detector.role = plugin::Role::detector;
    spec.scheme = pw;
  }
  if (auto it = j.find("native_rate"); it != j.end() && !it->is_null()) spec.native_rate = it->get<int>();
}

void to_json(json& j, const MetricsConfig& config) {
  j = json{{"sim", config.sim}, {"lsd", config.lsd}, {"plugins", config.plugins}};
}

void from_json(const json& j, MetricsConfig& config) {
  reject_unknown(j, {"sim", "lsd", "plugins"}, "metrics");
  config = MetricsConfig{};
  read_if(j, "sim", config.sim);
  read_if(j, "lsd", config.lsd);
  read_if(j, "plugins", config.plugins);
  for (auto& p : config.plugins) p.role = plugin::Role::metric;
}

void to_json(json& j, const TrialRecord& r) {
  j = json{{"clip_id", r.clip_id},
           {"watermark_id", r.watermark_id},
           {"transform_id", r.transform_id},
           {"condition", std::string(to_string(r.condition))},
           {"score", r.score ? number(*r.score) : json(nullptr)}};
  if (!r.quality.empty()) {
    json q = json::object();
    for (const auto& [k, v] : r.quality) q[k] = number(v);
    j["quality"] = q;
  }
  if (r.error) j["error"] = *r.error;
}

void from_json(const json& j, TrialRecord& r) {
  r = TrialRecord{};
  r.clip_id = json_util::require(j, "clip_id").get<std::string>();
  r.watermark_id = json_util::require(j, "watermark_id").get<std::string>();
  r.transform_id = json_util::require(j, "transform_id").get<std::string>();
  r.condition = parse_condition(json_util::require(j, "condition").get<std::string>());
  if (auto it = j.find("score"); it != j.end() && !it->is_null()) r.score = to_double(*it);
  if (auto it = j.find("quality"); it != j.end()) {
    for (const auto& [k, v] : it->items()) r.quality[k] = to_double(v);
  }
  if (auto it = j.find("error"); it != j.end() && !it->is_null()) r.error = it->get<std::string>();
}

void to_json(json& j, const RobustnessReport& report) {
  const auto& m = report.metadata;
  j["metadata"] = json{{"corpus_size", m.corpus_size},
                       {"seed", m.seed},
                       {"fpr", m.fpr},
                       {"watermarks", m.watermark_ids},
                       {"plugins", m.plugins}};
  json rows = json::array();
  for (const auto& row : report.rows) {
    json q = json::object();
    for (const auto& [k, v] : row.quality) q[k] = number(v);
    json det = json::array();
    for (const auto& d : row.detection) {
      det.push_back(json{{"watermark", d.watermark_id},
                         {"tpr_at_fpr", number(d.tpr)},
                         {"threshold", number(d.threshold)},
                         {"auc", number(d.auc)},
                         {"positives", d.positives},
                         {"negatives", d.negatives},
                         {"failed", d.failed}});
    }
    rows.push_back(json{{"transform", row.transform_id}, {"quality", q}, {"detection", det}});
  }
  j["rows"] = rows;
}

}  // namespace eval
}  // namespace markbench
