#pragma once

#include <nlohmann/json.hpp>

#include "markbench/cascade.hpp"
#include "markbench/evaluate.hpp"
#include "markbench/plugin.hpp"
#include "markbench/transforms.hpp"
#include "markbench/watermark.hpp"

// JSON forms of the configuration and record types. Transform specs are flat
// objects: {"kind": "noise", "snr_db": 20, "seed": 7}. Ranges accept a number
// (fixed value) or a two-element array. Infinite values are written as the
// strings "inf" and "-inf".

namespace markbench::plugin {
void to_json(nlohmann::json& j, const PluginSpec& spec);
void from_json(const nlohmann::json& j, PluginSpec& spec);
}  // namespace markbench::plugin

namespace markbench::wm {
void to_json(nlohmann::json& j, const WatermarkKey& key);
void from_json(const nlohmann::json& j, WatermarkKey& key);
}  // namespace markbench::wm

namespace markbench::dsp {
void to_json(nlohmann::json& j, const TransformSpec& spec);
void from_json(const nlohmann::json& j, TransformSpec& spec);
}  // namespace markbench::dsp

namespace markbench::attack {
void to_json(nlohmann::json& j, const CascadeSpec& cascade);
void from_json(const nlohmann::json& j, CascadeSpec& cascade);
}  // namespace markbench::attack

namespace markbench::eval {
void to_json(nlohmann::json& j, const WatermarkSpec& spec);
void from_json(const nlohmann::json& j, WatermarkSpec& spec);
void to_json(nlohmann::json& j, const MetricsConfig& config);
void from_json(const nlohmann::json& j, MetricsConfig& config);
void to_json(nlohmann::json& j, const TrialRecord& record);
void from_json(const nlohmann::json& j, TrialRecord& record);
void to_json(nlohmann::json& j, const RobustnessReport& report);
}  // namespace markbench::eval

namespace markbench::json_util {

/// Number, or "inf"/"-inf" for infinities (JSON has no literal for them).
nlohmann::json number(double v);
double to_double(const nlohmann::json& j);

/// Fetches a required member, throwing LoadError naming the key.
const nlohmann::json& require(const nlohmann::json& j, const char* key);

}  // namespace markbench::json_util
