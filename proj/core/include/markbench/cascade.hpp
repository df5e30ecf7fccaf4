#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "markbench/audio_buffer.hpp"
#include "markbench/transforms.hpp"

namespace markbench::attack {

/// Ordered composition of transformations; empty means identity.
struct CascadeSpec {
  std::vector<dsp::TransformSpec> stages;

  [[nodiscard]] bool is_identity() const { return stages.empty(); }
  void validate() const;

  /// Copy whose stage i seed is derived from (trial_seed, i, original seed),
  /// so every trial draws fresh yet reproducible randomness.
  [[nodiscard]] CascadeSpec reseeded(std::uint64_t trial_seed) const;

  /// Short human-readable description, e.g. "noise(snr_db=20) > gain(db=-3)".
  [[nodiscard]] std::string describe() const;

  friend bool operator==(const CascadeSpec&, const CascadeSpec&) = default;
};

/// Applies stages left to right. Sample rate is preserved by every stage.
AudioBuffer apply_cascade(const CascadeSpec& cascade, const AudioBuffer& buffer);

}  // namespace markbench::attack
