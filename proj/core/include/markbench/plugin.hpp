#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "markbench/audio_buffer.hpp"
#include "markbench/errors.hpp"

namespace markbench::plugin {

enum class Role { embedder, detector, transform, metric };

std::string_view to_string(Role role);
Role parse_role(std::string_view name);

/// An external executable speaking the file-exchange protocol:
///
///   <executable> <args...> <subcommand> --in <wav> [--ref <wav>] [--out <wav>]
///
/// where subcommand is embed, detect, transform or metric. Audio goes through
/// WAV files (float32); detect prints {"score": s} and metric prints
/// {"metrics": {...}} as a single JSON object on stdout. Exit code 0 means
/// success. The trial seed is passed in MARKBENCH_SEED.
struct PluginSpec {
  std::filesystem::path executable;
  Role role = Role::transform;
  std::vector<std::string> args;
  double timeout_s = 60.0;
  std::filesystem::path workdir;  // empty: inherit

  /// Throws ParameterError when the executable is missing or timeout <= 0.
  void validate() const;

  friend bool operator==(const PluginSpec&, const PluginSpec&) = default;
};

/// Nonzero exit status; carries the captured stderr.
class PluginFailure : public Error {
 public:
  PluginFailure(const std::string& what, int exit_code, std::string stderr_text)
      : Error(what), exit_code_(exit_code), stderr_(std::move(stderr_text)) {}
  [[nodiscard]] int exit_code() const { return exit_code_; }
  [[nodiscard]] const std::string& stderr_text() const { return stderr_; }

 private:
  int exit_code_;
  std::string stderr_;
};

class PluginTimeout : public Error {
 public:
  using Error::Error;
};

/// Output that violates the protocol (missing/garbled WAV, malformed JSON).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

struct ProcessResult {
  int exit_code = 0;
  std::string stdout_text;
  std::string stderr_text;
  bool timed_out = false;
};

/// Runs a command with extra environment variables, capturing both output
/// streams. The process (and its process group) is killed on timeout.
ProcessResult run_process(const std::vector<std::string>& argv, const std::map<std::string, std::string>& extra_env,
                          double timeout_s, const std::filesystem::path& workdir = {});

AudioBuffer run_transform_plugin(const PluginSpec& spec, const AudioBuffer& buffer, std::uint64_t seed = 0);
AudioBuffer run_embed_plugin(const PluginSpec& spec, const AudioBuffer& buffer, std::uint64_t seed = 0);
double run_detect_plugin(const PluginSpec& spec, const AudioBuffer& buffer, std::uint64_t seed = 0);
std::map<std::string, double> run_metric_plugin(const PluginSpec& spec, const AudioBuffer& reference,
                                                const AudioBuffer& test, std::uint64_t seed = 0);

/// Parses the stdout contract of the detect role.
double parse_score(std::string_view stdout_text);
/// Parses the stdout contract of the metric role.
std::map<std::string, double> parse_metrics(std::string_view stdout_text);

}  // namespace markbench::plugin
