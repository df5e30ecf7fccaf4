#include "markbench/plugin.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <cerrno>
#include <cstring>
#include <system_error>

#include <nlohmann/json.hpp>

#include "markbench/wav.hpp"

extern char** environ;

namespace markbench::plugin {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr int kTimeoutRetries = 1;

/// Unique scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<std::uint64_t> counter{0};
    const fs::path base = fs::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
      const auto id = std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)) + "-" +
                      std::to_string(Clock::now().time_since_epoch().count());
      path_ = base / ("markbench-plugin-" + id);
      std::error_code ec;
      if (fs::create_directory(path_, ec)) return;
    }
    throw IoError("could not create a plugin scratch directory under " + base.string());
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string describe(const PluginSpec& spec) { return "plugin '" + spec.executable.string() + "'"; }

std::string subcommand(Role role) {
  switch (role) {
    case Role::embedder: return "embed";
    case Role::detector: return "detect";
    case Role::transform: return "transform";
    case Role::metric: return "metric";
  }
  return "transform";
}

ProcessResult invoke(const PluginSpec& spec, Role role, const std::vector<std::pair<std::string, fs::path>>& flags,
                     std::uint64_t seed) {
  spec.validate();
  if (spec.role != role) {
    throw ParameterError(describe(spec) + " is configured as " + std::string(to_string(spec.role)) +
                         ", not " + std::string(to_string(role)));
  }
  std::vector<std::string> argv{spec.executable.string()};
  argv.insert(argv.end(), spec.args.begin(), spec.args.end());
  argv.push_back(subcommand(role));
  for (const auto& [flag, path] : flags) {
    argv.push_back(flag);
    argv.push_back(path.string());
  }
  const std::map<std::string, std::string> env{{"MARKBENCH_SEED", std::to_string(seed)}};
  ProcessResult result;
  for (int attempt = 0; attempt <= kTimeoutRetries; ++attempt) {
    result = run_process(argv, env, spec.timeout_s, spec.workdir);
    if (!result.timed_out) break;
  }
  if (result.timed_out) {
    throw PluginTimeout(describe(spec) + " timed out after " + std::to_string(spec.timeout_s) + " s (" +
                        std::to_string(kTimeoutRetries + 1) + " attempts)");
  }
  if (result.exit_code != 0) {
    std::string message = describe(spec) + " exited with status " + std::to_string(result.exit_code);
    if (!result.stderr_text.empty()) message += ": " + result.stderr_text;
    throw PluginFailure(message, result.exit_code, result.stderr_text);
  }
  return result;
}

AudioBuffer read_plugin_output(const PluginSpec& spec, const fs::path& out) {
  if (!fs::exists(out)) throw ProtocolError(describe(spec) + " did not write its output WAV");
  try {
    return read_wav(out);
  } catch (const Error& e) {
    throw ProtocolError(describe(spec) + " wrote an unreadable WAV: " + e.what());
  }
}

AudioBuffer run_audio_role(const PluginSpec& spec, Role role, const AudioBuffer& buffer, std::uint64_t seed) {
  TempDir dir;
  const fs::path in = dir.path() / "in.wav";
  const fs::path out = dir.path() / "out.wav";
  write_wav(buffer, in, WavEncoding::float32);
  invoke(spec, role, {{"--in", in}, {"--out", out}}, seed);
  return read_plugin_output(spec, out);
}

nlohmann::json parse_object(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(std::string("plugin stdout is not a JSON object: ") + e.what());
  }
  if (!doc.is_object()) throw ProtocolError("plugin stdout must be a single JSON object");
  return doc;
}

}  // namespace

std::string_view to_string(Role role) {
  switch (role) {
    case Role::embedder: return "embedder";
    case Role::detector: return "detector";
    case Role::transform: return "transform";
    case Role::metric: return "metric";
  }
  return "?";
}

Role parse_role(std::string_view name) {
  if (name == "embedder") return Role::embedder;
  if (name == "detector") return Role::detector;
  if (name == "transform") return Role::transform;
  if (name == "metric") return Role::metric;
  throw ParameterError("unknown plugin role '" + std::string(name) + "'");
}

void PluginSpec::validate() const {
  if (executable.empty()) throw ParameterError("plugin executable is empty");
  if (!fs::exists(executable)) throw ParameterError("plugin executable '" + executable.string() + "' does not exist");
  if (::access(executable.c_str(), X_OK) != 0) {
    throw ParameterError("plugin executable '" + executable.string() + "' is not runnable");
  }
  if (!(timeout_s > 0.0)) throw ParameterError("plugin timeout must be positive");
}

ProcessResult run_process(const std::vector<std::string>& argv, const std::map<std::string, std::string>& extra_env,
                          double timeout_s, const fs::path& workdir) {
  if (argv.empty()) throw ParameterError("run_process: empty argv");
  std::array<int, 2> out_pipe{}, err_pipe{};
  if (::pipe2(out_pipe.data(), O_CLOEXEC) != 0 || ::pipe2(err_pipe.data(), O_CLOEXEC) != 0) {
    throw IoError(std::string("pipe failed: ") + std::strerror(errno));
  }

  std::vector<std::string> env_strings;
  for (char** e = environ; *e != nullptr; ++e) {
    const std::string entry(*e);
    const auto name = entry.substr(0, entry.find('='));
    if (!extra_env.contains(name)) env_strings.push_back(entry);
  }
  for (const auto& [k, v] : extra_env) env_strings.push_back(k + "=" + v);
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);
  std::vector<std::string> args = argv;
  std::vector<char*> cargv;
  for (auto& s : args) cargv.push_back(s.data());
  cargv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, err_pipe[1], STDERR_FILENO);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  if (!workdir.empty()) posix_spawn_file_actions_addchdir_np(&actions, workdir.c_str());
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  pid_t pid = 0;
  const int rc = ::posix_spawn(&pid, cargv[0], &actions, &attr, cargv.data(), envp.data());
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  if (rc != 0) {
    ::close(out_pipe[0]);
    ::close(err_pipe[0]);
    throw IoError("failed to start '" + argv[0] + "': " + std::strerror(rc));
  }

  ProcessResult result;
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(timeout_s));
  std::array<pollfd, 2> fds{pollfd{out_pipe[0], POLLIN, 0}, pollfd{err_pipe[0], POLLIN, 0}};
  std::array<std::string*, 2> sinks{&result.stdout_text, &result.stderr_text};
  int open_streams = 2;
  std::array<char, 4096> chunk{};
  while (open_streams > 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (left <= 0) {
      result.timed_out = true;
      break;
    }
    const int ready = ::poll(fds.data(), fds.size(), static_cast<int>(std::min<long long>(left, 1000)));
    if (ready < 0 && errno != EINTR) break;
    for (std::size_t i = 0; i < fds.size(); ++i) {
      if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      const ssize_t n = ::read(fds[i].fd, chunk.data(), chunk.size());
      if (n > 0) {
        sinks[i]->append(chunk.data(), static_cast<std::size_t>(n));
      } else {
        ::close(fds[i].fd);
        fds[i].fd = -1;
        --open_streams;
      }
    }
  }
  for (auto& fd : fds) {
    if (fd.fd >= 0) ::close(fd.fd);
  }

  int status = 0;
  if (result.timed_out) {
    ::kill(-pid, SIGKILL);
    ::waitpid(pid, &status, 0);
    result.exit_code = -1;
    return result;
  }
  // Streams closed; the child may still be running (e.g. daemonized grandchild holding none).
  while (true) {
    const pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) break;
    if (Clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      result.timed_out = true;
      result.exit_code = -1;
      return result;
    }
    ::usleep(1000);
  }
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  return result;
}

double parse_score(std::string_view stdout_text) {
  const auto doc = parse_object(stdout_text);
  if (!doc.contains("score") || !doc["score"].is_number()) {
    throw ProtocolError("plugin stdout lacks a numeric \"score\" field");
  }
  const double score = doc["score"].get<double>();
  if (!std::isfinite(score)) throw ProtocolError("plugin score is not finite");
  return score;
}

std::map<std::string, double> parse_metrics(std::string_view stdout_text) {
  const auto doc = parse_object(stdout_text);
  if (!doc.contains("metrics") || !doc["metrics"].is_object()) {
    throw ProtocolError("plugin stdout lacks a \"metrics\" object");
  }
  std::map<std::string, double> metrics;
  for (const auto& [name, value] : doc["metrics"].items()) {
    if (!value.is_number()) throw ProtocolError("metric '" + name + "' is not a number");
    metrics[name] = value.get<double>();
  }
  return metrics;
}

AudioBuffer run_transform_plugin(const PluginSpec& spec, const AudioBuffer& buffer, std::uint64_t seed) {
  return run_audio_role(spec, Role::transform, buffer, seed);
}

AudioBuffer run_embed_plugin(const PluginSpec& spec, const AudioBuffer& buffer, std::uint64_t seed) {
  return run_audio_role(spec, Role::embedder, buffer, seed);
}

double run_detect_plugin(const PluginSpec& spec, const AudioBuffer& buffer, std::uint64_t seed) {
  TempDir dir;
  const fs::path in = dir.path() / "in.wav";
  write_wav(buffer, in, WavEncoding::float32);
  const auto result = invoke(spec, Role::detector, {{"--in", in}}, seed);
  try {
    return parse_score(result.stdout_text);
  } catch (const ProtocolError& e) {
    throw ProtocolError(describe(spec) + ": " + e.what());
  }
}

std::map<std::string, double> run_metric_plugin(const PluginSpec& spec, const AudioBuffer& reference,
                                                const AudioBuffer& test, std::uint64_t seed) {
  TempDir dir;
  const fs::path in = dir.path() / "in.wav";
  const fs::path ref = dir.path() / "ref.wav";
  write_wav(test, in, WavEncoding::float32);
  write_wav(reference, ref, WavEncoding::float32);
  const auto result = invoke(spec, Role::metric, {{"--in", in}, {"--ref", ref}}, seed);
  try {
    return parse_metrics(result.stdout_text);
  } catch (const ProtocolError& e) {
    throw ProtocolError(describe(spec) + ": " + e.what());
  }
}

}  // namespace markbench::plugin
