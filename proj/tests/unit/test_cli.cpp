#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "markbench/cli.hpp"
#include "markbench/corpus.hpp"
#include "markbench/plugin.hpp"
#include "markbench/wav.hpp"
#include "oracles.hpp"

using namespace markbench;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_plan(const fs::path& path, const fs::path& out_dir) {
  std::ofstream(path) << R"({
  "corpus": {"synthetic": {"clips": 6, "seed": 2}, "sample_rate": 16000, "duration_s": 2},
  "watermarks": [{"id": "ss42", "builtin": {"key": 42}}],
  "transforms": [
    {"label": "identity", "cascade": []},
    {"label": "noise_10db", "cascade": [{"kind": "noise", "snr_db": 10}]}
  ],
  "seed": 5,
  "output_dir": ")" + out_dir.string() + R"("
})";
}

}  // namespace

TEST(Cli, EmbedThenDetect) {
  oracle::TempDir dir;
  write_wav(corpus::synthesize_clip(0, 5.0, 16000, 1), dir / "a.wav");
  auto e = run({"embed", "--in", (dir / "a.wav").string(), "--out", (dir / "b.wav").string(), "--key", "42",
                "--strength", "-30"});
  ASSERT_EQ(e.code, 0) << e.err;
  auto d = run({"detect", "--in", (dir / "b.wav").string(), "--key", "42"});
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_GT(std::stod(d.out), 0.2);
  auto clean = run({"detect", "--in", (dir / "a.wav").string(), "--key", "42", "--json"});
  ASSERT_EQ(clean.code, 0);
  EXPECT_LT(nlohmann::json::parse(clean.out).at("score").get<double>(), std::stod(d.out));
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  const auto missing = run({"embed", "--in", "x.wav"});
  EXPECT_EQ(missing.code, cli::kExitUsage);
  EXPECT_NE(missing.err.find("--out"), std::string::npos);
  EXPECT_EQ(run({"report", "--records", "r", "--format", "xml"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST(Cli, RuntimeFailuresExitTwo) {
  oracle::TempDir dir;
  const auto r = run({"detect", "--in", (dir / "nope.wav").string(), "--key", "1"});
  EXPECT_EQ(r.code, cli::kExitFailure);
  EXPECT_NE(r.err.find("nope.wav"), std::string::npos);
  EXPECT_EQ(run({"evaluate", "--plan", (dir / "nope.json").string()}).code, cli::kExitFailure);
}

TEST(Cli, TransformAcceptsSpecForms) {
  oracle::TempDir dir;
  write_wav(oracle::white_noise(8000, 16000, 3, 0.2), dir / "in.wav");
  const auto in = read_wav(dir / "in.wav");
  ASSERT_EQ(run({"transform", "--in", (dir / "in.wav").string(), "--out", (dir / "g.wav").string(), "--spec",
                 R"({"kind": "gain", "db": -6})"})
                .code,
            0);
  EXPECT_NEAR(20 * std::log10(read_wav(dir / "g.wav").rms() / in.rms()), -6.0, 0.01);
  std::ofstream(dir / "c.json") << R"([{"kind": "gain", "db": -3}, {"kind": "gain", "db": -3}])";
  ASSERT_EQ(run({"transform", "--in", (dir / "in.wav").string(), "--out", (dir / "c.wav").string(), "--spec-file",
                 (dir / "c.json").string()})
                .code,
            0);
  EXPECT_NEAR(20 * std::log10(read_wav(dir / "c.wav").rms() / in.rms()), -6.0, 0.01);
  EXPECT_EQ(run({"transform", "--in", (dir / "in.wav").string(), "--out", (dir / "x.wav").string(), "--spec",
                 R"({"kind": "warp"})"})
                .code,
            cli::kExitFailure);
}

TEST(Cli, EvaluateTwiceIsByteIdenticalAndReportRerenders) {
  oracle::TempDir dir;
  write_plan(dir / "plan.json", dir / "run");
  const auto first = run({"evaluate", "--plan", (dir / "plan.json").string(), "--quiet"});
  ASSERT_EQ(first.code, 0) << first.err;
  EXPECT_NE(first.out.find("identity"), std::string::npos);
  const std::string csv1 = read_file(dir / "run" / "reports" / "report.csv");
  ASSERT_FALSE(csv1.empty());

  // Second run into a fresh directory, so nothing is served from cache.
  const auto second = run({"evaluate", "--plan", (dir / "plan.json").string(), "--out", (dir / "run2").string(),
                           "--workers", "3", "--quiet"});
  ASSERT_EQ(second.code, 0) << second.err;
  EXPECT_EQ(read_file(dir / "run2" / "reports" / "report.csv"), csv1);

  const auto csv = run({"report", "--records", (dir / "run").string(), "--format", "csv"});
  ASSERT_EQ(csv.code, 0) << csv.err;
  EXPECT_EQ(csv.out, csv1);
  const std::string header = csv.out.substr(0, csv.out.find('\n'));
  EXPECT_LT(header.find("sim"), header.find("ss42"));

  const auto js = run({"report", "--records", (dir / "run" / "records").string(), "--format", "json"});
  ASSERT_EQ(js.code, 0);
  EXPECT_EQ(js.out, read_file(dir / "run" / "reports" / "report.json"));
  EXPECT_EQ(run({"report", "--records", (dir / "run").string(), "--format", "table"}).out,
            read_file(dir / "run" / "reports" / "report.txt"));
}

TEST(Cli, EvaluateFlagsOverridePlan) {
  oracle::TempDir dir;
  write_plan(dir / "plan.json", dir / "run");
  const auto r = run({"evaluate", "--plan", (dir / "plan.json").string(), "--out", (dir / "alt").string(),
                      "--synthetic", "3", "--seed", "9", "--fpr", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("cache hits"), std::string::npos);
  const auto doc = nlohmann::json::parse(read_file(dir / "alt" / "reports" / "report.json"));
  EXPECT_EQ(doc.at("metadata").at("corpus_size"), 3);
  EXPECT_EQ(doc.at("metadata").at("seed"), 9);
  EXPECT_EQ(doc.at("metadata").at("fpr"), 0.1);
}

TEST(Cli, GenCorpusWritesManifest) {
  oracle::TempDir dir;
  const auto r = run({"gen-corpus", "--out", (dir / "c").string(), "--clips", "3", "--duration", "1", "--rate",
                      "16000"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(corpus::load_manifest(dir / "c" / "manifest.jsonl").entries.size(), 3u);
}

TEST(Cli, AttackSearchPrintsResult) {
  oracle::TempDir dir;
  std::ofstream(dir / "cfg.json") << R"({
    "candidates": [{"kind": "noise", "snr_db": 10}, {"kind": "gain", "db": -1}],
    "quality_floor": {"snr_db": 5},
    "max_stages": 1,
    "beam_width": 2
  })";
  const auto r = run({"attack-search", "--config", (dir / "cfg.json").string(), "--synthetic", "8", "--duration",
                      "2", "--key", "42", "--out", (dir / "res.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_TRUE(doc.contains("cascade"));
  EXPECT_EQ(doc, nlohmann::json::parse(read_file(dir / "res.json")));
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST(CliBinary, ExitCodesFromProcess) {
  const auto ok = plugin::run_process({MARKBENCH_CLI_BINARY, "--version"}, {}, 30.0);
  EXPECT_EQ(ok.exit_code, 0);
  const auto usage = plugin::run_process({MARKBENCH_CLI_BINARY, "detect"}, {}, 30.0);
  EXPECT_EQ(usage.exit_code, 1);
  EXPECT_NE(usage.stderr_text.find("--in"), std::string::npos);
  const auto fail = plugin::run_process({MARKBENCH_CLI_BINARY, "detect", "--in", "/nonexistent.wav", "--key", "1"}, {}, 30.0);
  EXPECT_EQ(fail.exit_code, 2);
}
