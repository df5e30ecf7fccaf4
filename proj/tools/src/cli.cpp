#include "markbench/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "markbench/cascade.hpp"
#include "markbench/corpus.hpp"
#include "markbench/errors.hpp"
#include "markbench/evaluate.hpp"
#include "markbench/orchestrator.hpp"
#include "markbench/report.hpp"
#include "markbench/search.hpp"
#include "markbench/serialize.hpp"
#include "markbench/wav.hpp"

namespace markbench::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct KeyOptions {
  std::uint64_t key = 0;
  double strength_db = -30.0;
  double band_lo = 300.0;
  double band_hi = 3400.0;
  int native_rate = 16000;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--key", key, "watermark key (64-bit integer)")->required();
    cmd->add_option("--strength", strength_db, "watermark-to-signal ratio in dB")->capture_default_str();
    cmd->add_option("--band-lo", band_lo, "lower edge of the embedding band in Hz")->capture_default_str();
    cmd->add_option("--band-hi", band_hi, "upper edge of the embedding band in Hz")->capture_default_str();
    cmd->add_option("--native-rate", native_rate, "rate the watermark runs at; higher-rate audio is band-split")
        ->capture_default_str();
  }

  [[nodiscard]] eval::WatermarkSpec spec() const {
    eval::WatermarkSpec s;
    s.id = "key" + std::to_string(key);
    s.scheme = eval::BuiltinWatermark{wm::WatermarkKey{key, band_lo, band_hi, strength_db}};
    s.native_rate = native_rate;
    return s;
  }
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(what + " is not valid JSON: " + e.what());
  }
}

// A bare transform object, an array of them, or {"stages": [...]}.
attack::CascadeSpec parse_cascade(const json& doc) {
  if (doc.is_object() && doc.contains("kind")) return attack::CascadeSpec{{doc.get<dsp::TransformSpec>()}};
  return doc.get<attack::CascadeSpec>();
}

std::string format_score(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

fs::path resolve_run_dir(const fs::path& given) {
  if (fs::exists(given / "records" / "run.json")) return given;
  if (fs::exists(given / "run.json")) return given.parent_path();
  throw LoadError(given.string() + " is not a run directory (no records/run.json)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Audio watermark robustness benchmark", "markbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "markbench 0.1.0");

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic speech-like corpus with a manifest");
  fs::path gen_out;
  std::size_t gen_clips = corpus::kDefaultClipCount;
  double gen_duration = corpus::kDefaultDurationS;
  int gen_rate = corpus::kDefaultSampleRate;
  std::uint64_t gen_seed = 0;
  std::size_t gen_workers = 1;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--clips", gen_clips, "number of clips")->capture_default_str();
  gen->add_option("--duration", gen_duration, "clip duration in seconds")->capture_default_str();
  gen->add_option("--rate", gen_rate, "sample rate in Hz")->capture_default_str();
  gen->add_option("--seed", gen_seed, "corpus seed")->capture_default_str();
  gen->add_option("--workers", gen_workers, "worker threads")->capture_default_str();

  // embed / detect
  auto* emb = app.add_subcommand("embed", "Embed the built-in watermark into a WAV file");
  fs::path emb_in, emb_out;
  std::string emb_encoding = "float32";
  KeyOptions emb_key;
  emb->add_option("--in", emb_in, "input WAV")->required();
  emb->add_option("--out", emb_out, "output WAV")->required();
  emb->add_option("--encoding", emb_encoding, "output encoding: pcm16, pcm24 or float32")->capture_default_str();
  emb_key.add_to(emb);

  auto* det = app.add_subcommand("detect", "Print the built-in watermark detection score of a WAV file");
  fs::path det_in;
  KeyOptions det_key;
  bool det_json = false;
  det->add_option("--in", det_in, "input WAV")->required();
  det->add_flag("--json", det_json, "print {\"score\": s}");
  det_key.add_to(det);

  // transform
  auto* tr = app.add_subcommand("transform", "Apply a transformation or cascade to a WAV file");
  fs::path tr_in, tr_out, tr_file;
  std::string tr_spec;
  std::optional<std::uint64_t> tr_seed;
  std::string tr_encoding = "float32";
  tr->add_option("--in", tr_in, "input WAV")->required();
  tr->add_option("--out", tr_out, "output WAV")->required();
  auto* spec_opt = tr->add_option("--spec", tr_spec, "transform or cascade as inline JSON");
  auto* file_opt = tr->add_option("--spec-file", tr_file, "transform or cascade JSON file");
  spec_opt->excludes(file_opt);
  tr->add_option("--seed", tr_seed, "reseed every stage from this trial seed");
  tr->add_option("--encoding", tr_encoding, "output encoding")->capture_default_str();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Run an evaluation plan into a run directory");
  fs::path ev_plan;
  std::optional<fs::path> ev_out, ev_manifest;
  std::optional<std::size_t> ev_workers, ev_clips, ev_synthetic;
  std::optional<std::uint64_t> ev_seed;
  std::optional<double> ev_fpr;
  bool ev_quiet = false;
  ev->add_option("--plan", ev_plan, "plan JSON")->required();
  ev->add_option("--out", ev_out, "run directory (overrides output_dir)");
  ev->add_option("--workers", ev_workers, "worker threads (overrides workers)");
  ev->add_option("--seed", ev_seed, "master seed (overrides seed)");
  ev->add_option("--fpr", ev_fpr, "false-positive rate (overrides fpr)");
  ev->add_option("--limit", ev_clips, "use at most this many clips");
  auto* ev_man = ev->add_option("--manifest", ev_manifest, "corpus manifest (replaces the plan corpus)");
  auto* ev_syn = ev->add_option("--synthetic", ev_synthetic, "synthetic corpus of N clips (replaces the plan corpus)");
  ev_man->excludes(ev_syn);
  ev->add_flag("--quiet", ev_quiet, "no progress output");

  // attack-search
  auto* as = app.add_subcommand("attack-search", "Search for a quality-constrained cascade that removes a watermark");
  fs::path as_config;
  std::optional<fs::path> as_plan, as_manifest, as_out;
  std::optional<std::size_t> as_synthetic;
  std::optional<std::string> as_watermark;
  std::optional<std::uint64_t> as_seed, as_key;
  int as_rate = 16000;
  double as_duration = corpus::kDefaultDurationS;
  std::size_t as_workers = 1;
  as->add_option("--config", as_config, "search config JSON (candidates, quality_floor, ...)")->required();
  as->add_option("--plan", as_plan, "take corpus, watermark and seed from this plan");
  as->add_option("--watermark", as_watermark, "watermark id within the plan (default: first)");
  auto* as_man = as->add_option("--manifest", as_manifest, "corpus manifest");
  auto* as_syn = as->add_option("--synthetic", as_synthetic, "synthetic corpus of N clips");
  as_man->excludes(as_syn);
  as->add_option("--rate", as_rate, "sample rate without a plan")->capture_default_str();
  as->add_option("--duration", as_duration, "clip duration without a plan")->capture_default_str();
  as->add_option("--key", as_key, "built-in watermark key without a plan");
  as->add_option("--seed", as_seed, "search seed");
  as->add_option("--workers", as_workers, "worker threads")->capture_default_str();
  as->add_option("--out", as_out, "write the result JSON here as well as to stdout");

  // report
  auto* rep = app.add_subcommand("report", "Re-render the report of a finished run from its records");
  fs::path rep_dir;
  std::string rep_format = "table";
  rep->add_option("--records", rep_dir, "run directory (or its records/ subdirectory)")->required();
  rep->add_option("--format", rep_format, "csv, json, table or plot")
      ->check(CLI::IsMember({"csv", "json", "table", "plot"}))
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "markbench 0.1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "markbench: " << e.what() << "\n\n";
    auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      auto manifest = corpus::generate_synthetic_corpus(gen_clips, gen_duration, gen_rate, gen_seed, gen_out,
                                                        std::max<std::size_t>(1, gen_workers));
      err << "wrote " << manifest.entries.size() << " clips to " << gen_out.string() << "\n";
      out << (gen_out / "manifest.jsonl").string() << "\n";
    } else if (emb->parsed()) {
      AudioBuffer audio = read_wav(emb_in);
      auto runner = eval::make_runner(emb_key.spec(), audio.sample_rate(), emb_key.key);
      write_wav(runner.embed(audio), emb_out, parse_wav_encoding(emb_encoding));
    } else if (det->parsed()) {
      AudioBuffer audio = read_wav(det_in);
      auto runner = eval::make_runner(det_key.spec(), audio.sample_rate(), det_key.key);
      double score = runner.detect(audio);
      if (det_json)
        out << json{{"score", score}}.dump() << "\n";
      else
        out << format_score(score) << "\n";
    } else if (tr->parsed()) {
      if (tr_spec.empty() && tr_file.empty()) {
        err << "markbench: transform needs --spec or --spec-file\n\n" << tr->help();
        return kExitUsage;
      }
      json doc = tr_spec.empty() ? parse_json(read_file(tr_file), tr_file.string()) : parse_json(tr_spec, "--spec");
      attack::CascadeSpec cascade = parse_cascade(doc);
      cascade.validate();
      if (tr_seed) cascade = cascade.reseeded(*tr_seed);
      AudioBuffer audio = read_wav(tr_in);
      write_wav(attack::apply_cascade(cascade, audio), tr_out, parse_wav_encoding(tr_encoding));
    } else if (ev->parsed()) {
      auto plan = orchestrator::load_plan(ev_plan);
      if (ev_out) plan.output_dir = *ev_out;
      if (ev_workers) plan.workers = *ev_workers;
      if (ev_seed) plan.seed = *ev_seed;
      if (ev_fpr) plan.fpr = *ev_fpr;
      if (ev_clips) plan.corpus.limit = *ev_clips;
      if (ev_manifest) {
        plan.corpus.manifest = *ev_manifest;
        plan.corpus.synthetic.reset();
      }
      if (ev_synthetic) {
        plan.corpus.manifest.reset();
        plan.corpus.synthetic = orchestrator::SyntheticCorpus{*ev_synthetic, plan.seed};
      }
      auto result = orchestrator::run_parallel(plan, ev_quiet ? nullptr : &err);
      out << report::render_table(result.report);
      err << "run directory: " << result.run_dir.string() << "\n";
    } else if (as->parsed()) {
      attack::AttackSearchConfig cfg = parse_json(read_file(as_config), as_config.string()).get<attack::AttackSearchConfig>();
      std::vector<corpus::Clip> clips;
      std::optional<eval::WatermarkSpec> spec;
      std::uint64_t seed = 0;
      int rate = as_rate;
      if (as_plan) {
        auto plan = orchestrator::load_plan(*as_plan);
        seed = plan.seed;
        rate = plan.corpus.sample_rate;
        if (as_watermark) {
          for (const auto& w : plan.watermarks)
            if (w.id == *as_watermark) spec = w;
          if (!spec) throw ParameterError("plan has no watermark '" + *as_watermark + "'");
        } else {
          spec = plan.watermarks.front();
        }
        if (!as_manifest && !as_synthetic) clips = orchestrator::load_corpus(plan, as_workers);
        as_duration = plan.corpus.duration_s;
      }
      if (as_seed) seed = *as_seed;
      if (as_manifest)
        clips = corpus::load_clips(corpus::load_manifest(*as_manifest), rate, as_duration, as_workers);
      else if (as_synthetic)
        clips = corpus::synthetic_clips(*as_synthetic, as_duration, rate, seed, as_workers);
      if (!spec) {
        if (!as_key) throw ParameterError("attack-search needs --plan or --key");
        KeyOptions k;
        k.key = *as_key;
        spec = k.spec();
      }
      if (clips.empty()) throw ParameterError("attack-search needs a corpus (--plan, --manifest or --synthetic)");
      auto runner = eval::make_runner(*spec, rate, seed);
      auto outcome =
          attack::search_cascade(cfg, attack::SearchTarget{runner.embed, runner.detect}, clips, seed, as_workers, &err);
      json result = outcome;
      result["watermark"] = spec->id;
      result["config"] = cfg;
      std::string text = result.dump(2) + "\n";
      if (as_out) {
        if (as_out->has_parent_path()) fs::create_directories(as_out->parent_path());
        std::ofstream f(*as_out);
        if (!(f << text)) throw IoError("cannot write " + as_out->string());
      }
      out << text;
    } else if (rep->parsed()) {
      fs::path run_dir = resolve_run_dir(rep_dir);
      auto report = orchestrator::rerender(run_dir);
      if (rep_format == "csv")
        out << report::render_csv(report);
      else if (rep_format == "json")
        out << report::render_json(report);
      else if (rep_format == "plot")
        out << report::render_plot_data(report, orchestrator::load_sweeps(run_dir));
      else
        out << report::render_table(report);
    }
  } catch (const std::exception& e) {
    err << "markbench: error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace markbench::cli
