#include "markbench/orchestrator.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "markbench/errors.hpp"
#include "markbench/parallel.hpp"
#include "markbench/rng.hpp"
#include "markbench/serialize.hpp"

namespace markbench::orchestrator {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Bumped whenever trial semantics change so stale cache entries are ignored.
constexpr int kCacheFormat = 1;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ostringstream tmp_name;
  tmp_name << path.filename().string() << ".tmp." << std::this_thread::get_id();
  fs::path tmp = path.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t clip_hash(const corpus::Clip& clip) {
  auto samples = clip.audio.samples();
  std::string_view bytes(reinterpret_cast<const char*>(samples.data()), samples.size_bytes());
  std::uint64_t h = fnv1a(bytes);
  h = derive_seed(h, static_cast<std::uint64_t>(clip.audio.sample_rate()));
  return derive_seed(h, clip.id);
}

std::string plugin_label(const plugin::PluginSpec& spec) {
  std::string out = spec.executable.string();
  for (const auto& a : spec.args) out += " " + a;
  return out;
}

void collect_plugins(const attack::CascadeSpec& cascade, std::set<std::string>& out) {
  for (const auto& stage : cascade.stages) {
    if (const auto* p = std::get_if<dsp::PluginParams>(&stage.params)) out.insert(plugin_label(p->spec));
    if (const auto* d = std::get_if<dsp::DenoiseParams>(&stage.params); d && d->denoiser)
      out.insert(plugin_label(*d->denoiser));
  }
}

std::uint64_t trial_seed(const EvaluationPlan& plan, const std::string& clip, const std::string& wm,
                         const std::string& transform) {
  return derive_seed(derive_seed(derive_seed(derive_seed(plan.seed, "trial"), clip), wm), transform);
}

std::uint64_t embed_seed(const EvaluationPlan& plan, const std::string& clip, const std::string& wm) {
  return derive_seed(derive_seed(derive_seed(plan.seed, "embed"), wm), clip);
}

std::string context(const std::string& clip, const std::string& wm, const std::string& transform) {
  return "clip '" + clip + "', watermark '" + wm + "', transform '" + transform + "': ";
}

struct CellResult {
  eval::TrialRecord watermarked;
  eval::TrialRecord clean;
};

eval::TrialRecord make_record(const std::string& clip, const std::string& wm, const std::string& transform,
                              eval::Condition condition) {
  eval::TrialRecord r;
  r.clip_id = clip;
  r.watermark_id = wm;
  r.transform_id = transform;
  r.condition = condition;
  return r;
}

}  // namespace

// ---- plan --------------------------------------------------------------

void EvaluationPlan::validate() const {
  if (corpus.manifest.has_value() == corpus.synthetic.has_value())
    throw ParameterError("plan corpus needs exactly one of 'manifest' or 'synthetic'");
  if (corpus.synthetic && corpus.synthetic->clips == 0) throw ParameterError("synthetic corpus needs at least one clip");
  if (corpus.sample_rate <= 0) throw ParameterError("plan sample_rate must be positive");
  if (!(corpus.duration_s > 0.0)) throw ParameterError("plan duration_s must be positive");
  if (!(fpr > 0.0 && fpr < 1.0)) throw ParameterError("plan fpr must lie in (0, 1)");
  if (watermarks.empty()) throw ParameterError("plan lists no watermarks");
  if (transforms.empty()) throw ParameterError("plan lists no transforms");
  std::set<std::string> seen;
  for (const auto& w : watermarks) {
    w.validate();
    if (!seen.insert(w.id).second) throw ParameterError("duplicate watermark id '" + w.id + "'");
  }
  seen.clear();
  for (const auto& t : transforms) {
    if (t.label.empty()) throw ParameterError("transform label is empty");
    if (!seen.insert(t.label).second) throw ParameterError("duplicate transform label '" + t.label + "'");
    t.cascade.validate();
  }
  for (const auto& p : metrics.plugins) p.validate();
}

void to_json(json& j, const EvaluationPlan& plan) {
  json corpus_json = {{"sample_rate", plan.corpus.sample_rate},
                      {"duration_s", plan.corpus.duration_s},
                      {"limit", plan.corpus.limit}};
  if (plan.corpus.manifest) corpus_json["manifest"] = plan.corpus.manifest->string();
  if (plan.corpus.synthetic)
    corpus_json["synthetic"] = {{"clips", plan.corpus.synthetic->clips}, {"seed", plan.corpus.synthetic->seed}};
  json transforms = json::array();
  for (const auto& t : plan.transforms) {
    json tj = {{"label", t.label}, {"cascade", t.cascade}};
    if (t.sweep) tj["sweep"] = {{"codec", t.sweep->codec}, {"bitrate_kbps", t.sweep->bitrate_kbps}};
    transforms.push_back(std::move(tj));
  }
  j = {{"corpus", std::move(corpus_json)},
       {"watermarks", plan.watermarks},
       {"transforms", std::move(transforms)},
       {"metrics", plan.metrics},
       {"fpr", plan.fpr},
       {"seed", plan.seed},
       {"output_dir", plan.output_dir.string()},
       {"workers", plan.workers}};
}

void from_json(const json& j, EvaluationPlan& plan) {
  using json_util::require;
  if (!j.is_object()) throw LoadError("plan must be a JSON object");
  static const std::set<std::string> known = {"corpus", "watermarks", "watermark",  "transforms", "metrics",
                                              "fpr",    "seed",       "output_dir", "workers"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw LoadError("unknown plan field '" + key + "'");
  try {
    EvaluationPlan p;
    const json& c = require(j, "corpus");
    if (c.contains("manifest")) p.corpus.manifest = fs::path(c.at("manifest").get<std::string>());
    if (c.contains("synthetic")) {
      SyntheticCorpus s;
      const json& sj = c.at("synthetic");
      s.clips = sj.value("clips", s.clips);
      s.seed = sj.value("seed", s.seed);
      p.corpus.synthetic = s;
    }
    p.corpus.sample_rate = c.value("sample_rate", p.corpus.sample_rate);
    p.corpus.duration_s = c.value("duration_s", p.corpus.duration_s);
    p.corpus.limit = c.value("limit", p.corpus.limit);
    // A single "watermark" object is shorthand for a one-element list.
    if (j.contains("watermark") && j.contains("watermarks"))
      throw LoadError("plan has both 'watermark' and 'watermarks'");
    if (j.contains("watermark"))
      p.watermarks = {j.at("watermark").get<eval::WatermarkSpec>()};
    else
      p.watermarks = require(j, "watermarks").get<std::vector<eval::WatermarkSpec>>();
    for (const auto& tj : require(j, "transforms")) {
      LabeledTransform t;
      t.label = require(tj, "label").get<std::string>();
      t.cascade = require(tj, "cascade").get<attack::CascadeSpec>();
      if (tj.contains("sweep")) {
        const json& sw = tj.at("sweep");
        t.sweep = report::SweepPoint{require(sw, "codec").get<std::string>(),
                                     json_util::to_double(require(sw, "bitrate_kbps"))};
      }
      p.transforms.push_back(std::move(t));
    }
    if (j.contains("metrics")) p.metrics = j.at("metrics").get<eval::MetricsConfig>();
    p.fpr = j.value("fpr", p.fpr);
    p.seed = j.value("seed", p.seed);
    if (j.contains("output_dir")) p.output_dir = j.at("output_dir").get<std::string>();
    p.workers = j.value("workers", p.workers);
    plan = std::move(p);
  } catch (const json::exception& e) {
    throw LoadError(std::string("malformed plan: ") + e.what());
  }
}

EvaluationPlan load_plan(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw LoadError("plan " + path.string() + " is not valid JSON: " + e.what());
  }
  EvaluationPlan plan = doc.get<EvaluationPlan>();
  // Relative manifest paths are taken relative to the plan file.
  if (plan.corpus.manifest && plan.corpus.manifest->is_relative())
    plan.corpus.manifest = path.parent_path() / *plan.corpus.manifest;
  return plan;
}

void save_plan(const EvaluationPlan& plan, const fs::path& path) {
  write_text_atomic(path, json(plan).dump(2) + "\n");
}

std::size_t effective_workers(const EvaluationPlan& plan) {
  if (const char* env = std::getenv("MARKBENCH_WORKERS"); env && *env) {
    char* end = nullptr;
    unsigned long v = std::strtoul(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  return std::max<std::size_t>(1, plan.workers);
}

std::vector<corpus::Clip> load_corpus(const EvaluationPlan& plan, std::size_t workers) {
  std::vector<corpus::Clip> clips;
  if (plan.corpus.synthetic) {
    std::size_t n = plan.corpus.synthetic->clips;
    if (plan.corpus.limit) n = std::min(n, plan.corpus.limit);
    clips = corpus::synthetic_clips(n, plan.corpus.duration_s, plan.corpus.sample_rate, plan.corpus.synthetic->seed,
                                    workers);
  } else {
    corpus::CorpusManifest manifest = corpus::load_manifest(*plan.corpus.manifest);
    if (plan.corpus.limit && manifest.entries.size() > plan.corpus.limit) manifest.entries.resize(plan.corpus.limit);
    clips = corpus::load_clips(manifest, plan.corpus.sample_rate, plan.corpus.duration_s, workers);
  }
  return clips;
}

std::vector<std::string> transform_ids(const EvaluationPlan& plan) {
  std::vector<std::string> ids;
  for (const auto& t : plan.transforms) ids.push_back(t.label);
  return ids;
}

eval::ReportMetadata report_metadata(const EvaluationPlan& plan, std::size_t corpus_size) {
  eval::ReportMetadata meta;
  meta.corpus_size = corpus_size;
  meta.seed = plan.seed;
  meta.fpr = plan.fpr;
  std::set<std::string> plugins;
  for (const auto& w : plan.watermarks) {
    meta.watermark_ids.push_back(w.id);
    if (const auto* p = std::get_if<eval::PluginWatermark>(&w.scheme)) {
      plugins.insert(plugin_label(p->embedder));
      plugins.insert(plugin_label(p->detector));
    }
  }
  for (const auto& t : plan.transforms) collect_plugins(t.cascade, plugins);
  for (const auto& m : plan.metrics.plugins) plugins.insert(plugin_label(m));
  meta.plugins.assign(plugins.begin(), plugins.end());
  return meta;
}

// ---- trials ------------------------------------------------------------

std::vector<eval::TrialRecord> run_trials(const EvaluationPlan& plan, const std::vector<corpus::Clip>& clips,
                                          std::size_t workers, const std::optional<fs::path>& cache_dir,
                                          RunStats* stats, std::ostream* progress) {
  plan.validate();
  const std::size_t n_wm = plan.watermarks.size();
  const std::size_t n_clips = clips.size();
  const std::size_t n_tr = plan.transforms.size();
  const int rate = plan.corpus.sample_rate;

  // Parts of the cache key shared by all trials.
  std::vector<std::string> wm_json(n_wm), tr_json(n_tr);
  for (std::size_t w = 0; w < n_wm; ++w) wm_json[w] = json(plan.watermarks[w]).dump();
  for (std::size_t t = 0; t < n_tr; ++t) tr_json[t] = json(plan.transforms[t].cascade).dump();
  const std::string metrics_json = json(plan.metrics).dump();
  std::vector<std::uint64_t> clip_hashes(n_clips);
  for (std::size_t c = 0; c < n_clips; ++c) clip_hashes[c] = clip_hash(clips[c]);

  // results[(w * n_clips + c) * n_tr + t]
  std::vector<CellResult> results(n_wm * n_clips * n_tr);
  std::atomic<std::size_t> hits{0}, done_units{0};
  std::mutex log_mutex;
  const std::size_t n_units = n_wm * n_clips;
  const std::size_t log_every = std::max<std::size_t>(1, n_units / 20);

  if (cache_dir) fs::create_directories(*cache_dir);

  parallel_for(n_units, workers, [&](std::size_t unit) {
    const std::size_t w = unit / n_clips;
    const std::size_t c = unit % n_clips;
    const auto& spec = plan.watermarks[w];
    const auto& clip = clips[c];

    std::vector<std::string> keys(n_tr);
    std::vector<bool> pending(n_tr, true);
    bool any_pending = false;
    for (std::size_t t = 0; t < n_tr; ++t) {
      const auto& label = plan.transforms[t].label;
      CellResult& cell = results[unit * n_tr + t];
      cell.watermarked = make_record(clip.id, spec.id, label, eval::Condition::watermarked);
      cell.clean = make_record(clip.id, spec.id, label, eval::Condition::clean);
      if (!cache_dir) {
        any_pending = true;
        continue;
      }
      json key_doc = {{"format", kCacheFormat},     {"clip", hex64(clip_hashes[c])}, {"watermark", wm_json[w]},
                      {"cascade", tr_json[t]},      {"label", label},                {"metrics", metrics_json},
                      {"seed", trial_seed(plan, clip.id, spec.id, label)}};
      keys[t] = hex64(fnv1a(key_doc.dump()));
      fs::path file = *cache_dir / (keys[t] + ".json");
      std::error_code ec;
      if (fs::exists(file, ec)) {
        try {
          json doc = json::parse(read_text(file));
          if (doc.at("key").get<std::string>() == keys[t]) {
            cell.watermarked = doc.at("watermarked").get<eval::TrialRecord>();
            cell.clean = doc.at("clean").get<eval::TrialRecord>();
            pending[t] = false;
            hits.fetch_add(1);
            continue;
          }
        } catch (const std::exception&) {
          // Unreadable entry: recompute and overwrite.
        }
      }
      any_pending = true;
    }

    if (any_pending) {
      std::optional<AudioBuffer> marked;
      std::string embed_error;
      std::optional<eval::WatermarkRunner> runner;
      try {
        runner = eval::make_runner(spec, rate, embed_seed(plan, clip.id, spec.id));
        marked = runner->embed(clip.audio);
      } catch (const std::exception& e) {
        embed_error = std::string("embedding failed: ") + e.what();
      }

      for (std::size_t t = 0; t < n_tr; ++t) {
        if (!pending[t]) continue;
        const auto& lt = plan.transforms[t];
        CellResult& cell = results[unit * n_tr + t];
        const std::string where = context(clip.id, spec.id, lt.label);
        if (!marked) {
          cell.watermarked.error = where + embed_error;
          cell.clean.error = where + embed_error;
          continue;
        }
        const std::uint64_t seed = trial_seed(plan, clip.id, spec.id, lt.label);
        try {
          AudioBuffer attacked = attack::apply_cascade(lt.cascade.reseeded(derive_seed(seed, "watermarked")), *marked);
          cell.watermarked.score = runner->detect(attacked);
          cell.watermarked.quality = eval::quality_metrics(plan.metrics, *marked, attacked, derive_seed(seed, "quality"));
        } catch (const std::exception& e) {
          cell.watermarked.score.reset();
          cell.watermarked.quality.clear();
          cell.watermarked.error = where + e.what();
        }
        try {
          AudioBuffer attacked = attack::apply_cascade(lt.cascade.reseeded(derive_seed(seed, "clean")), clip.audio);
          cell.clean.score = runner->detect(attacked);
        } catch (const std::exception& e) {
          cell.clean.score.reset();
          cell.clean.error = where + e.what();
        }
        // Only successful trials are cached so failures get retried.
        if (cache_dir && cell.watermarked.ok() && cell.clean.ok()) {
          json doc = {{"key", keys[t]}, {"watermarked", cell.watermarked}, {"clean", cell.clean}};
          write_text_atomic(*cache_dir / (keys[t] + ".json"), doc.dump());
        }
      }
    }

    std::size_t done = done_units.fetch_add(1) + 1;
    if (progress && (done % log_every == 0 || done == n_units)) {
      std::lock_guard lock(log_mutex);
      std::size_t h = hits.load();
      std::size_t seen = done * n_tr;
      *progress << "[markbench] " << done << "/" << n_units << " clip-watermark units, cache hits " << h << "/"
                << seen << " (" << (seen ? 100 * h / seen : 0) << "%)\n";
      progress->flush();
    }
  });

  std::vector<eval::TrialRecord> records;
  records.reserve(results.size() * 2);
  std::size_t failed = 0;
  for (std::size_t w = 0; w < n_wm; ++w)
    for (std::size_t t = 0; t < n_tr; ++t)
      for (std::size_t c = 0; c < n_clips; ++c) {
        const CellResult& cell = results[(w * n_clips + c) * n_tr + t];
        if (!cell.watermarked.ok() || !cell.clean.ok()) ++failed;
        records.push_back(cell.watermarked);
        records.push_back(cell.clean);
      }
  if (stats) {
    stats->trials = results.size();
    stats->cache_hits = hits.load();
    stats->failed = failed;
  }
  return records;
}

eval::RobustnessReport evaluate(const EvaluationPlan& plan) {
  plan.validate();
  const std::size_t workers = effective_workers(plan);
  auto clips = load_corpus(plan, workers);
  auto records = run_trials(plan, clips, workers, std::nullopt);
  return eval::aggregate(records, transform_ids(plan), report_metadata(plan, clips.size()));
}

// ---- run directory -----------------------------------------------------

void write_records(const std::vector<eval::TrialRecord>& records, const fs::path& path) {
  std::string text;
  for (const auto& r : records) text += json(r).dump() + "\n";
  write_text_atomic(path, text);
}

std::vector<eval::TrialRecord> read_records(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open records file " + path.string());
  std::vector<eval::TrialRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line).get<eval::TrialRecord>());
    } catch (const std::exception& e) {
      throw LoadError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

namespace {

void write_reports(const eval::RobustnessReport& report, const std::map<std::string, report::SweepPoint>& sweeps,
                   const fs::path& dir) {
  write_text_atomic(dir / "report.csv", report::render_csv(report));
  write_text_atomic(dir / "report.json", report::render_json(report));
  write_text_atomic(dir / "report.txt", report::render_table(report));
  if (!sweeps.empty()) write_text_atomic(dir / "plot_data.csv", report::render_plot_data(report, sweeps));
}

json metadata_json(const eval::ReportMetadata& meta) {
  return {{"corpus_size", meta.corpus_size},
          {"seed", meta.seed},
          {"fpr", meta.fpr},
          {"watermarks", meta.watermark_ids},
          {"plugins", meta.plugins}};
}

}  // namespace

RunResult run_parallel(const EvaluationPlan& plan, std::ostream* progress) {
  plan.validate();
  const std::size_t workers = effective_workers(plan);
  RunResult result;
  result.run_dir = plan.output_dir;
  fs::create_directories(plan.output_dir);
  save_plan(plan, plan.output_dir / "plan.json");

  if (progress) *progress << "[markbench] loading corpus with " << workers << " worker(s)\n";
  auto clips = load_corpus(plan, workers);
  if (progress) *progress << "[markbench] " << clips.size() << " clips loaded\n";

  auto records = run_trials(plan, clips, workers, plan.output_dir / "cache", &result.stats, progress);
  write_records(records, plan.output_dir / "records" / "trials.jsonl");

  eval::ReportMetadata meta = report_metadata(plan, clips.size());
  std::map<std::string, report::SweepPoint> sweeps;
  json sweep_json = json::object();
  for (const auto& t : plan.transforms)
    if (t.sweep) {
      sweeps[t.label] = *t.sweep;
      sweep_json[t.label] = {{"codec", t.sweep->codec}, {"bitrate_kbps", t.sweep->bitrate_kbps}};
    }
  json run_doc = {{"transforms", transform_ids(plan)}, {"metadata", metadata_json(meta)}, {"sweeps", sweep_json}};
  write_text_atomic(plan.output_dir / "records" / "run.json", run_doc.dump(2) + "\n");

  result.report = eval::aggregate(records, transform_ids(plan), meta);
  write_reports(result.report, sweeps, plan.output_dir / "reports");

  if (progress) {
    const auto& s = result.stats;
    *progress << "[markbench] done: " << s.trials << " trials, " << s.cache_hits << " cache hits ("
              << (s.trials ? 100 * s.cache_hits / s.trials : 0) << "%), " << s.failed << " failed\n";
  }
  return result;
}

namespace {

json load_run_doc(const fs::path& run_dir) {
  fs::path path = run_dir / "records" / "run.json";
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw LoadError(path.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace

std::map<std::string, report::SweepPoint> load_sweeps(const fs::path& run_dir) {
  json doc = load_run_doc(run_dir);
  std::map<std::string, report::SweepPoint> out;
  if (doc.contains("sweeps"))
    for (const auto& [label, sw] : doc.at("sweeps").items())
      out[label] = report::SweepPoint{sw.at("codec").get<std::string>(), sw.at("bitrate_kbps").get<double>()};
  return out;
}

eval::RobustnessReport rerender(const fs::path& run_dir) {
  json doc = load_run_doc(run_dir);
  auto records = read_records(run_dir / "records" / "trials.jsonl");
  try {
    const json& m = json_util::require(doc, "metadata");
    eval::ReportMetadata meta;
    meta.corpus_size = m.at("corpus_size").get<std::size_t>();
    meta.seed = m.at("seed").get<std::uint64_t>();
    meta.fpr = m.at("fpr").get<double>();
    meta.watermark_ids = m.at("watermarks").get<std::vector<std::string>>();
    meta.plugins = m.at("plugins").get<std::vector<std::string>>();
    auto ids = json_util::require(doc, "transforms").get<std::vector<std::string>>();
    return eval::aggregate(records, ids, std::move(meta));
  } catch (const json::exception& e) {
    throw LoadError("malformed run metadata in " + run_dir.string() + ": " + e.what());
  }
}

}  // namespace markbench::orchestrator
