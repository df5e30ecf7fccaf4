// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: markbench_acceptance [criterion...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "markbench/cascade.hpp"
#include "markbench/corpus.hpp"
#include "markbench/metrics.hpp"
#include "markbench/orchestrator.hpp"
#include "markbench/phase_vocoder.hpp"
#include "markbench/report.hpp"
#include "markbench/resample.hpp"
#include "markbench/rng.hpp"
#include "markbench/search.hpp"
#include "markbench/stft.hpp"
#include "markbench/transforms.hpp"
#include "markbench/watermark.hpp"
#include "oracles.hpp"

using namespace markbench;
namespace fs = std::filesystem;

namespace {

struct Result {
  bool pass = true;
  std::string detail;
};

// Collects failed checks; the first few go into the detail line.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (ok) return;
    ++failed_;
    if (failed_ <= 4) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  void note(const std::string& s) { info_ += (info_.empty() ? "" : ", ") + s; }
  [[nodiscard]] Result result() const {
    Result r;
    r.pass = failed_ == 0;
    r.detail = info_;
    if (!r.pass) r.detail += " | " + std::to_string(failed_) + "/" + std::to_string(total_) + " checks failed: " + notes_;
    return r;
  }

 private:
  std::size_t total_ = 0, failed_ = 0;
  std::string notes_, info_;
};

std::string fmt(double v, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

double gain_db_at(const AudioBuffer& in, const AudioBuffer& out, double hz) {
  const std::size_t a = in.size() / 4, b = in.size() - in.size() / 4;
  return 20.0 * std::log10(oracle::tone_amplitude(out, hz, a, b) / oracle::tone_amplitude(in, hz, a, b));
}

double snr_oracle(std::span<const float> ref, std::span<const float> test) {
  const std::size_t n = std::min(ref.size(), test.size());
  double s = 0, e = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(test[i]) - ref[i];
    s += static_cast<double>(ref[i]) * ref[i];
    e += d * d;
  }
  return e == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(s / e);
}

// ---------------------------------------------------------------------------

Result dsp_contracts() {
  Checks c;

  double worst_rt = 0.0;
  for (int rate : {16000, 44100})
    for (auto [fft, hop] : {std::pair{1024, 256}, {512, 128}, {256, 64}, {2048, 512}, {1024, 512}}) {
      const StftParams p(fft, hop);
      const auto x = oracle::white_noise(3 * rate, rate, static_cast<std::uint32_t>(fft + hop + rate), 0.3);
      const auto y = istft(stft(x, p));
      c.expect(y.size() == x.size(), "istft length");
      for (std::size_t i = fft; i + fft < x.size(); ++i)
        worst_rt = std::max(worst_rt, std::abs(static_cast<double>(y[i]) - x[i]));
    }
  c.expect(worst_rt < 1e-6, "stft round trip " + std::to_string(worst_rt));
  char rt[32];
  std::snprintf(rt, sizeof rt, "%.1e", worst_rt);
  c.note(std::string("stft max err ") + rt);

  double worst_snr = 0.0;
  for (std::size_t clip = 0; clip < 5; ++clip) {
    const auto x = corpus::synthesize_clip(clip, 2.0, 16000, 11);
    for (double target : {20.0, 10.0, 0.0})
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto y = dsp::add_noise(x, target, seed + 10 * clip);
        worst_snr = std::max(worst_snr, std::abs(snr_oracle(x.samples(), y.samples()) - target));
      }
  }
  c.expect(worst_snr <= 0.1, "noise snr off by " + fmt(worst_snr));
  c.note("noise snr err " + fmt(worst_snr, 4) + " dB");

  double lp_pass = 0, lp_stop = 1e9, hp_pass = 0, hp_stop = 1e9;
  for (int rate : {16000, 44100}) {
    auto probe = [&](double hz, auto&& fn) {
      const auto in = oracle::sine(hz, rate, rate, 0.5);
      return gain_db_at(in, fn(in), hz);
    };
    auto lp = [](const AudioBuffer& x) { return dsp::low_pass(x, 4000.0); };
    auto hp = [](const AudioBuffer& x) { return dsp::high_pass(x, 500.0); };
    for (double hz : {250.0, 1000.0, 2000.0}) lp_pass = std::max(lp_pass, std::abs(probe(hz, lp)));
    for (double hz : {8000.0, 10000.0}) {
      if (hz < rate / 2.0 - 500.0) lp_stop = std::min(lp_stop, -probe(hz, lp));
    }
    for (double hz : {1000.0, 2000.0, 4000.0}) hp_pass = std::max(hp_pass, std::abs(probe(hz, hp)));
    for (double hz : {125.0, 250.0}) hp_stop = std::min(hp_stop, -probe(hz, hp));
  }
  // 16 kHz has no room for an 8 kHz probe; one octave above cutoff is checked at 44.1 kHz.
  {
    const auto in = oracle::sine(7000.0, 16000, 16000, 0.5);
    lp_stop = std::min(lp_stop, -gain_db_at(in, dsp::low_pass(in, 4000.0), 7000.0));
  }
  c.expect(lp_pass < 0.5 && hp_pass < 0.5, "passband ripple lp " + fmt(lp_pass) + " hp " + fmt(hp_pass));
  c.expect(lp_stop >= 40.0 && hp_stop >= 40.0, "stopband lp " + fmt(lp_stop) + " hp " + fmt(hp_stop));
  c.note("lp pass " + fmt(lp_pass) + "/stop " + fmt(lp_stop, 1) + " dB, hp pass " + fmt(hp_pass) + "/stop " +
         fmt(hp_stop, 1) + " dB");

  const auto tone = oracle::sine(440.0, 16000, 32000);
  const double shifted = oracle::peak_frequency(dsp::pitch_shift(tone, 1.0), 400, 520, 4000, 28000);
  const double target = 440.0 * std::pow(2.0, 1.0 / 12.0);
  c.expect(std::abs(shifted - target) <= 0.01 * target, "pitch peak " + fmt(shifted, 2));
  c.note("pitch +1 st peak " + fmt(shifted, 2) + " Hz");

  std::size_t worst_stretch = 0;
  for (double f : {0.95, 0.97, 1.0, 1.02, 1.05}) {
    for (std::size_t n : {16000u, 32001u, 80000u}) {
      const auto x = oracle::white_noise(n, 16000, static_cast<std::uint32_t>(n));
      c.expect(dsp::speed(x, f).size() == static_cast<std::size_t>(std::llround(static_cast<double>(n) / f)),
               "speed length");
      const auto st = dsp::time_stretch(x, f);
      const auto expect = static_cast<long long>(std::llround(static_cast<double>(n) / f));
      worst_stretch = std::max<std::size_t>(worst_stretch, static_cast<std::size_t>(std::llabs(
                                                               static_cast<long long>(st.size()) - expect)));
    }
  }
  c.expect(worst_stretch <= StftParams{}.hop_size(), "stretch length off by " + std::to_string(worst_stretch));
  c.note("stretch len err " + std::to_string(worst_stretch) + " samples");
  return c.result();
}

Result metric_oracles() {
  Checks c;
  std::mt19937_64 gen(20240611);
  std::size_t tau_mismatch = 0, tpr_mismatch = 0, fpr_violations = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const auto n = std::uniform_int_distribution<std::size_t>(10, 500)(gen);
    const auto m = std::uniform_int_distribution<std::size_t>(10, 500)(gen);
    const int grid = inst % 3 == 0 ? 0 : std::uniform_int_distribution<int>(2, 40)(gen);
    auto draw = [&](double shift) {
      if (grid == 0) return std::normal_distribution<double>(shift, 1.0)(gen);
      return static_cast<double>(std::uniform_int_distribution<int>(0, grid)(gen)) + shift;
    };
    std::vector<double> clean(n), pos(m);
    for (auto& s : clean) s = draw(0.0);
    for (auto& s : pos) s = draw(inst % 2 ? 0.0 : 1.0);
    const double fpr = inst % 4 == 0 ? 0.01 : std::uniform_real_distribution<double>(0.001, 0.99)(gen);

    const double tau = metrics::calibrate_threshold(clean, fpr);
    const double want = oracle::brute_force_threshold(clean, fpr);
    tau_mismatch += tau != want;
    std::size_t tp = 0, fp = 0;
    for (double s : pos) tp += s >= want;
    for (double s : clean) fp += s >= tau;
    tpr_mismatch += metrics::tpr_at_fpr(pos, clean, fpr) != static_cast<double>(tp) / static_cast<double>(m);
    fpr_violations += static_cast<double>(fp) / static_cast<double>(n) > fpr + 1e-12;
  }
  c.expect(tau_mismatch == 0, std::to_string(tau_mismatch) + " threshold mismatches");
  c.expect(tpr_mismatch == 0, std::to_string(tpr_mismatch) + " tpr mismatches");
  c.expect(fpr_violations == 0, std::to_string(fpr_violations) + " fpr bound violations");

  std::size_t cer_mismatch = 0;
  const std::string alphabet = "abcdefghij";
  for (int inst = 0; inst < 1000; ++inst) {
    auto rand_string = [&](std::size_t lo) {
      std::string s(std::uniform_int_distribution<std::size_t>(lo, 50)(gen), 'a');
      for (auto& ch : s) ch = alphabet[std::uniform_int_distribution<std::size_t>(0, inst % 2 ? 3 : 9)(gen)];
      return s;
    };
    const std::string ref = rand_string(1), hyp = rand_string(0);
    const std::u32string r(ref.begin(), ref.end()), h(hyp.begin(), hyp.end());
    const double want = static_cast<double>(oracle::levenshtein(r, h)) / static_cast<double>(r.size());
    cer_mismatch += metrics::cer(ref, hyp) != want;
  }
  c.expect(cer_mismatch == 0, std::to_string(cer_mismatch) + " cer mismatches");
  c.note("1000 threshold/tpr instances, 1000 cer pairs, mismatches " +
         std::to_string(tau_mismatch + tpr_mismatch + cer_mismatch) + ", fpr violations " +
         std::to_string(fpr_violations));
  return c.result();
}

// Default corpus: 200 clips, 5 s, 44.1 kHz.
orchestrator::EvaluationPlan default_plan() {
  orchestrator::EvaluationPlan plan;
  plan.corpus.synthetic = orchestrator::SyntheticCorpus{corpus::kDefaultClipCount, 0};
  plan.watermarks = {{"ss42", eval::BuiltinWatermark{wm::WatermarkKey{42}}, 16000}};
  plan.transforms = {{"identity", {}, std::nullopt}};
  plan.metrics.sim = plan.metrics.lsd = false;
  plan.seed = 1;
  plan.workers = orchestrator::effective_workers(plan);
  return plan;
}

Result pipeline_anchor() {
  Checks c;
  auto banded = default_plan();
  const auto clips = orchestrator::load_corpus(banded, banded.workers);
  c.expect(clips.size() == 200 && clips[0].audio.size() == 220500 && clips[0].audio.sample_rate() == 44100,
           "default corpus shape");
  const auto rec44 = orchestrator::run_trials(banded, clips, banded.workers, std::nullopt);
  const auto rep44 =
      eval::aggregate(rec44, orchestrator::transform_ids(banded), orchestrator::report_metadata(banded, clips.size()));

  // Same clips, resampled to the watermark's rate and processed natively.
  auto native = banded;
  native.corpus.sample_rate = 16000;
  std::vector<corpus::Clip> clips16;
  for (const auto& clip : clips) clips16.push_back({clip.id, resample(clip.audio, 16000), clip.transcript});
  const auto rec16 = orchestrator::run_trials(native, clips16, native.workers, std::nullopt);
  const auto rep16 =
      eval::aggregate(rec16, orchestrator::transform_ids(native), orchestrator::report_metadata(native, clips.size()));

  const auto& cell44 = rep44.rows.at(0).detection.at(0);
  const auto& cell16 = rep16.rows.at(0).detection.at(0);
  c.expect(cell44.failed == 0 && cell16.failed == 0, "failed trials");
  c.expect(cell44.tpr == 1.0, "banded TPR " + fmt(cell44.tpr));
  c.expect(std::abs(cell44.tpr - cell16.tpr) <= 0.02, "banded vs native TPR gap " + fmt(cell44.tpr - cell16.tpr));
  c.note("TPR banded@44.1k " + fmt(cell44.tpr) + ", native@16k " + fmt(cell16.tpr) + ", AUC " + fmt(cell44.auc) +
         "/" + fmt(cell16.auc) + ", tau " + fmt(cell44.threshold) + "/" + fmt(cell16.threshold));
  return c.result();
}

Result table_trends() {
  Checks c;
  // Run at the watermark's own rate. Banded 44.1 kHz audio sees white noise
  // spread over 22 kHz, and the classical denoiser then mostly removes
  // out-of-band noise.
  auto plan = default_plan();
  plan.corpus.sample_rate = 16000;
  auto stage = [](dsp::TransformParams p) { return attack::CascadeSpec{{dsp::TransformSpec{std::move(p), 0}}}; };
  plan.transforms = {
      {"identity", {}, std::nullopt},
      {"noise_20db", stage(dsp::NoiseParams{20.0}), std::nullopt},
      {"noise_10db", stage(dsp::NoiseParams{10.0}), std::nullopt},
      {"noise_0db", stage(dsp::NoiseParams{0.0}), std::nullopt},
      {"denoise_20db", stage(dsp::DenoiseParams{20.0, 2.0, std::nullopt, std::nullopt}), std::nullopt},
      {"denoise_0db", stage(dsp::DenoiseParams{0.0, 2.0, std::nullopt, std::nullopt}), std::nullopt},
      {"gain_-6db", stage(dsp::GainParams{-6.0}), std::nullopt},
      {"quantize_12bit", stage(dsp::QuantizeParams{12}), std::nullopt},
      {"time_shift_10ms", stage(dsp::TimeShiftParams{160, false}), std::nullopt},
  };
  const auto report = orchestrator::evaluate(plan);
  auto tpr = [&](const std::string& id) {
    for (const auto& r : report.rows)
      if (r.transform_id == id) return r.detection.at(0).tpr;
    return std::numeric_limits<double>::quiet_NaN();
  };
  for (const auto& r : report.rows) c.expect(r.detection.at(0).failed == 0, r.transform_id + " had failures");
  const double n20 = tpr("noise_20db"), n10 = tpr("noise_10db"), n0 = tpr("noise_0db");
  const double d20 = tpr("denoise_20db"), d0 = tpr("denoise_0db");
  c.expect(n20 >= n10 && n10 >= n0, "noise TPR not monotone");
  c.expect(d20 <= n20, "denoise 20 dB above noise 20 dB");
  c.expect(d0 <= 0.10, "denoise 0 dB TPR " + fmt(d0));
  for (const char* id : {"identity", "gain_-6db", "quantize_12bit", "time_shift_10ms"})
    c.expect(tpr(id) == 1.0, std::string(id) + " TPR " + fmt(tpr(id)));
  c.note("noise 20/10/0 " + fmt(n20) + "/" + fmt(n10) + "/" + fmt(n0) + ", denoise 20/0 " + fmt(d20) + "/" + fmt(d0) +
         ", gain/q12/shift " + fmt(tpr("gain_-6db")) + "/" + fmt(tpr("quantize_12bit")) + "/" +
         fmt(tpr("time_shift_10ms")));
  return c.result();
}

// Best admissible cascade over the full candidate space, ordered by TPR,
// then stage count, then quality in metric-name order.
std::optional<attack::CascadeScore> enumerate(const attack::AttackSearchConfig& cfg, const attack::SearchTarget& t,
                                              const std::vector<corpus::Clip>& clips, std::uint64_t seed,
                                              std::size_t* count) {
  std::vector<AudioBuffer> marked;
  for (const auto& clip : clips) marked.push_back(t.embed(clip.audio));
  const auto eval_seed = derive_seed(seed, "search");
  std::optional<attack::CascadeScore> best;
  std::vector<attack::CascadeSpec> level{attack::CascadeSpec{}};
  for (std::size_t d = 0; d < cfg.max_stages; ++d) {
    std::vector<attack::CascadeSpec> next;
    for (const auto& p : level)
      for (const auto& cand : cfg.candidates) {
        auto cas = p;
        cas.stages.push_back(cand);
        next.push_back(cas);
        const auto s = attack::score_cascade(cfg, cas, t, clips, marked, eval_seed);
        ++*count;
        if (!s.admissible) continue;
        bool take = !best || s.tpr < best->tpr;
        if (best && s.tpr == best->tpr) {
          if (s.cascade.stages.size() != best->cascade.stages.size())
            take = s.cascade.stages.size() < best->cascade.stages.size();
          else
            for (auto a = s.quality.cbegin(), b = std::as_const(best->quality).cbegin(); a != s.quality.end(); ++a, ++b)
              if (a->second != b->second) {
                take = a->second > b->second;
                break;
              }
        }
        if (take) best = s;
      }
    level = std::move(next);
  }
  return best;
}

// Recomputes the calibration-split SNR of a cascade from scratch.
double calibration_snr(const attack::CascadeSpec& cas, const attack::SearchTarget& t,
                       const std::vector<corpus::Clip>& clips, std::uint64_t seed) {
  const auto eval_seed = derive_seed(seed, "search");
  bool any_cal = false, any_held = false;
  for (const auto& clip : clips) (attack::is_heldout(clip.id) ? any_held : any_cal) = true;
  double sum = 0;
  std::size_t n = 0;
  for (const auto& clip : clips) {
    if (any_cal && any_held && attack::is_heldout(clip.id)) continue;
    const auto marked = t.embed(clip.audio);
    const auto out = attack::apply_cascade(cas.reseeded(derive_seed(derive_seed(eval_seed, clip.id), "calibration")),
                                           marked);
    sum += snr_oracle(marked.samples(), out.samples());
    ++n;
  }
  return sum / static_cast<double>(n);
}

Result attack_search() {
  Checks c;
  auto noise = [](double snr) { return dsp::TransformSpec{dsp::NoiseParams{snr}, 0}; };

  // Built-in watermark, candidates noise {20, 10, 0} dB, floor admitting >= 10 dB.
  const auto clips = corpus::synthetic_clips(60, 3.0, 16000, 5);
  const wm::WatermarkKey key{42};
  const attack::SearchTarget ss{[key](const AudioBuffer& x) { return wm::embed(x, key); },
                                [key](const AudioBuffer& x) { return wm::detect(x, key); }};
  attack::AttackSearchConfig cfg;
  cfg.candidates = {noise(20.0), noise(10.0), noise(0.0)};
  cfg.quality_floor = {{attack::kSnrMetric, 9.99}};
  cfg.max_stages = 2;
  cfg.beam_width = 3;
  const auto out = attack::search_cascade(cfg, ss, clips, 8);
  std::size_t enumerated = 0;
  const auto best = enumerate(cfg, ss, clips, 8, &enumerated);
  c.expect(best.has_value() && !out.fallback, "no admissible cascade");
  if (best) {
    c.expect(out.cascade == best->cascade, "beam " + out.cascade.describe() + " vs exhaustive " +
                                               best->cascade.describe());
    c.expect(out.tpr == best->tpr, "tpr differs");
  }
  c.expect(out.cascade.stages.size() == 1 && out.cascade.stages[0] == noise(10.0),
           "expected noise 10 dB, got " + out.cascade.describe());
  const double snr = calibration_snr(out.cascade, ss, clips, 8);
  c.expect(snr >= 9.99, "returned cascade below floor: " + fmt(snr));
  c.note("watermark space: " + std::to_string(enumerated) + " cascades, best " + out.cascade.describe() + " TPR " +
         fmt(out.tpr) + " (baseline " + fmt(out.baseline_tpr) + "), snr " + fmt(snr, 2) + " dB");

  // Random 3-candidate spaces against a cheap synthetic detector (DC offset,
  // read back as the sample mean).
  std::vector<corpus::Clip> toy;
  for (std::size_t i = 0; i < 160; ++i) {
    std::vector<float> s(256);
    for (std::size_t k = 0; k < s.size(); ++k)
      s[k] = static_cast<float>(0.14 * std::sin(2.0 * std::numbers::pi * static_cast<double>((1 + i % 20) * k) / 256.0 +
                                                0.1 * static_cast<double>(i)));
    toy.push_back({"toy-" + std::to_string(i), AudioBuffer(std::move(s), 8000), std::nullopt});
  }
  const attack::SearchTarget dc{[](const AudioBuffer& x) {
                                  AudioBuffer y = x;
                                  for (auto& v : y.samples()) v += 0.003f;
                                  return y;
                                },
                                [](const AudioBuffer& y) {
                                  double m = 0;
                                  for (float v : y.samples()) m += v;
                                  return m / static_cast<double>(y.size());
                                }};
  const std::vector<dsp::TransformSpec> pool = {
      noise(20.0), noise(10.0), noise(0.0), {dsp::GainParams{-20.0}, 0}, {dsp::GainParams{20.0}, 0},
      {dsp::QuantizeParams{6}, 0}, {dsp::DropoutParams{0.05}, 0}, {dsp::TimeShiftParams{5, false}, 0},
      {dsp::LowPassParams{2000.0}, 0}};
  std::mt19937_64 gen(99);
  std::size_t agree = 0, instances = 0, floor_ok = 0, returned = 0;
  for (int inst = 0; inst < 30; ++inst) {
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), gen);
    attack::AttackSearchConfig rc;
    rc.candidates = {pool[idx[0]], pool[idx[1]], pool[idx[2]]};
    rc.quality_floor = {{attack::kSnrMetric, std::uniform_real_distribution<double>(-20.0, 30.0)(gen)}};
    rc.max_stages = 2;
    rc.beam_width = 3;
    const auto res = attack::search_cascade(rc, dc, toy, inst);
    std::size_t cnt = 0;
    const auto opt = enumerate(rc, dc, toy, inst, &cnt);
    ++instances;
    const bool same = opt ? (!res.fallback && res.cascade == opt->cascade && res.tpr == opt->tpr)
                          : (res.fallback && res.cascade.is_identity());
    agree += same;
    c.expect(same, "instance " + std::to_string(inst) + ": " + res.cascade.describe());
    if (!res.fallback) {
      ++returned;
      const double q = calibration_snr(res.cascade, dc, toy, inst);
      floor_ok += q >= rc.quality_floor.at(attack::kSnrMetric);
      c.expect(q >= rc.quality_floor.at(attack::kSnrMetric), "floor violated in instance " + std::to_string(inst));
    }
  }
  c.note("random spaces " + std::to_string(agree) + "/" + std::to_string(instances) + " match enumeration, floors " +
         std::to_string(floor_ok) + "/" + std::to_string(returned));
  return c.result();
}

Result orchestration() {
  Checks c;
  oracle::TempDir dir;
  orchestrator::EvaluationPlan plan;
  plan.corpus.synthetic = orchestrator::SyntheticCorpus{24, 4};
  plan.corpus.sample_rate = 44100;
  plan.corpus.duration_s = 2.0;
  plan.watermarks = {{"ss42", eval::BuiltinWatermark{wm::WatermarkKey{42}}, 16000},
                     {"ss7", eval::BuiltinWatermark{wm::WatermarkKey{7}}, 16000}};
  auto stage = [](dsp::TransformParams p) { return attack::CascadeSpec{{dsp::TransformSpec{std::move(p), 0}}}; };
  plan.transforms = {{"identity", {}, std::nullopt},
                     {"noise_20db", stage(dsp::NoiseParams{20.0}), std::nullopt},
                     {"denoise_10db", stage(dsp::DenoiseParams{10.0, 2.0, std::nullopt, std::nullopt}), std::nullopt},
                     {"speed", stage(dsp::SpeedParams{}), std::nullopt},
                     {"lp_3k", stage(dsp::LowPassParams{3000.0}), report::SweepPoint{"lowpass", 3.0}}};
  plan.seed = 2024;

  const std::vector<std::string> files = {"records/trials.jsonl", "records/run.json",  "reports/report.csv",
                                          "reports/report.json",  "reports/report.txt", "reports/plot_data.csv"};
  auto run_into = [&](const std::string& name, std::size_t workers) {
    auto p = plan;
    p.output_dir = dir / name;
    p.workers = workers;
    return orchestrator::run_parallel(p);
  };
  auto same_files = [&](const std::string& a, const std::string& b) {
    for (const auto& f : files) {
      const auto x = read_file(dir / a / f);
      if (x.empty() || x != read_file(dir / b / f)) return false;
    }
    return true;
  };

  run_into("w1", 1);
  run_into("w8", 8);
  c.expect(same_files("w1", "w8"), "workers 1 vs 8 outputs differ");

  // Interrupted run: a copy of w1 with part of its cache removed and no reports.
  fs::copy(dir / "w1", dir / "resumed", fs::copy_options::recursive);
  fs::remove_all(dir / "resumed" / "reports");
  fs::remove_all(dir / "resumed" / "records");
  std::vector<fs::path> cached;
  for (const auto& e : fs::directory_iterator(dir / "resumed" / "cache")) cached.push_back(e.path());
  std::sort(cached.begin(), cached.end());
  std::size_t removed = 0;
  for (std::size_t i = 0; i < cached.size(); i += 2, ++removed) fs::remove(cached[i]);
  const auto resumed = run_into("resumed", 8);
  c.expect(resumed.stats.cache_hits == resumed.stats.trials - removed,
           "resume recomputed " + std::to_string(resumed.stats.trials - resumed.stats.cache_hits) + " of " +
               std::to_string(removed) + " missing");
  c.expect(same_files("w1", "resumed"), "resumed outputs differ");

  const auto again = orchestrator::rerender(dir / "w1");
  c.expect(report::render_csv(again) == read_file(dir / "w1" / "reports/report.csv"), "re-rendered CSV differs");
  c.expect(report::render_json(again) == read_file(dir / "w1" / "reports/report.json"), "re-rendered JSON differs");
  c.expect(report::render_plot_data(again, orchestrator::load_sweeps(dir / "w1")) ==
               read_file(dir / "w1" / "reports/plot_data.csv"),
           "re-rendered plot data differs");
  c.note(std::to_string(resumed.stats.trials) + " trials, workers {1,8} identical, resume recomputed " +
         std::to_string(resumed.stats.trials - resumed.stats.cache_hits) + "/" + std::to_string(removed) +
         " dropped, re-render byte-exact");
  return c.result();
}

struct Criterion {
  const char* name;
  const char* title;
  double limit_s;  // <= 0: no runtime bound
  std::function<Result()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {"dsp", "DSP contracts", 60.0, dsp_contracts},
      {"metrics", "Metric oracles", 30.0, metric_oracles},
      {"pipeline", "Pipeline anchor", 300.0, pipeline_anchor},
      {"trends", "Qualitative robustness trends", 600.0, table_trends},
      {"search", "Attack search", 0.0, attack_search},
      {"orchestration", "Orchestration determinism", 0.0, orchestration},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  bool all_pass = true;
  for (const auto& cr : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), cr.name) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = cr.run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.limit_s > 0 && secs > cr.limit_s) {
      r.pass = false;
      r.detail += " | runtime " + fmt(secs, 1) + " s exceeds " + fmt(cr.limit_s, 0) + " s";
    }
    all_pass = all_pass && r.pass;
    std::printf("%s  %-32s %7.1f s  %s\n", r.pass ? "PASS" : "FAIL", cr.title, secs, r.detail.c_str());
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
