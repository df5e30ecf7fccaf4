#include "markbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "markbench/errors.hpp"
#include "markbench/stft.hpp"

namespace markbench::metrics {
namespace {

std::size_t allowed_false_positives(std::size_t n, double fpr) {
  // Guard against fpr * n landing a hair below an integer.
  return static_cast<std::size_t>(std::floor(fpr * static_cast<double>(n) + 1e-9));
}

}  // namespace

double calibrate_threshold(std::span<const double> clean_scores, double fpr) {
  if (clean_scores.empty()) throw ParameterError("calibrate_threshold: no clean scores");
  if (!(fpr > 0.0 && fpr < 1.0)) throw ParameterError("calibrate_threshold: fpr must lie in (0, 1)");
  std::vector<double> sorted(clean_scores.begin(), clean_scores.end());
  for (double s : sorted) {
    if (!std::isfinite(s)) throw ParameterError("calibrate_threshold: non-finite score");
  }
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t k = allowed_false_positives(sorted.size(), fpr);
  const double above_all = std::nextafter(sorted.front(), std::numeric_limits<double>::infinity());
  if (k == 0) return above_all;
  // sorted[k-1] is the k-th largest score. It is a valid threshold unless the
  // (k+1)-th score ties with it; then step up to the next larger distinct value.
  std::size_t i = k - 1;
  if (k < sorted.size() && sorted[k] == sorted[i]) {
    while (i > 0 && sorted[i - 1] == sorted[k]) --i;
    if (i == 0) return above_all;
    return sorted[i - 1];
  }
  return sorted[i];
}

double pass_rate(std::span<const double> scores, double tau) {
  if (scores.empty()) return 0.0;
  const auto passed = std::count_if(scores.begin(), scores.end(), [tau](double s) { return s >= tau; });
  return static_cast<double>(passed) / static_cast<double>(scores.size());
}

double tpr_at_fpr(std::span<const double> positive_scores, std::span<const double> clean_scores, double fpr) {
  if (positive_scores.empty()) throw ParameterError("tpr_at_fpr: no positive scores");
  return pass_rate(positive_scores, calibrate_threshold(clean_scores, fpr));
}

RocCurve roc(std::span<const double> positive_scores, std::span<const double> clean_scores) {
  if (positive_scores.empty() || clean_scores.empty()) throw ParameterError("roc: empty score list");
  struct Labeled {
    double score;
    bool positive;
  };
  std::vector<Labeled> all;
  all.reserve(positive_scores.size() + clean_scores.size());
  for (double s : positive_scores) all.push_back({s, true});
  for (double s : clean_scores) all.push_back({s, false});
  std::sort(all.begin(), all.end(), [](const Labeled& a, const Labeled& b) { return a.score > b.score; });

  const auto np = static_cast<double>(positive_scores.size());
  const auto nn = static_cast<double>(clean_scores.size());
  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < all.size();) {
    const double threshold = all[i].score;
    while (i < all.size() && all[i].score == threshold) {
      (all[i].positive ? tp : fp) += 1;
      ++i;
    }
    curve.points.push_back({static_cast<double>(fp) / nn, static_cast<double>(tp) / np});
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    curve.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return curve;
}

std::u32string normalize_transcript(std::string_view utf8) {
  std::u32string decoded;
  for (std::size_t i = 0; i < utf8.size();) {
    const auto c = static_cast<unsigned char>(utf8[i]);
    char32_t cp = 0;
    std::size_t len = 1;
    if (c < 0x80) {
      cp = c;
    } else if ((c >> 5) == 0x6 && i + 1 < utf8.size()) {
      cp = ((c & 0x1Fu) << 6) | (static_cast<unsigned char>(utf8[i + 1]) & 0x3Fu);
      len = 2;
    } else if ((c >> 4) == 0xE && i + 2 < utf8.size()) {
      cp = ((c & 0x0Fu) << 12) | ((static_cast<unsigned char>(utf8[i + 1]) & 0x3Fu) << 6) |
           (static_cast<unsigned char>(utf8[i + 2]) & 0x3Fu);
      len = 3;
    } else if ((c >> 3) == 0x1E && i + 3 < utf8.size()) {
      cp = ((c & 0x07u) << 18) | ((static_cast<unsigned char>(utf8[i + 1]) & 0x3Fu) << 12) |
           ((static_cast<unsigned char>(utf8[i + 2]) & 0x3Fu) << 6) | (static_cast<unsigned char>(utf8[i + 3]) & 0x3Fu);
      len = 4;
    } else {
      cp = 0xFFFD;
    }
    decoded.push_back(cp);
    i += len;
  }

  std::u32string out;
  bool pending_space = false;
  for (char32_t cp : decoded) {
    const bool space = cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' || cp == U'\v';
    if (space) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(cp >= U'A' && cp <= U'Z' ? cp + (U'a' - U'A') : cp);
  }
  return out;
}

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double cer(std::string_view reference, std::string_view hypothesis) {
  const auto ref = normalize_transcript(reference);
  if (ref.empty()) throw ParameterError("cer: reference transcript is empty after normalization");
  const auto hyp = normalize_transcript(hypothesis);
  return static_cast<double>(edit_distance(ref, hyp)) / static_cast<double>(ref.size());
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw ParameterError("cosine_similarity: vectors differ in size or are empty");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na <= 0.0 || nb <= 0.0) throw ParameterError("cosine_similarity: zero-norm vector");
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace

std::vector<double> mfcc_embedding(const AudioBuffer& buffer) {
  const int rate = buffer.sample_rate();
  if (buffer.size() < static_cast<std::size_t>(rate)) throw LengthError("mfcc_embedding needs at least 1 s of audio");
  const std::size_t fft = next_power_of_two(static_cast<std::size_t>(0.032 * rate));
  const StftParams params(fft, fft / 4);
  const Spectrogram spec = stft(buffer, params);

  // Triangular mel filterbank between 20 Hz and min(8 kHz, Nyquist).
  const double lo = hz_to_mel(20.0);
  const double hi = hz_to_mel(std::min(8000.0, rate / 2.0));
  std::vector<double> edges(kMelBands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kMelBands + 1));
  }
  std::vector<std::vector<double>> weights(kMelBands, std::vector<double>(params.bins(), 0.0));
  for (std::size_t m = 0; m < kMelBands; ++m) {
    for (std::size_t k = 0; k < params.bins(); ++k) {
      const double f = spec.bin_hz(k);
      if (f > edges[m] && f < edges[m + 2]) {
        weights[m][k] = f <= edges[m + 1] ? (f - edges[m]) / (edges[m + 1] - edges[m])
                                          : (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
      }
    }
  }

  std::vector<double> sum(kMfccCoefficients, 0.0), sum_sq(kMfccCoefficients, 0.0);
  std::vector<double> log_mel(kMelBands);
  const double scale = std::sqrt(2.0 / kMelBands);
  for (std::size_t f = 0; f < spec.frames(); ++f) {
    for (std::size_t m = 0; m < kMelBands; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < params.bins(); ++k) {
        if (weights[m][k] > 0.0) e += weights[m][k] * std::norm(spec.at(f, k));
      }
      log_mel[m] = std::log(e + 1e-10);
    }
    for (std::size_t c = 1; c <= kMfccCoefficients; ++c) {
      double v = 0.0;
      for (std::size_t m = 0; m < kMelBands; ++m) {
        v += log_mel[m] * std::cos(std::numbers::pi * static_cast<double>(c) * (m + 0.5) / kMelBands);
      }
      v *= scale;
      sum[c - 1] += v;
      sum_sq[c - 1] += v * v;
    }
  }
  const auto frames = static_cast<double>(spec.frames());
  std::vector<double> embedding;
  embedding.reserve(2 * kMfccCoefficients);
  for (std::size_t c = 0; c < kMfccCoefficients; ++c) embedding.push_back(sum[c] / frames);
  for (std::size_t c = 0; c < kMfccCoefficients; ++c) {
    const double mean = sum[c] / frames;
    embedding.push_back(std::sqrt(std::max(0.0, sum_sq[c] / frames - mean * mean)));
  }
  return embedding;
}

double log_spectral_distance(const AudioBuffer& reference, const AudioBuffer& test) {
  if (reference.size() != test.size() || reference.sample_rate() != test.sample_rate()) {
    throw ParameterError("log_spectral_distance: inputs differ in length or rate");
  }
  if (reference.empty()) return 0.0;
  const Spectrogram a = stft(reference);
  const Spectrogram b = stft(test);
  constexpr double kFloor = 1e-20;
  double total = 0.0;
  for (std::size_t f = 0; f < a.frames(); ++f) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.bins(); ++k) {
      const double pa = std::norm(a.at(f, k));
      const double pb = std::norm(b.at(f, k));
      if (pa == 0.0 && pb == 0.0) continue;
      const double d = 10.0 * std::log10((pa + kFloor) / (pb + kFloor));
      acc += d * d;
    }
    total += std::sqrt(acc / static_cast<double>(a.bins()));
  }
  return total / static_cast<double>(a.frames());
}

}  // namespace markbench::metrics
