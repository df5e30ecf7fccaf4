#pragma once

// Reference computations used as test oracles. Deliberately naive: direct
// sums and textbook recurrences, sharing no code with the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "markbench/audio_buffer.hpp"

namespace oracle {

using markbench::AudioBuffer;

inline AudioBuffer sine(double hz, int rate, std::size_t n, double amp = 0.5, double phase = 0.0) {
  std::vector<float> s(n);
  for (std::size_t i = 0; i < n; ++i)
    s[i] = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate + phase));
  return {std::move(s), rate};
}

inline AudioBuffer white_noise(std::size_t n, int rate, std::uint32_t seed, double stddev = 0.1) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<float> s(n);
  for (auto& v : s) v = static_cast<float>(std::clamp(dist(gen), -0.99, 0.99));
  return {std::move(s), rate};
}

inline std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      double ang = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

/// |DTFT|^2 of samples [begin, end) at one frequency (Hann-weighted).
inline double tone_power(const AudioBuffer& b, double hz, std::size_t begin = 0, std::size_t end = 0) {
  if (end == 0 || end > b.size()) end = b.size();
  const std::size_t n = end - begin;
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(n));
    double ang = -2.0 * std::numbers::pi * hz * static_cast<double>(i) / b.sample_rate();
    acc += w * static_cast<double>(b[begin + i]) * std::complex<double>(std::cos(ang), std::sin(ang));
  }
  return std::norm(acc);
}

/// Frequency in [lo, hi] maximizing the DTFT power, by a coarse grid scan
/// refined with golden-section search.
inline double peak_frequency(const AudioBuffer& b, double lo, double hi, std::size_t begin = 0, std::size_t end = 0) {
  double best = lo, best_p = -1.0;
  const int steps = 400;
  for (int i = 0; i <= steps; ++i) {
    double f = lo + (hi - lo) * i / steps;
    double p = tone_power(b, f, begin, end);
    if (p > best_p) best_p = p, best = f;
  }
  double step = (hi - lo) / steps;
  double a = std::max(lo, best - step), c = std::min(hi, best + step);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 60; ++it) {
    double x1 = c - g * (c - a), x2 = a + g * (c - a);
    if (tone_power(b, x1, begin, end) > tone_power(b, x2, begin, end))
      c = x2;
    else
      a = x1;
  }
  return 0.5 * (a + c);
}

/// Amplitude of a sinusoid at `hz` estimated by least squares over [begin, end).
inline double tone_amplitude(const AudioBuffer& b, double hz, std::size_t begin, std::size_t end) {
  double ss = 0, cc = 0, sc = 0, ys = 0, yc = 0;
  for (std::size_t i = begin; i < end; ++i) {
    double ang = 2.0 * std::numbers::pi * hz * static_cast<double>(i) / b.sample_rate();
    double s = std::sin(ang), c = std::cos(ang), y = b[i];
    ss += s * s, cc += c * c, sc += s * c, ys += y * s, yc += y * c;
  }
  double det = ss * cc - sc * sc;
  double a = (ys * cc - yc * sc) / det, bb = (yc * ss - ys * sc) / det;
  return std::hypot(a, bb);
}

inline double energy(const AudioBuffer& b) {
  double e = 0.0;
  for (float v : b.samples()) e += static_cast<double>(v) * v;
  return e;
}

/// Classic two-row Levenshtein distance over code points.
inline std::size_t levenshtein(const std::u32string& a, const std::u32string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// Threshold by exhaustive enumeration: among all candidate thresholds
/// (every observed clean score and one above the maximum) keep those with
/// false-positive fraction <= fpr, and return the smallest.
inline double brute_force_threshold(const std::vector<double>& clean, double fpr) {
  std::vector<double> cands = clean;
  double mx = *std::max_element(clean.begin(), clean.end());
  cands.push_back(std::nextafter(mx, INFINITY));
  double best = INFINITY;
  for (double t : cands) {
    std::size_t fp = 0;
    for (double s : clean) fp += s >= t;
    // Tolerance absorbs fpr * N landing a hair below an integer.
    if (static_cast<double>(fp) <= fpr * static_cast<double>(clean.size()) + 1e-9) best = std::min(best, t);
  }
  return best;
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

/// Asymptotic critical value of the two-sample KS test at alpha = 0.01.
inline double ks_critical_001(std::size_t n, std::size_t m) {
  return 1.628 * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * static_cast<double>(m)));
}

inline double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  double pos = q * static_cast<double>(v.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("markbench-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
