#include "markbench/phase_vocoder.hpp"

#include <cmath>
#include <numbers>

#include "markbench/errors.hpp"
#include "markbench/fft.hpp"

namespace markbench::dsp {
namespace {

double princarg(double phase) {
  return phase - 2.0 * std::numbers::pi * std::round(phase / (2.0 * std::numbers::pi));
}

}  // namespace

std::vector<double> phase_vocoder_stretch(std::span<const double> input, double rate, const StftParams& params) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw ParameterError("time-stretch rate must be positive");
  const std::size_t n = params.fft_size();
  const std::size_t bins = params.bins();
  const auto hop = static_cast<double>(params.hop_size());
  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(input.size()) / rate));
  std::vector<double> out(out_len, 0.0);
  if (out_len == 0 || input.empty()) return out;

  const Fft fft(n);
  const auto window = params.window_samples();
  std::vector<double> norm(out_len, 0.0);
  std::vector<double> frame(n);
  std::vector<Complex> spectrum(bins);
  std::vector<double> magnitude(bins), phase(bins), prev_phase(bins), syn_phase(bins), prev_syn(bins);
  std::vector<std::size_t> peaks;
  peaks.reserve(bins);

  const auto half = static_cast<long long>(n / 2);
  const auto in_len = static_cast<long long>(input.size());
  const auto o_len = static_cast<long long>(out_len);
  const long long m_first = -static_cast<long long>(std::ceil(static_cast<double>(n) / (2.0 * hop)));
  const long long m_last = static_cast<long long>(std::ceil((static_cast<double>(out_len) + n / 2.0) / hop));

  bool first = true;
  long long prev_start = 0;
  for (long long m = m_first; m <= m_last; ++m) {
    const long long a_start = std::llround(static_cast<double>(m) * hop * rate) - half;
    const long long s_start = m * static_cast<long long>(params.hop_size()) - half;

    for (std::size_t i = 0; i < n; ++i) {
      const long long idx = a_start + static_cast<long long>(i);
      frame[i] = (idx >= 0 && idx < in_len) ? input[static_cast<std::size_t>(idx)] * window[i] : 0.0;
    }
    fft.forward_real(frame, spectrum);
    for (std::size_t k = 0; k < bins; ++k) {
      magnitude[k] = std::abs(spectrum[k]);
      phase[k] = std::arg(spectrum[k]);
    }

    if (first) {
      syn_phase = phase;
      first = false;
    } else {
      const auto delta_a = static_cast<double>(a_start - prev_start);
      peaks.clear();
      for (std::size_t k = 0; k < bins; ++k) {
        const double v = magnitude[k];
        if (v <= 0.0) continue;
        bool is_peak = true;
        for (std::size_t j = (k >= 2 ? k - 2 : 0); j <= std::min(bins - 1, k + 2); ++j) {
          if (j != k && magnitude[j] > v) {
            is_peak = false;
            break;
          }
        }
        if (is_peak) peaks.push_back(k);
      }
      if (peaks.empty()) {
        for (std::size_t k = 0; k < bins; ++k) syn_phase[k] = phase[k];
      } else {
        // Region boundaries: the magnitude minimum between consecutive peaks.
        std::size_t region_start = 0;
        for (std::size_t p = 0; p < peaks.size(); ++p) {
          const std::size_t kp = peaks[p];
          std::size_t region_end = bins;
          if (p + 1 < peaks.size()) {
            std::size_t lowest = kp;
            for (std::size_t j = kp; j <= peaks[p + 1]; ++j) {
              if (magnitude[j] < magnitude[lowest]) lowest = j;
            }
            region_end = std::max(lowest, kp + 1);
          }
          const double omega = 2.0 * std::numbers::pi * static_cast<double>(kp) / static_cast<double>(n);
          const double deviation = princarg(phase[kp] - prev_phase[kp] - omega * delta_a);
          const double inst = omega + (delta_a > 0.0 ? deviation / delta_a : 0.0);
          const double peak_phase = princarg(prev_syn[kp] + inst * hop);
          for (std::size_t k = region_start; k < region_end; ++k) {
            syn_phase[k] = peak_phase + (phase[k] - phase[kp]);
          }
          region_start = region_end;
        }
      }
    }

    for (std::size_t k = 0; k < bins; ++k) spectrum[k] = std::polar(magnitude[k], syn_phase[k]);
    fft.inverse_real(spectrum, frame);
    for (std::size_t i = 0; i < n; ++i) {
      const long long idx = s_start + static_cast<long long>(i);
      if (idx < 0 || idx >= o_len) continue;
      out[static_cast<std::size_t>(idx)] += frame[i] * window[i];
      norm[static_cast<std::size_t>(idx)] += window[i] * window[i];
    }

    prev_phase = phase;
    prev_syn = syn_phase;
    prev_start = a_start;
  }

  for (std::size_t i = 0; i < out_len; ++i) {
    if (norm[i] > 1e-12) out[i] /= norm[i];
  }
  return out;
}

}  // namespace markbench::dsp
