#include "markbench/filters.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "markbench/errors.hpp"
#include "markbench/fft.hpp"

namespace markbench::dsp {

double Biquad::magnitude_at(double hz, double sample_rate) const {
  const double w = 2.0 * std::numbers::pi * hz / sample_rate;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  return std::abs((b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2));
}

void filter_in_place(std::span<const Biquad> cascade, std::span<double> signal) {
  for (const Biquad& q : cascade) {
    double s1 = 0.0, s2 = 0.0;
    for (double& x : signal) {
      const double y = q.b0 * x + s1;
      s1 = q.b1 * x - q.a1 * y + s2;
      s2 = q.b2 * x - q.a2 * y;
      x = y;
    }
  }
}

namespace {

std::vector<Biquad> butterworth(int order, double cutoff_hz, double sample_rate, bool high) {
  if (order < 2 || order % 2 != 0) throw ParameterError("Butterworth order must be even and >= 2");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate / 2.0)) {
    throw ParameterError("filter cutoff " + std::to_string(cutoff_hz) + " Hz outside (0, Nyquist=" +
                         std::to_string(sample_rate / 2.0) + ")");
  }
  const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate);
  std::vector<Biquad> sections;
  for (int i = 1; i <= order / 2; ++i) {
    const double q = 1.0 / (2.0 * std::sin((2.0 * i - 1.0) * std::numbers::pi / (2.0 * order)));
    const double norm = 1.0 / (1.0 + k / q + k * k);
    Biquad s;
    if (high) {
      s.b0 = norm;
      s.b1 = -2.0 * norm;
    } else {
      s.b0 = k * k * norm;
      s.b1 = 2.0 * s.b0;
    }
    s.b2 = s.b0;
    s.a1 = 2.0 * (k * k - 1.0) * norm;
    s.a2 = (1.0 - k / q + k * k) * norm;
    sections.push_back(s);
  }
  return sections;
}

}  // namespace

std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double sample_rate) {
  return butterworth(order, cutoff_hz, sample_rate, false);
}

std::vector<Biquad> butterworth_highpass(int order, double cutoff_hz, double sample_rate) {
  return butterworth(order, cutoff_hz, sample_rate, true);
}

Biquad peaking(double center_hz, double gain_db, double q, double sample_rate) {
  const double a = std::pow(10.0, gain_db / 40.0);
  const double w0 = 2.0 * std::numbers::pi * center_hz / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha / a;
  Biquad s;
  s.b0 = (1.0 + alpha * a) / a0;
  s.b1 = -2.0 * std::cos(w0) / a0;
  s.b2 = (1.0 - alpha * a) / a0;
  s.a1 = s.b1;
  s.a2 = (1.0 - alpha / a) / a0;
  return s;
}

double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

std::vector<double> fir_lowpass(std::size_t taps, double cutoff_hz, double sample_rate, double kaiser_beta) {
  if (taps % 2 == 0) throw ParameterError("FIR tap count must be odd");
  const double fc = cutoff_hz / sample_rate;
  const auto mid = static_cast<double>(taps - 1) / 2.0;
  const double i0 = bessel_i0(kaiser_beta);
  std::vector<double> h(taps);
  double sum = 0.0;
  for (std::size_t n = 0; n < taps; ++n) {
    const double t = static_cast<double>(n) - mid;
    const double sinc = t == 0.0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
    const double r = t / mid;
    h[n] = sinc * bessel_i0(kaiser_beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0;
    sum += h[n];
  }
  for (double& v : h) v /= sum;
  return h;
}

std::vector<double> fir_apply_centered(std::span<const double> signal, std::span<const double> taps) {
  if (signal.empty()) return {};
  const auto full = fft_convolve(signal, taps);
  const std::size_t delay = (taps.size() - 1) / 2;
  return {full.begin() + static_cast<std::ptrdiff_t>(delay),
          full.begin() + static_cast<std::ptrdiff_t>(delay + signal.size())};
}

}  // namespace markbench::dsp
