#pragma once

#include <array>
#include <span>
#include <vector>

namespace markbench::dsp {

/// Normalized second-order section (a0 == 1).
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  /// Complex gain magnitude at a frequency (Hz).
  [[nodiscard]] double magnitude_at(double hz, double sample_rate) const;
};

/// Runs a cascade of biquads over a signal in place (transposed direct form II).
void filter_in_place(std::span<const Biquad> cascade, std::span<double> signal);

/// Butterworth low/high-pass of even order via the bilinear transform.
std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double sample_rate);
std::vector<Biquad> butterworth_highpass(int order, double cutoff_hz, double sample_rate);

/// Peaking EQ section applying gain_db at center_hz.
Biquad peaking(double center_hz, double gain_db, double q, double sample_rate);

/// Linear-phase Kaiser-windowed low-pass FIR with an odd number of taps,
/// unit DC gain. Group delay is (taps - 1) / 2 samples.
std::vector<double> fir_lowpass(std::size_t taps, double cutoff_hz, double sample_rate, double kaiser_beta);

/// Applies a symmetric odd-length FIR with its group delay removed, so the
/// output is time-aligned with the input and has the same length.
std::vector<double> fir_apply_centered(std::span<const double> signal, std::span<const double> taps);

double bessel_i0(double x);

}  // namespace markbench::dsp
