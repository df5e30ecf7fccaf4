#include <gtest/gtest.h>

#include <cmath>

#include "markbench/errors.hpp"
#include "markbench/resample.hpp"
#include "markbench/stft.hpp"
#include "oracles.hpp"

using namespace markbench;

TEST(Resample, SameRateIsBitIdentical) {
  AudioBuffer b = oracle::white_noise(1234, 22050, 1);
  EXPECT_EQ(resample(b, 22050), b);
}

TEST(Resample, LengthContract) {
  EXPECT_EQ(resample(AudioBuffer::zeros(44100, 44100), 16000).size(), 16000u);
  for (auto [n, from, to] : {std::tuple{1000, 44100, 16000}, {777, 16000, 44100}, {5, 48000, 8000}, {12345, 22050, 24000}}) {
    auto expect = static_cast<std::size_t>(std::llround(static_cast<double>(n) * to / from));
    EXPECT_EQ(resample(AudioBuffer::zeros(n, from), to).size(), expect) << n << " " << from << "->" << to;
  }
}

TEST(Resample, SinePeakPreserved) {
  AudioBuffer out = resample(oracle::sine(440, 44100, 44100), 16000);
  EXPECT_EQ(out.sample_rate(), 16000);
  EXPECT_NEAR(oracle::peak_frequency(out, 400, 480), 440.0, 1.0);
}

TEST(Resample, AliasingSuppressedWhenDownsampling) {
  // 10 kHz lies above the 8 kHz Nyquist of the target; it must not fold back
  // to 6 kHz.
  AudioBuffer in = oracle::sine(10000, 44100, 44100, 0.5);
  AudioBuffer ref = oracle::sine(3000, 44100, 44100, 0.5);
  AudioBuffer out = resample(in, 16000), ref_out = resample(ref, 16000);
  const std::size_t a = 2000, b = 14000;
  double alias = oracle::tone_amplitude(out, 6000, a, b);
  double pass = oracle::tone_amplitude(ref_out, 3000, a, b);
  EXPECT_LT(20 * std::log10(alias / pass), -60.0);
}

TEST(Resample, RoundTripOfBandLimitedSignal) {
  // Content below 0.9 of the lower Nyquist survives a->b->a within -40 dB.
  std::vector<float> s(44100);
  for (std::size_t i = 0; i < s.size(); ++i) {
    double t = static_cast<double>(i) / 44100;
    s[i] = static_cast<float>(0.3 * std::sin(2 * M_PI * 250 * t) + 0.2 * std::sin(2 * M_PI * 1900 * t + 1) +
                              0.1 * std::sin(2 * M_PI * 6800 * t + 2));
  }
  AudioBuffer x(std::move(s), 44100);
  AudioBuffer back = resample(resample(x, 16000), 44100);
  ASSERT_EQ(back.size(), x.size());
  const std::size_t margin = 2000;
  AudioBuffer xi(std::vector<float>(x.samples().begin() + margin, x.samples().end() - margin), 44100);
  AudioBuffer bi(std::vector<float>(back.samples().begin() + margin, back.samples().end() - margin), 44100);
  EXPECT_GT(measure_snr(xi, bi), 40.0);
}

TEST(Resample, RejectsBadRate) { EXPECT_THROW(resample(AudioBuffer::zeros(10, 8000), 0), ParameterError); }

TEST(Resample, OutputFiniteForLoudInput) {
  AudioBuffer b = oracle::white_noise(5000, 48000, 2, 0.9);
  for (int r : {8000, 16000, 44100, 96000})
    EXPECT_TRUE(resample(b, r).all_finite());
}
