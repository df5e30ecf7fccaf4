// Test double speaking the plugin protocol:
//   markbench_mock_plugin <mode> [mode args...] <subcommand> --in <wav> [--ref <wav>] [--out <wav>]
//
// modes:
//   echo                 copy input to output
//   gain <db>            scale input
//   score <value>        detect prints {"score": value}
//   seed_score           detect prints the MARKBENCH_SEED modulo 1000, divided by 1000
//   metric               prints {"metrics": {"asr_cer": ..., "squim_mos": ...}} from the RMS ratio
//   fail <code> <text>   writes text to stderr and exits with code
//   fail_odd_seed        fails when MARKBENCH_SEED is odd, echoes otherwise
//   sleep <seconds>      sleeps, then echoes / scores 0
//   garbage              prints non-JSON and writes a non-WAV output
//   no_output            exits 0 without writing anything
//   tone_embed           adds a 1 kHz tone at -30 dB relative to the input RMS
//   tone_detect          score = 1 kHz tone power relative to neighbouring bands

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "markbench/wav.hpp"

namespace {

using markbench::AudioBuffer;

struct Args {
  std::string mode;
  std::vector<std::string> mode_args;
  std::string subcommand;
  std::string in, ref, out;
};

bool is_subcommand(const std::string& s) {
  return s == "embed" || s == "detect" || s == "transform" || s == "metric";
}

Args parse(int argc, char** argv) {
  Args a;
  if (argc < 2) throw std::runtime_error("usage: mock <mode> ... <subcommand> --in <wav>");
  a.mode = argv[1];
  int i = 2;
  for (; i < argc && !is_subcommand(argv[i]); ++i) a.mode_args.emplace_back(argv[i]);
  if (i == argc) throw std::runtime_error("missing subcommand");
  a.subcommand = argv[i++];
  for (; i + 1 < argc; i += 2) {
    std::string flag = argv[i];
    if (flag == "--in") a.in = argv[i + 1];
    else if (flag == "--ref") a.ref = argv[i + 1];
    else if (flag == "--out") a.out = argv[i + 1];
    else throw std::runtime_error("unknown flag " + flag);
  }
  return a;
}

std::uint64_t seed_from_env() {
  const char* s = std::getenv("MARKBENCH_SEED");
  return s ? std::strtoull(s, nullptr, 10) : 0;
}

double band_power(const AudioBuffer& b, double hz) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    double ang = -2.0 * std::numbers::pi * hz * static_cast<double>(i) / b.sample_rate();
    acc += static_cast<double>(b[i]) * std::complex<double>(std::cos(ang), std::sin(ang));
  }
  return std::norm(acc);
}

// Passes audio through for audio roles, prints a neutral score for detect.
int pass_through(const Args& a) {
  if (a.subcommand == "detect") {
    std::cout << "{\"score\": 0.0}\n";
    return 0;
  }
  markbench::write_wav(markbench::read_wav(a.in), a.out);
  return 0;
}

int run(const Args& a) {
  if (a.mode == "echo") return pass_through(a);
  if (a.mode == "gain") {
    AudioBuffer b = markbench::read_wav(a.in);
    const double g = std::pow(10.0, std::stod(a.mode_args.at(0)) / 20.0);
    for (auto& v : b.samples()) v = static_cast<float>(v * g);
    markbench::write_wav(b, a.out);
    return 0;
  }
  if (a.mode == "score") {
    std::cout << "{\"score\": " << a.mode_args.at(0) << "}\n";
    return 0;
  }
  if (a.mode == "seed_score") {
    std::cout << "{\"score\": " << static_cast<double>(seed_from_env() % 1000) / 1000.0 << "}\n";
    return 0;
  }
  if (a.mode == "metric") {
    AudioBuffer test = markbench::read_wav(a.in);
    AudioBuffer ref = markbench::read_wav(a.ref);
    double ratio = ref.rms() > 0 ? test.rms() / ref.rms() : 0.0;
    std::cout << "{\"metrics\": {\"asr_cer\": " << std::abs(1.0 - ratio) << ", \"squim_mos\": " << 4.5 * std::min(1.0, ratio)
              << "}}\n";
    return 0;
  }
  if (a.mode == "fail") {
    std::cerr << a.mode_args.at(1);
    return std::stoi(a.mode_args.at(0));
  }
  if (a.mode == "fail_odd_seed") {
    if (seed_from_env() % 2 == 1) {
      std::cerr << "odd seed rejected";
      return 4;
    }
    return pass_through(a);
  }
  if (a.mode == "sleep") {
    std::this_thread::sleep_for(std::chrono::duration<double>(std::stod(a.mode_args.at(0))));
    return pass_through(a);
  }
  if (a.mode == "garbage") {
    std::cout << "this is not json\n";
    if (!a.out.empty()) std::ofstream(a.out) << "RIFF????garbage";
    return 0;
  }
  if (a.mode == "no_output") return 0;
  if (a.mode == "tone_embed") {
    AudioBuffer b = markbench::read_wav(a.in);
    const double amp = std::sqrt(2.0) * b.rms() * std::pow(10.0, -30.0 / 20.0);
    for (std::size_t i = 0; i < b.size(); ++i)
      b[i] = static_cast<float>(b[i] + amp * std::sin(2.0 * std::numbers::pi * 1000.0 * static_cast<double>(i) /
                                                     b.sample_rate()));
    markbench::write_wav(b, a.out);
    return 0;
  }
  if (a.mode == "tone_detect") {
    AudioBuffer b = markbench::read_wav(a.in);
    double tone = band_power(b, 1000.0);
    double side = 0.5 * (band_power(b, 937.0) + band_power(b, 1063.0)) + 1e-20;
    std::cout << "{\"score\": " << std::log10(tone / side + 1e-12) << "}\n";
    return 0;
  }
  std::cerr << "unknown mode " << a.mode;
  return 64;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(parse(argc, argv));
  } catch (const std::exception& e) {
    std::cerr << "mock plugin: " << e.what();
    return 70;
  }
}
