#include "markbench/fft.hpp"

#include <cmath>
#include <numbers>

#include "markbench/errors.hpp"

namespace markbench {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

Fft::Fft(std::size_t size) : size_(size) {
  if (!is_power_of_two(size)) {
    throw ParameterError("FFT size must be a power of two, got " + std::to_string(size));
  }
  bitrev_.resize(size);
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < size) ++bits;
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) {
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    }
    bitrev_[i] = r;
  }
  twiddles_.resize(size / 2);
  for (std::size_t k = 0; k < size / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(size);
    twiddles_[k] = {std::cos(angle), std::sin(angle)};
  }
}

void Fft::transform(std::span<Complex> data, bool inverse) const {
  const std::size_t n = size_;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        Complex w = twiddles_[j * stride];
        if (inverse) w = std::conj(w);
        const Complex u = data[start + j];
        const Complex v = data[start + j + half] * w;
        data[start + j] = u + v;
        data[start + j + half] = u - v;
      }
    }
  }
}

void Fft::forward(std::span<Complex> data) const { transform(data, false); }

void Fft::inverse(std::span<Complex> data) const {
  transform(data, true);
  const double scale = 1.0 / static_cast<double>(size_);
  for (auto& v : data) v *= scale;
}

void Fft::forward_real(std::span<const double> in, std::span<Complex> out) const {
  std::vector<Complex> buf(size_);
  for (std::size_t i = 0; i < size_; ++i) buf[i] = {in[i], 0.0};
  forward(buf);
  for (std::size_t k = 0; k <= size_ / 2; ++k) out[k] = buf[k];
}

void Fft::inverse_real(std::span<const Complex> in, std::span<double> out) const {
  std::vector<Complex> buf(size_);
  const std::size_t half = size_ / 2;
  for (std::size_t k = 0; k <= half; ++k) buf[k] = in[k];
  // DC and Nyquist must be real for a real output.
  buf[0] = {buf[0].real(), 0.0};
  if (size_ > 1) buf[half] = {buf[half].real(), 0.0};
  for (std::size_t k = 1; k < half; ++k) buf[size_ - k] = std::conj(in[k]);
  inverse(buf);
  for (std::size_t i = 0; i < size_; ++i) out[i] = buf[i].real();
}

std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_power_of_two(out_len);
  const Fft fft(n);
  std::vector<Complex> fa(n), fb(n);
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
  fft.forward(fa);
  fft.forward(fb);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  fft.inverse(fa);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = fa[i].real();
  return out;
}

}  // namespace markbench
