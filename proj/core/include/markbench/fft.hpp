#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace markbench {

using Complex = std::complex<double>;

/// Iterative radix-2 FFT plan for a fixed power-of-two size.
///
/// Plans are immutable after construction and may be shared between threads.
class Fft {
 public:
  explicit Fft(std::size_t size);

  [[nodiscard]] std::size_t size() const { return size_; }

  /// In-place forward transform (no scaling).
  void forward(std::span<Complex> data) const;
  /// In-place inverse transform, scaled by 1/size.
  void inverse(std::span<Complex> data) const;

  /// Real input of length size() to size()/2 + 1 one-sided bins.
  void forward_real(std::span<const double> in, std::span<Complex> out) const;
  /// One-sided bins back to size() real samples (Hermitian symmetry assumed).
  void inverse_real(std::span<const Complex> in, std::span<double> out) const;

 private:
  void transform(std::span<Complex> data, bool inverse) const;

  std::size_t size_;
  std::vector<std::size_t> bitrev_;
  std::vector<Complex> twiddles_;
};

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

/// Linear convolution of two real sequences via zero-padded FFT.
std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b);

}  // namespace markbench
