#ifndef FLUCT_FFT_HPP
#define FLUCT_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace fluct {

/// In-place radix-2 FFT; data.size() must be a power of two.
void fft(std::vector<std::complex<double>>& data, bool inverse);

/// Linear convolution of two real sequences via zero-padded FFT.
std::vector<double> fft_convolve(const std::vector<double>& a, const std::vector<double>& b);

/// Precomputed-kernel convolver for repeated convolutions with one fixed
/// sequence (the step pmf in the heavy-tailed ladder DP).
class FftConvolver {
 public:
  /// kernel fixed; max_signal is the largest signal length that will be passed.
  FftConvolver(const std::vector<double>& kernel, std::size_t max_signal);
  /// Returns the full linear convolution (length signal.size()+kernel_size-1).
  std::vector<double> convolve(const std::vector<double>& signal) const;
  std::size_t kernel_size() const { return kernel_size_; }
  /// Largest signal length this plan accepts.
  std::size_t capacity() const { return n_ + 1 - kernel_size_; }

 private:
  std::size_t kernel_size_;
  std::size_t n_;
  std::vector<std::complex<double>> kernel_fft_;
};

}  // namespace fluct

#endif
