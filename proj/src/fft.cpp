#include "fluct/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fluct {

void fft(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: size must be a power of 2");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1 : -1);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv;
  }
}

namespace {
std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}
}  // namespace

std::vector<double> fft_convolve(const std::vector<double>& a, const std::vector<double>& b) {
  FftConvolver conv(b, a.size());
  return conv.convolve(a);
}

FftConvolver::FftConvolver(const std::vector<double>& kernel, std::size_t max_signal)
    : kernel_size_(kernel.size()), n_(next_pow2(kernel.size() + max_signal)) {
  kernel_fft_.assign(n_, {0.0, 0.0});
  for (std::size_t i = 0; i < kernel.size(); ++i) kernel_fft_[i] = kernel[i];
  fft(kernel_fft_, false);
}

std::vector<double> FftConvolver::convolve(const std::vector<double>& signal) const {
  if (signal.size() + kernel_size_ > n_ + 1)
    throw std::invalid_argument("FftConvolver: signal longer than planned");
  std::vector<std::complex<double>> buf(n_, {0.0, 0.0});
  for (std::size_t i = 0; i < signal.size(); ++i) buf[i] = signal[i];
  fft(buf, false);
  for (std::size_t i = 0; i < n_; ++i) buf[i] *= kernel_fft_[i];
  fft(buf, true);
  std::vector<double> out(signal.size() + kernel_size_ - 1);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i].real();
  return out;
}

}  // namespace fluct
