// Iterative radix-2 FFT over interleaved-complex buffers. Real signals are
// packed with zero imaginary parts; the adjoint of the real STFT uses the
// positive-exponent direction (unnormalized).
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "tfgan/common.hpp"

namespace tfgan {

inline bool is_power_of_two(int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place radix-2 FFT of length n = re.size(). negative_exponent=true is
// the forward transform exp(-2*pi*i*k*n/N); false is its unnormalized adjoint.
template <typename S>
void fft_radix2(std::vector<S>& re, std::vector<S>& im, bool negative_exponent) {
  const int64_t n = static_cast<int64_t>(re.size());
  check(is_power_of_two(n), "fft_radix2: length must be a power of two, got " + std::to_string(n));
  check(static_cast<int64_t>(im.size()) == n, "fft_radix2: re/im length mismatch");

  // bit reversal
  for (int64_t i = 1, j = 0; i < n; ++i) {
    int64_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[static_cast<size_t>(i)], re[static_cast<size_t>(j)]);
      std::swap(im[static_cast<size_t>(i)], im[static_cast<size_t>(j)]);
    }
  }

  // twiddles at full-length resolution, computed in double
  const double sign = negative_exponent ? -1.0 : 1.0;
  std::vector<S> tw_re(static_cast<size_t>(n / 2)), tw_im(static_cast<size_t>(n / 2));
  for (int64_t k = 0; k < n / 2; ++k) {
    const double ang = sign * 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
    tw_re[static_cast<size_t>(k)] = static_cast<S>(std::cos(ang));
    tw_im[static_cast<size_t>(k)] = static_cast<S>(std::sin(ang));
  }

  for (int64_t len = 2; len <= n; len <<= 1) {
    const int64_t step = n / len;
    for (int64_t i = 0; i < n; i += len) {
      for (int64_t j = 0; j < len / 2; ++j) {
        const S wr = tw_re[static_cast<size_t>(j * step)];
        const S wi = tw_im[static_cast<size_t>(j * step)];
        const size_t a = static_cast<size_t>(i + j);
        const size_t b = static_cast<size_t>(i + j + len / 2);
        const S ur = re[a], ui = im[a];
        const S vr = re[b] * wr - im[b] * wi;
        const S vi = re[b] * wi + im[b] * wr;
        re[a] = ur + vr;
        im[a] = ui + vi;
        re[b] = ur - vr;
        im[b] = ui - vi;
      }
    }
  }
}

}  // namespace tfgan
