// Serial reference implementations: direct-summation loops written for
// clarity, not speed. They are the correctness oracles for the parallel
// kernels and the baseline for the kernel benchmark. Production ops never
// call into this namespace.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace tfgan::ref {

// Direct triple-nested-loop 1-D cross-correlation (groups = 1).
template <typename S>
std::vector<S> conv1d(const std::vector<S>& x, const std::vector<S>& w,
                      const std::vector<S>& bias, int64_t B, int64_t Ci, int64_t T, int64_t Co,
                      int64_t K, int64_t stride, int64_t dilation, int64_t pad) {
  const int64_t To = (T + 2 * pad - dilation * (K - 1) - 1) / stride + 1;
  std::vector<S> y(static_cast<size_t>(B * Co * To), S(0));
  for (int64_t b = 0; b < B; ++b)
    for (int64_t co = 0; co < Co; ++co)
      for (int64_t t = 0; t < To; ++t) {
        S acc = bias.empty() ? S(0) : bias[co];
        for (int64_t ci = 0; ci < Ci; ++ci)
          for (int64_t k = 0; k < K; ++k) {
            const int64_t src = t * stride - pad + k * dilation;
            if (src >= 0 && src < T) acc += x[(b * Ci + ci) * T + src] * w[(co * Ci + ci) * K + k];
          }
        y[(b * Co + co) * To + t] = acc;
      }
  return y;
}

// Zero-stuffing formulation of the transposed convolution.
template <typename S>
std::vector<S> conv_transpose1d(const std::vector<S>& x, const std::vector<S>& w,
                                const std::vector<S>& bias, int64_t B, int64_t Ci, int64_t T,
                                int64_t Co, int64_t K, int64_t stride) {
  const int64_t To = (T - 1) * stride + K;
  std::vector<S> y(static_cast<size_t>(B * Co * To), S(0));
  for (int64_t b = 0; b < B; ++b)
    for (int64_t co = 0; co < Co; ++co) {
      for (int64_t t = 0; t < To; ++t) y[(b * Co + co) * To + t] = bias.empty() ? S(0) : bias[co];
      for (int64_t ci = 0; ci < Ci; ++ci)
        for (int64_t tau = 0; tau < T; ++tau)
          for (int64_t k = 0; k < K; ++k)
            y[(b * Co + co) * To + tau * stride + k] +=
                x[(b * Ci + ci) * T + tau] * w[(ci * Co + co) * K + k];
    }
  return y;
}

template <typename S>
std::vector<S> conv2d(const std::vector<S>& x, const std::vector<S>& w,
                      const std::vector<S>& bias, int64_t B, int64_t Ci, int64_t H, int64_t W,
                      int64_t Co, int64_t Kh, int64_t Kw, int64_t sh, int64_t sw, int64_t ph,
                      int64_t pw) {
  const int64_t Ho = (H + 2 * ph - Kh) / sh + 1;
  const int64_t Wo = (W + 2 * pw - Kw) / sw + 1;
  std::vector<S> y(static_cast<size_t>(B * Co * Ho * Wo), S(0));
  for (int64_t b = 0; b < B; ++b)
    for (int64_t co = 0; co < Co; ++co)
      for (int64_t i = 0; i < Ho; ++i)
        for (int64_t j = 0; j < Wo; ++j) {
          S acc = bias.empty() ? S(0) : bias[co];
          for (int64_t ci = 0; ci < Ci; ++ci)
            for (int64_t kh = 0; kh < Kh; ++kh)
              for (int64_t kw = 0; kw < Kw; ++kw) {
                const int64_t si = i * sh - ph + kh, sj = j * sw - pw + kw;
                if (si >= 0 && si < H && sj >= 0 && sj < W)
                  acc += x[((b * Ci + ci) * H + si) * W + sj] *
                         w[((co * Ci + ci) * Kh + kh) * Kw + kw];
              }
          y[((b * Co + co) * Ho + i) * Wo + j] = acc;
        }
  return y;
}

// Naive O(n^2) DFT of a real frame; bins 0..n/2 inclusive. Exponent
// convention exp(-2*pi*i*b*n/N), matching the production STFT.
template <typename S>
void dft_real(const S* frame, int64_t n, S* out_re, S* out_im) {
  const int64_t bins = n / 2 + 1;
  for (int64_t b = 0; b < bins; ++b) {
    double re = 0.0, im = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      const double ang = -2.0 * M_PI * static_cast<double>(b) * static_cast<double>(i) /
                         static_cast<double>(n);
      re += static_cast<double>(frame[i]) * std::cos(ang);
      im += static_cast<double>(frame[i]) * std::sin(ang);
    }
    out_re[b] = static_cast<S>(re);
    out_im[b] = static_cast<S>(im);
  }
}

}  // namespace tfgan::ref
