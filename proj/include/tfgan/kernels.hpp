// Production kernels behind ops.hpp. Every loop is data-parallel over
// independent output elements (gather form, one writer per element), so
// results are bit-identical for any thread count. Reference implementations
// used by the tests and the benchmark live in ref_kernels.hpp.
#pragma once

#include <cstdint>

#include "tfgan/common.hpp"

namespace tfgan::kernels {

// Parallelization grain: regions smaller than this run on the calling thread.
constexpr int64_t kConvGrain = 512;    // heavy inner loops
constexpr int64_t kLightGrain = 16384; // elementwise-weight loops

inline int64_t conv_out_len(int64_t t, int64_t k, int64_t stride, int64_t dilation, int64_t pad) {
  return (t + 2 * pad - dilation * (k - 1) - 1) / stride + 1;
}

// ---------------------------------------------------------------------------
// conv1d, cross-correlation convention. x[B,Ci,T] w[Co,Ci/g,K] y[B,Co,To].

template <typename S>
void conv1d_forward(const S* x, const S* w, const S* bias, S* y, int64_t B, int64_t Ci,
                    int64_t T, int64_t Co, int64_t K, int64_t To, int64_t stride,
                    int64_t dilation, int64_t pad, int64_t groups) {
  const int64_t cig = Ci / groups, cog = Co / groups;
  const int64_t total = B * Co * To;
#pragma omp parallel for schedule(static) if (total >= kConvGrain)
  for (int64_t idx = 0; idx < total; ++idx) {
    const int64_t t = idx % To, co = (idx / To) % Co, b = idx / (To * Co);
    const int64_t g = co / cog;
    S acc = bias ? bias[co] : S(0);
    const S* wrow = w + co * cig * K;
    for (int64_t cl = 0; cl < cig; ++cl) {
      const S* xrow = x + (b * Ci + g * cig + cl) * T;
      for (int64_t k = 0; k < K; ++k) {
        const int64_t src = t * stride - pad + k * dilation;
        if (src >= 0 && src < T) acc += xrow[src] * wrow[cl * K + k];
      }
    }
    y[idx] = acc;
  }
}

template <typename S>
void conv1d_backward_x(const S* gy, const S* w, S* gx, int64_t B, int64_t Ci, int64_t T,
                       int64_t Co, int64_t K, int64_t To, int64_t stride, int64_t dilation,
                       int64_t pad, int64_t groups) {
  const int64_t cig = Ci / groups, cog = Co / groups;
  const int64_t total = B * Ci * T;
#pragma omp parallel for schedule(static) if (total >= kConvGrain)
  for (int64_t idx = 0; idx < total; ++idx) {
    const int64_t t = idx % T, ci = (idx / T) % Ci, b = idx / (T * Ci);
    const int64_t g = ci / cig, cl = ci % cig;
    S acc = S(0);
    for (int64_t co = g * cog; co < (g + 1) * cog; ++co) {
      const S* gyrow = gy + (b * Co + co) * To;
      const S* wrow = w + (co * cig + cl) * K;
      for (int64_t k = 0; k < K; ++k) {
        const int64_t num = t + pad - k * dilation;
        if (num < 0 || num % stride != 0) continue;
        const int64_t to = num / stride;
        if (to < To) acc += gyrow[to] * wrow[k];
      }
    }
    gx[idx] += acc;
  }
}

template <typename S>
void conv1d_backward_w(const S* gy, const S* x, S* gw, int64_t B, int64_t Ci, int64_t T,
                       int64_t Co, int64_t K, int64_t To, int64_t stride, int64_t dilation,
                       int64_t pad, int64_t groups) {
  const int64_t cig = Ci / groups, cog = Co / groups;
  const int64_t total = Co * cig * K;
#pragma omp parallel for schedule(static) if (total >= kConvGrain)
  for (int64_t idx = 0; idx < total; ++idx) {
    const int64_t k = idx % K, cl = (idx / K) % cig, co = idx / (K * cig);
    const int64_t ci = (co / cog) * cig + cl;
    S acc = S(0);
    for (int64_t b = 0; b < B; ++b) {
      const S* gyrow = gy + (b * Co + co) * To;
      const S* xrow = x + (b * Ci + ci) * T;
      for (int64_t to = 0; to < To; ++to) {
        const int64_t src = to * stride - pad + k * dilation;
        if (src >= 0 && src < T) acc += gyrow[to] * xrow[src];
      }
    }
    gw[idx] += acc;
  }
}

template <typename S>
void conv1d_backward_bias(const S* gy, S* gb, int64_t B, int64_t Co, int64_t To) {
#pragma omp parallel for schedule(static) if (Co >= 8 && B * To >= kConvGrain)
  for (int64_t co = 0; co < Co; ++co) {
    S acc = S(0);
    for (int64_t b = 0; b < B; ++b) {
      const S* row = gy + (b * Co + co) * To;
      for (int64_t t = 0; t < To; ++t) acc += row[t];
    }
    gb[co] += acc;
  }
}

// ---------------------------------------------------------------------------
// conv_transpose1d, the adjoint of conv1d(stride=s, pad=0, dilation=1).
// x[B,Ci,T] w[Ci,Co,K] y[B,Co,(T-1)s+K].

template <typename S>
void conv_transpose1d_forward(const S* x, const S* w, const S* bias, S* y, int64_t B,
                              int64_t Ci, int64_t T, int64_t Co, int64_t K, int64_t To,
                              int64_t stride) {
  const int64_t total = B * Co * To;
#pragma omp parallel for schedule(static) if (total >= kConvGrain)
  for (int64_t idx = 0; idx < total; ++idx) {
    const int64_t t = idx % To, co = (idx / To) % Co, b = idx / (To * Co);
    S acc = bias ? bias[co] : S(0);
    int64_t tau_lo = (t - (K - 1) + stride - 1) / stride;
    if (tau_lo < 0) tau_lo = 0;
    int64_t tau_hi = t / stride;
    if (tau_hi > T - 1) tau_hi = T - 1;
    for (int64_t ci = 0; ci < Ci; ++ci) {
      const S* xrow = x + (b * Ci + ci) * T;
      const S* wrow = w + (ci * Co + co) * K;
      for (int64_t tau = tau_lo; tau <= tau_hi; ++tau) acc += xrow[tau] * wrow[t - tau * stride];
    }
    y[idx] = acc;
  }
}

template <typename S>
void conv_transpose1d_backward_x(const S* gy, const S* w, S* gx, int64_t B, int64_t Ci,
                                 int64_t T, int64_t Co, int64_t K, int64_t To, int64_t stride) {
  const int64_t total = B * Ci * T;
#pragma omp parallel for schedule(static) if (total >= kConvGrain)
  for (int64_t idx = 0; idx < total; ++idx) {
    const int64_t tau = idx % T, ci = (idx / T) % Ci, b = idx / (T * Ci);
    S acc = S(0);
    for (int64_t co = 0; co < Co; ++co) {
      const S* gyrow = gy + (b * Co + co) * To;
      const S* wrow = w + (ci * Co + co) * K;
      for (int64_t k = 0; k < K; ++k) acc += gyrow[tau * stride + k] * wrow[k];
    }
    gx[idx] += acc;
  }
}

template <typename S>
void conv_transpose1d_backward_w(const S* gy, const S* x, S* gw, int64_t B, int64_t Ci,
                                 int64_t T, int64_t Co, int64_t K, int64_t To, int64_t stride) {
  const int64_t total = Ci * Co * K;
#pragma omp parallel for schedule(static) if (total >= kConvGrain)
  for (int64_t idx = 0; idx < total; ++idx) {
    const int64_t k = idx % K, co = (idx / K) % Co, ci = idx / (K * Co);
    S acc = S(0);
    for (int64_t b = 0; b < B; ++b) {
      const S* xrow = x + (b * Ci + ci) * T;
      const S* gyrow = gy + (b * Co + co) * To;
      for (int64_t tau = 0; tau < T; ++tau) acc += xrow[tau] * gyrow[tau * stride + k];
    }
    gw[idx] += acc;
  }
}

// ---------------------------------------------------------------------------
// conv2d, zero padding. x[B,Ci,H,W] w[Co,Ci,Kh,Kw] y[B,Co,Ho,Wo].

template <typename S>
void conv2d_forward(const S* x, const S* w, const S* bias, S* y, int64_t B, int64_t Ci,
                    int64_t H, int64_t W, int64_t Co, int64_t Kh, int64_t Kw, int64_t Ho,
                    int64_t Wo, int64_t sh, int64_t sw, int64_t ph, int64_t pw) {
  const int64_t total = B * Co * Ho * Wo;
#pragma omp parallel for schedule(static) if (total >= kConvGrain)
  for (int64_t idx = 0; idx < total; ++idx) {
    const int64_t j = idx % Wo, i = (idx / Wo) % Ho, co = (idx / (Wo * Ho)) % Co,
                  b = idx / (Wo * Ho * Co);
    S acc = bias ? bias[co] : S(0);
    for (int64_t ci = 0; ci < Ci; ++ci) {
      const S* xplane = x + (b * Ci + ci) * H * W;
      const S* wplane = w + (co * Ci + ci) * Kh * Kw;
      for (int64_t kh = 0; kh < Kh; ++kh) {
        const int64_t src_i = i * sh - ph + kh;
        if (src_i < 0 || src_i >= H) continue;
        for (int64_t kw = 0; kw < Kw; ++kw) {
          const int64_t src_j = j * sw - pw + kw;
          if (src_j >= 0 && src_j < W) acc += xplane[src_i * W + src_j] * wplane[kh * Kw + kw];
        }
      }
    }
    y[idx] = acc;
  }
}

template <typename S>
void conv2d_backward_x(const S* gy, const S* w, S* gx, int64_t B, int64_t Ci, int64_t H,
                       int64_t W, int64_t Co, int64_t Kh, int64_t Kw, int64_t Ho, int64_t Wo,
                       int64_t sh, int64_t sw, int64_t ph, int64_t pw) {
  const int64_t total = B * Ci * H * W;
#pragma omp parallel for schedule(static) if (total >= kConvGrain)
  for (int64_t idx = 0; idx < total; ++idx) {
    const int64_t wj = idx % W, hi = (idx / W) % H, ci = (idx / (W * H)) % Ci,
                  b = idx / (W * H * Ci);
    S acc = S(0);
    for (int64_t co = 0; co < Co; ++co) {
      const S* gyplane = gy + (b * Co + co) * Ho * Wo;
      const S* wplane = w + (co * Ci + ci) * Kh * Kw;
      for (int64_t kh = 0; kh < Kh; ++kh) {
        const int64_t num_i = hi + ph - kh;
        if (num_i < 0 || num_i % sh != 0) continue;
        const int64_t oi = num_i / sh;
        if (oi >= Ho) continue;
        for (int64_t kw = 0; kw < Kw; ++kw) {
          const int64_t num_j = wj + pw - kw;
          if (num_j < 0 || num_j % sw != 0) continue;
          const int64_t oj = num_j / sw;
          if (oj < Wo) acc += gyplane[oi * Wo + oj] * wplane[kh * Kw + kw];
        }
      }
    }
    gx[idx] += acc;
  }
}

template <typename S>
void conv2d_backward_w(const S* gy, const S* x, S* gw, int64_t B, int64_t Ci, int64_t H,
                       int64_t W, int64_t Co, int64_t Kh, int64_t Kw, int64_t Ho, int64_t Wo,
                       int64_t sh, int64_t sw, int64_t ph, int64_t pw) {
  const int64_t total = Co * Ci * Kh * Kw;
#pragma omp parallel for schedule(static) if (total >= kConvGrain)
  for (int64_t idx = 0; idx < total; ++idx) {
    const int64_t kw = idx % Kw, kh = (idx / Kw) % Kh, ci = (idx / (Kw * Kh)) % Ci,
                  co = idx / (Kw * Kh * Ci);
    S acc = S(0);
    for (int64_t b = 0; b < B; ++b) {
      const S* gyplane = gy + (b * Co + co) * Ho * Wo;
      const S* xplane = x + (b * Ci + ci) * H * W;
      for (int64_t oi = 0; oi < Ho; ++oi) {
        const int64_t src_i = oi * sh - ph + kh;
        if (src_i < 0 || src_i >= H) continue;
        for (int64_t oj = 0; oj < Wo; ++oj) {
          const int64_t src_j = oj * sw - pw + kw;
          if (src_j >= 0 && src_j < W) acc += gyplane[oi * Wo + oj] * xplane[src_i * W + src_j];
        }
      }
    }
    gw[idx] += acc;
  }
}

// ---------------------------------------------------------------------------
// avg_pool1d over the last axis; N independent rows.

template <typename S>
void avg_pool1d_forward(const S* x, S* y, int64_t N, int64_t T, int64_t k, int64_t stride,
                        int64_t To) {
  const S inv = S(1) / static_cast<S>(k);
  const int64_t total = N * To;
#pragma omp parallel for schedule(static) if (total >= kLightGrain)
  for (int64_t idx = 0; idx < total; ++idx) {
    const int64_t t = idx % To, n = idx / To;
    const S* row = x + n * T + t * stride;
    S acc = S(0);
    for (int64_t j = 0; j < k; ++j) acc += row[j];
    y[idx] = acc * inv;
  }
}

template <typename S>
void avg_pool1d_backward(const S* gy, S* gx, int64_t N, int64_t T, int64_t k, int64_t stride,
                         int64_t To) {
  const S inv = S(1) / static_cast<S>(k);
  const int64_t total = N * T;
#pragma omp parallel for schedule(static) if (total >= kLightGrain)
  for (int64_t idx = 0; idx < total; ++idx) {
    const int64_t t = idx % T, n = idx / T;
    int64_t lo = 0;
    if (t - k + 1 > 0) lo = (t - k + 1 + stride - 1) / stride;
    int64_t hi = t / stride;
    if (hi > To - 1) hi = To - 1;
    S acc = S(0);
    const S* row = gy + n * To;
    for (int64_t o = lo; o <= hi; ++o) acc += row[o];
    gx[idx] += acc * inv;
  }
}

// ---------------------------------------------------------------------------
// repeat_interleave along the last axis.

template <typename S>
void repeat_interleave_forward(const S* x, S* y, int64_t N, int64_t T, int64_t factor) {
  const int64_t total = N * T * factor;
#pragma omp parallel for schedule(static) if (total >= kLightGrain)
  for (int64_t idx = 0; idx < total; ++idx) y[idx] = x[idx / factor];
}

template <typename S>
void repeat_interleave_backward(const S* gy, S* gx, int64_t N, int64_t T, int64_t factor) {
  const int64_t total = N * T;
#pragma omp parallel for schedule(static) if (total >= kLightGrain)
  for (int64_t idx = 0; idx < total; ++idx) {
    S acc = S(0);
    const S* src = gy + idx * factor;
    for (int64_t j = 0; j < factor; ++j) acc += src[j];
    gx[idx] += acc;
  }
}

// ---------------------------------------------------------------------------
// pad1d over the last axis. mirror=false: zero padding.

template <typename S>
void pad1d_forward(const S* x, S* y, int64_t N, int64_t T, int64_t left, int64_t right,
                   bool mirror) {
  const int64_t To = T + left + right;
  const int64_t total = N * To;
#pragma omp parallel for schedule(static) if (total >= kLightGrain)
  for (int64_t idx = 0; idx < total; ++idx) {
    const int64_t t = idx % To, n = idx / To;
    const int64_t src = t - left;
    if (src >= 0 && src < T) {
      y[idx] = x[n * T + src];
    } else {
      y[idx] = mirror ? x[n * T + mirror_index(src, T)] : S(0);
    }
  }
}

template <typename S>
void pad1d_backward(const S* gy, S* gx, int64_t N, int64_t T, int64_t left, int64_t right,
                    bool mirror) {
  const int64_t To = T + left + right;
  // Rows are independent; the scatter within a row stays sequential.
#pragma omp parallel for schedule(static) if (N > 1 && N * To >= kLightGrain)
  for (int64_t n = 0; n < N; ++n) {
    const S* grow = gy + n * To;
    S* xrow = gx + n * T;
    for (int64_t t = 0; t < To; ++t) {
      const int64_t src = t - left;
      if (src >= 0 && src < T) xrow[src] += grow[t];
      else if (mirror) xrow[mirror_index(src, T)] += grow[t];
    }
  }
}

// ---------------------------------------------------------------------------
// frame gather: x[T] -> y[F, frame_len] with frame f starting at f*hop.

template <typename S>
void frame_forward(const S* x, S* y, int64_t F, int64_t frame_len, int64_t hop) {
  const int64_t total = F * frame_len;
#pragma omp parallel for schedule(static) if (total >= kLightGrain)
  for (int64_t idx = 0; idx < total; ++idx) {
    const int64_t i = idx % frame_len, f = idx / frame_len;
    y[idx] = x[f * hop + i];
  }
}

template <typename S>
void frame_backward(const S* gy, S* gx, int64_t T, int64_t F, int64_t frame_len, int64_t hop) {
#pragma omp parallel for schedule(static) if (T >= kLightGrain)
  for (int64_t t = 0; t < T; ++t) {
    int64_t f_lo = 0;
    if (t - frame_len + 1 > 0) f_lo = (t - frame_len + 1 + hop - 1) / hop;
    int64_t f_hi = t / hop;
    if (f_hi > F - 1) f_hi = F - 1;
    S acc = S(0);
    for (int64_t f = f_lo; f <= f_hi; ++f) acc += gy[f * frame_len + (t - f * hop)];
    gx[t] += acc;
  }
}

}  // namespace tfgan::kernels
