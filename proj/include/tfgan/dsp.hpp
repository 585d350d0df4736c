// Signal processing: framing, periodic-Hann STFT (differentiable real/imag
// pair), magnitude with floor, and log-mel feature extraction.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "tfgan/fft.hpp"
#include "tfgan/ops.hpp"

namespace tfgan {

// Mono waveform in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 24000;
};

struct StftConfig {
  int64_t fft_size = 512;
  int64_t hop_length = 240;
  int64_t win_length = 512;
  bool center = false;

  void validate() const {
    check(is_power_of_two(fft_size), "StftConfig: fft_size must be a power of two, got " +
                                         std::to_string(fft_size));
    check(win_length >= 1 && win_length <= fft_size,
          "StftConfig: requires 1 <= win_length <= fft_size");
    check(hop_length >= 1, "StftConfig: hop_length must be >= 1");
  }

  int64_t bins() const { return fft_size / 2 + 1; }
};

template <typename S>
struct Spectrogram {
  Tensor<S> re;  // [frames, bins]
  Tensor<S> im;  // [frames, bins]
  StftConfig cfg;
  int64_t frames = 0;
};

template <typename S>
struct MelSpectrogramT {
  Tensor<S> values;  // [frames, n_mels], log-mel
  int64_t hop_length = 240;
  int64_t n_mels = 80;
};

struct MelConfig {
  int64_t fft_size = 1024;
  int64_t hop_length = 240;
  int64_t win_length = 1024;
  int64_t n_mels = 80;
  double fmin = 0.0;
  double fmax = 12000.0;
  int sample_rate = 24000;
};

// Periodic (DFT-even) Hann window.
template <typename S>
std::vector<S> hann_window(int64_t win_length) {
  std::vector<S> w(static_cast<size_t>(win_length));
  for (int64_t i = 0; i < win_length; ++i)
    w[static_cast<size_t>(i)] = static_cast<S>(
        0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(win_length)));
  return w;
}

inline int64_t stft_frame_count(int64_t padded_len, int64_t fft_size, int64_t hop) {
  return (padded_len - fft_size) / hop + 1;
}

// --- frame_signal ------------------------------------------------------------

template <typename S>
Tensor<S> frame_signal(const Tensor<S>& x, int64_t frame_length, int64_t hop_length) {
  check(x.rank() == 1, "frame_signal: expected 1-D signal, got " + shape_str(x.shape()));
  check(frame_length >= 1 && hop_length >= 1, "frame_signal: frame and hop must be >= 1");
  const int64_t T = x.dim(0);
  check(T >= frame_length, "frame_signal: signal of length " + std::to_string(T) +
                               " shorter than one frame (" + std::to_string(frame_length) + ")");
  const int64_t F = (T - frame_length) / hop_length + 1;
  Tensor<S> out = Tensor<S>::zeros({F, frame_length});
  kernels::frame_forward(x.data().data(), out.mutable_data().data(), F, frame_length, hop_length);
  detail::maybe_record(out, {&x}, [&](const std::vector<int>& pid) {
    return [pid, T, F, frame_length, hop_length](Graph<S>& g, const std::vector<S>& go) {
      kernels::frame_backward(go.data(), g.grad_buf(pid[0]).data(), T, F, frame_length,
                              hop_length);
    };
  });
  return out;
}

// --- STFT --------------------------------------------------------------------

namespace detail {

template <typename S>
void stft_forward_kernel(const S* x, const S* wpad, int64_t fft, int64_t hop, int64_t F,
                         int64_t bins, S* re_out, S* im_out) {
#pragma omp parallel for schedule(static) if (F > 1)
  for (int64_t f = 0; f < F; ++f) {
    std::vector<S> fre(static_cast<size_t>(fft)), fim(static_cast<size_t>(fft), S(0));
    const S* src = x + f * hop;
    for (int64_t i = 0; i < fft; ++i) fre[static_cast<size_t>(i)] = src[i] * wpad[i];
    fft_radix2(fre, fim, /*negative_exponent=*/true);
    for (int64_t b = 0; b < bins; ++b) {
      re_out[f * bins + b] = fre[static_cast<size_t>(b)];
      im_out[f * bins + b] = fim[static_cast<size_t>(b)];
    }
  }
}

// Adjoint of the real STFT: per frame, positive-exponent transform of the
// half-spectrum gradient, real part, windowed; frames then overlap-add.
template <typename S>
void stft_backward_kernel(const S* gre, const S* gim, const S* wpad, int64_t T, int64_t fft,
                          int64_t hop, int64_t F, int64_t bins, S* gx) {
  std::vector<S> scratch(static_cast<size_t>(F * fft));
#pragma omp parallel for schedule(static) if (F > 1)
  for (int64_t f = 0; f < F; ++f) {
    std::vector<S> fre(static_cast<size_t>(fft), S(0)), fim(static_cast<size_t>(fft), S(0));
    for (int64_t b = 0; b < bins; ++b) {
      fre[static_cast<size_t>(b)] = gre[f * bins + b];
      fim[static_cast<size_t>(b)] = gim[f * bins + b];
    }
    fft_radix2(fre, fim, /*negative_exponent=*/false);
    for (int64_t i = 0; i < fft; ++i)
      scratch[static_cast<size_t>(f * fft + i)] = fre[static_cast<size_t>(i)] * wpad[i];
  }
#pragma omp parallel for schedule(static) if (T >= kernels::kLightGrain)
  for (int64_t t = 0; t < T; ++t) {
    int64_t f_lo = 0;
    if (t - fft + 1 > 0) f_lo = (t - fft + 1 + hop - 1) / hop;
    int64_t f_hi = t / hop;
    if (f_hi > F - 1) f_hi = F - 1;
    S acc = S(0);
    for (int64_t f = f_lo; f <= f_hi; ++f) acc += scratch[static_cast<size_t>(f * fft + t - f * hop)];
    gx[t] += acc;
  }
}

// Packed STFT: returns [2, frames, bins] with channel 0 = real, 1 = imag.
template <typename S>
Tensor<S> stft_packed(const Tensor<S>& x_in, const StftConfig& cfg) {
  cfg.validate();
  check(x_in.rank() == 1, "stft: expected 1-D signal, got " + shape_str(x_in.shape()));
  Tensor<S> x = x_in;
  if (cfg.center) x = pad1d(x_in, cfg.fft_size / 2, cfg.fft_size / 2, PadMode::kReflect);
  const int64_t T = x.dim(0);
  check(T >= cfg.fft_size, "stft: signal too short after padding (" + std::to_string(T) +
                               " < fft_size " + std::to_string(cfg.fft_size) + ")");
  const int64_t F = stft_frame_count(T, cfg.fft_size, cfg.hop_length);
  const int64_t bins = cfg.bins();

  // window of win_length, zero-padded centrally to fft_size
  auto win = hann_window<S>(cfg.win_length);
  std::vector<S> wpad(static_cast<size_t>(cfg.fft_size), S(0));
  const int64_t off = (cfg.fft_size - cfg.win_length) / 2;
  for (int64_t i = 0; i < cfg.win_length; ++i) wpad[static_cast<size_t>(off + i)] = win[static_cast<size_t>(i)];

  Tensor<S> out = Tensor<S>::zeros({2, F, bins});
  S* od = out.mutable_data().data();
  stft_forward_kernel(x.data().data(), wpad.data(), cfg.fft_size, cfg.hop_length, F, bins, od,
                      od + F * bins);
  maybe_record(out, {&x}, [&](const std::vector<int>& pid) {
    return [pid, wpad, T, fft = cfg.fft_size, hop = cfg.hop_length, F, bins](
               Graph<S>& g, const std::vector<S>& go) {
      stft_backward_kernel(go.data(), go.data() + F * bins, wpad.data(), T, fft, hop, F, bins,
                           g.grad_buf(pid[0]).data());
    };
  });
  return out;
}

}  // namespace detail

template <typename S>
Spectrogram<S> stft(const Tensor<S>& x, const StftConfig& cfg) {
  Tensor<S> packed = detail::stft_packed(x, cfg);
  const int64_t F = packed.dim(1), bins = packed.dim(2);
  Spectrogram<S> s;
  s.cfg = cfg;
  s.frames = F;
  s.re = reshape(slice(packed, 0, 0, 1), {F, bins});
  s.im = reshape(slice(packed, 0, 1, 2), {F, bins});
  return s;
}

// sqrt(re^2 + im^2) clamped below at `floor` so a following log is defined.
// Gradient is zero where the clamp is active.
template <typename S>
Tensor<S> complex_magnitude(const Tensor<S>& re, const Tensor<S>& im, S floor_val) {
  check(re.shape() == im.shape(), "complex_magnitude: re/im shape mismatch");
  check(floor_val > S(0), "complex_magnitude: floor must be positive");
  Tensor<S> out = Tensor<S>::zeros(re.shape());
  const S* rd = re.data().data();
  const S* id = im.data().data();
  S* od = out.mutable_data().data();
  const int64_t n = out.numel();
#pragma omp parallel for schedule(static) if (n >= kernels::kLightGrain)
  for (int64_t i = 0; i < n; ++i) {
    const S m = std::sqrt(rd[i] * rd[i] + id[i] * id[i]);
    od[i] = m > floor_val ? m : floor_val;
  }
  detail::maybe_record(out, {&re, &im}, [&](const std::vector<int>& pid) {
    return [pid, rx = re.data_ptr(), ix = im.data_ptr(), yx = out.data_ptr(), floor_val,
            n](Graph<S>& g, const std::vector<S>& go) {
      const S* rv = rx->data();
      const S* iv = ix->data();
      const S* yv = yx->data();
      for (int s = 0; s < 2; ++s) {
        if (pid[static_cast<size_t>(s)] < 0) continue;
        auto& ga = g.grad_buf(pid[static_cast<size_t>(s)]);
        const S* num = s == 0 ? rv : iv;
#pragma omp parallel for schedule(static) if (n >= kernels::kLightGrain)
        for (int64_t i = 0; i < n; ++i) {
          if (yv[i] > floor_val) ga[static_cast<size_t>(i)] += go[static_cast<size_t>(i)] * num[i] / yv[i];
        }
      }
    };
  });
  return out;
}

template <typename S>
Tensor<S> magnitude(const Spectrogram<S>& s, S floor_val = S(1e-7)) {
  return complex_magnitude(s.re, s.im, floor_val);
}

// --- mel features -------------------------------------------------------------

// HTK-style mel scale.
inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filterbank [n_mels, bins], peak 1, on the mel scale.
template <typename S>
std::vector<S> mel_filterbank(const MelConfig& cfg) {
  check(cfg.fmax > cfg.fmin && cfg.fmin >= 0.0, "mel_filterbank: requires 0 <= fmin < fmax");
  check(cfg.fmax <= cfg.sample_rate / 2.0 + 1e-9, "mel_filterbank: fmax above Nyquist");
  const int64_t bins = cfg.fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(cfg.fmin), mel_hi = hz_to_mel(cfg.fmax);
  std::vector<double> pts(static_cast<size_t>(cfg.n_mels) + 2);
  for (size_t i = 0; i < pts.size(); ++i)
    pts[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                    static_cast<double>(cfg.n_mels + 1));
  std::vector<S> fb(static_cast<size_t>(cfg.n_mels * bins), S(0));
  for (int64_t m = 0; m < cfg.n_mels; ++m) {
    const double left = pts[static_cast<size_t>(m)], center = pts[static_cast<size_t>(m) + 1],
                 right = pts[static_cast<size_t>(m) + 2];
    for (int64_t b = 0; b < bins; ++b) {
      const double f = static_cast<double>(b) * cfg.sample_rate / static_cast<double>(cfg.fft_size);
      double w = 0.0;
      if (f > left && f < right)
        w = f <= center ? (f - left) / (center - left) : (right - f) / (right - center);
      fb[static_cast<size_t>(m * bins + b)] = static_cast<S>(w);
    }
  }
  return fb;
}

// log(filterbank . |STFT| + 1e-6), computed outside any graph (features are
// conditioning inputs, not differentiation targets). Centered framing.
template <typename S>
MelSpectrogramT<S> mel_features(const AudioClip& clip, const MelConfig& cfg) {
  check(clip.sample_rate == cfg.sample_rate,
        "mel_features: clip sample rate " + std::to_string(clip.sample_rate) +
            " does not match config " + std::to_string(cfg.sample_rate));
  std::vector<S> xs(clip.samples.size());
  for (size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<S>(clip.samples[i]);
  Tensor<S> x = Tensor<S>::from({static_cast<int64_t>(xs.size())}, std::move(xs));

  StftConfig sc{cfg.fft_size, cfg.hop_length, cfg.win_length, /*center=*/true};
  Spectrogram<S> spec = stft(x, sc);
  Tensor<S> mag = magnitude(spec, S(1e-7));

  const int64_t F = spec.frames, bins = sc.bins();
  const auto fb = mel_filterbank<S>(cfg);
  Tensor<S> out = Tensor<S>::zeros({F, cfg.n_mels});
  const S* md = mag.data().data();
  S* od = out.mutable_data().data();
#pragma omp parallel for schedule(static) if (F * cfg.n_mels >= 256)
  for (int64_t idx = 0; idx < F * cfg.n_mels; ++idx) {
    const int64_t m = idx % cfg.n_mels, f = idx / cfg.n_mels;
    S acc = S(0);
    for (int64_t b = 0; b < bins; ++b) acc += fb[static_cast<size_t>(m * bins + b)] * md[f * bins + b];
    od[idx] = std::log(acc + S(1e-6));
  }
  MelSpectrogramT<S> mel;
  mel.values = out;
  mel.hop_length = cfg.hop_length;
  mel.n_mels = cfg.n_mels;
  return mel;
}

}  // namespace tfgan
