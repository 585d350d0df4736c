// The two adversaries: a 3-scale time-domain discriminator over raw/2x/4x
// average-pooled waveforms (MelGAN-style patch logits), and a ResNet18-style
// frequency discriminator over the STFT real/imaginary map with a single
// pooled logit. No normalization layers anywhere.
#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "tfgan/dsp.hpp"
#include "tfgan/model.hpp"
#include "tfgan/ops.hpp"

namespace tfgan {

struct TimeDiscConfig {
  int64_t n_scales = 3;
  int64_t pool_kernel = 4;
  int64_t pool_stride = 2;
  int64_t base_channels = 16;
  int64_t max_channels = 512;
  int64_t channel_growth = 4;  // per strided layer
  int64_t entry_kernel = 15;
  int64_t n_strided = 3;
  int64_t strided_kernel = 41;
  int64_t stride = 4;
  int64_t groups = 4;
  int64_t post_kernel = 5;
  int64_t logit_kernel = 3;
  int64_t min_input_len = 256;  // receptive-field floor at the coarsest scale
  double channel_scale = 1.0;

  int64_t ch(int64_t base) const {
    const int64_t c = static_cast<int64_t>(std::lround(static_cast<double>(base) * channel_scale));
    return c < 1 ? 1 : c;
  }
};

// Logit map plus the ordered intermediate feature maps of one block.
template <typename S>
struct DiscScaleOutput {
  Tensor<S> logits;                 // [B, 1, T']
  std::vector<Tensor<S>> features;  // post-activation maps, entry..post
};

namespace detail {

// Largest divisor of `want` that divides both channel counts.
inline int64_t usable_groups(int64_t want, int64_t c_in, int64_t c_out) {
  for (int64_t g = want; g > 1; --g)
    if (want % g == 0 && c_in % g == 0 && c_out % g == 0) return g;
  return 1;
}

}  // namespace detail

template <typename S>
class TimeDiscriminator {
 public:
  TimeDiscriminator(const TimeDiscConfig& cfg, Rng& rng) : cfg_(cfg) {
    for (int64_t s = 0; s < cfg_.n_scales; ++s) {
      const std::string sc = "s" + std::to_string(s);
      int64_t c = cfg_.ch(cfg_.base_channels);
      add_conv(sc + ".entry", c, 1, cfg_.entry_kernel, rng);
      for (int64_t i = 0; i < cfg_.n_strided; ++i) {
        const int64_t c_next = std::min(c * cfg_.channel_growth, cfg_.ch(cfg_.max_channels));
        const int64_t g = detail::usable_groups(cfg_.groups, c, c_next);
        add_conv(sc + ".strided" + std::to_string(i), c_next, c / g, cfg_.strided_kernel, rng);
        c = c_next;
      }
      add_conv(sc + ".post", c, c, cfg_.post_kernel, rng);
      add_conv(sc + ".logit", 1, c, cfg_.logit_kernel, rng);
    }
  }

  // x [B,1,T]; scale k+1 sees the avg-pooled input of scale k.
  std::vector<DiscScaleOutput<S>> forward(const Tensor<S>& x) const {
    check(x.rank() == 3 && x.dim(1) == 1,
          "time_disc: input must be [B,1,T], got " + shape_str(x.shape()));
    check(x.dim(2) >= cfg_.min_input_len,
          "time_disc: input length " + std::to_string(x.dim(2)) + " below minimum " +
              std::to_string(cfg_.min_input_len));
    std::vector<DiscScaleOutput<S>> outs;
    Tensor<S> cur = x;
    for (int64_t s = 0; s < cfg_.n_scales; ++s) {
      outs.push_back(block(cur, s));
      if (s + 1 < cfg_.n_scales) cur = avg_pool1d(cur, cfg_.pool_kernel, cfg_.pool_stride);
    }
    return outs;
  }

  ModelParams<S>& params() { return params_; }
  const ModelParams<S>& params() const { return params_; }
  const TimeDiscConfig& config() const { return cfg_; }

 private:
  DiscScaleOutput<S> block(const Tensor<S>& x, int64_t s) const {
    const std::string sc = "s" + std::to_string(s);
    DiscScaleOutput<S> out;
    Tensor<S> h = detail::conv1d_same(x, params_.at(sc + ".entry.w"), params_.at(sc + ".entry.b"));
    h = leaky_relu(h);
    out.features.push_back(h);
    for (int64_t i = 0; i < cfg_.n_strided; ++i) {
      const std::string name = sc + ".strided" + std::to_string(i);
      const Tensor<S>& w = params_.at(name + ".w");
      const int64_t g = h.dim(1) / w.dim(1);  // weight stores Cin/groups
      h = conv1d(h, w, std::optional<Tensor<S>>(params_.at(name + ".b")), cfg_.stride,
                 /*dilation=*/1, (cfg_.strided_kernel - 1) / 2, g);
      h = leaky_relu(h);
      out.features.push_back(h);
    }
    h = detail::conv1d_same(h, params_.at(sc + ".post.w"), params_.at(sc + ".post.b"));
    h = leaky_relu(h);
    out.features.push_back(h);
    out.logits =
        detail::conv1d_same(h, params_.at(sc + ".logit.w"), params_.at(sc + ".logit.b"));
    return out;
  }

  void add_conv(const std::string& name, int64_t c_out, int64_t c_in_per_group, int64_t k,
                Rng& rng) {
    params_.add(name + ".w",
                uniform_fan_in<S>(rng, {c_out, c_in_per_group, k}, c_in_per_group * k));
    params_.add(name + ".b", uniform_fan_in<S>(rng, {c_out}, c_in_per_group * k));
  }

  TimeDiscConfig cfg_;
  ModelParams<S> params_;
};

struct FreqDiscConfig {
  StftConfig stft{512, 240, 512, /*center=*/false};
  std::vector<int64_t> stage_channels{64, 128, 256, 512};
  int64_t stem_kernel = 7;
  double channel_scale = 1.0;

  int64_t ch(int64_t base) const {
    const int64_t c = static_cast<int64_t>(std::lround(static_cast<double>(base) * channel_scale));
    return c < 1 ? 1 : c;
  }
};

template <typename S>
class FreqDiscriminator {
 public:
  FreqDiscriminator(const FreqDiscConfig& cfg, Rng& rng) : cfg_(cfg) {
    cfg_.stft.validate();
    check(cfg_.stage_channels.size() == 4, "freq_disc: expects 4 stages");
    const int64_t c1 = cfg_.ch(cfg_.stage_channels[0]);
    add_conv2d("stem", c1, 2, cfg_.stem_kernel, rng);
    // D1: two plain 3x3 convs
    add_conv2d("d1.c1", c1, c1, 3, rng);
    add_conv2d("d1.c2", c1, c1, 3, rng);
    // D2..D4: two residual blocks, stride-2 projection entering the stage
    int64_t c_in = c1;
    for (int s = 2; s <= 4; ++s) {
      const int64_t c_out = cfg_.ch(cfg_.stage_channels[static_cast<size_t>(s - 1)]);
      const std::string st = "d" + std::to_string(s);
      add_conv2d(st + ".b0.c1", c_out, c_in, 3, rng);
      add_conv2d(st + ".b0.c2", c_out, c_out, 3, rng);
      add_conv2d(st + ".b0.sc", c_out, c_in, 1, rng);
      add_conv2d(st + ".b1.c1", c_out, c_out, 3, rng);
      add_conv2d(st + ".b1.c2", c_out, c_out, 3, rng);
      c_in = c_out;
    }
    params_.add("head.w", uniform_fan_in<S>(rng, {1, c_in, 1}, c_in));
    params_.add("head.b", uniform_fan_in<S>(rng, {1}, c_in));
  }

  // x [B,1,T] -> logit [B,1]; differentiable through the STFT into x.
  Tensor<S> forward(const Tensor<S>& x) const {
    check(x.rank() == 3 && x.dim(1) == 1,
          "freq_disc: input must be [B,1,T], got " + shape_str(x.shape()));
    const int64_t B = x.dim(0), T = x.dim(2);
    check(T >= cfg_.stft.win_length, "freq_disc: waveform of length " + std::to_string(T) +
                                         " shorter than one STFT frame (" +
                                         std::to_string(cfg_.stft.win_length) + ")");
    // per item: packed [2, frames, bins] spectrum as a 2-channel map
    std::vector<Tensor<S>> maps;
    maps.reserve(static_cast<size_t>(B));
    for (int64_t b = 0; b < B; ++b) {
      Tensor<S> xi = reshape(slice(x, 0, b, b + 1), {T});
      Tensor<S> packed = detail::stft_packed(xi, cfg_.stft);
      maps.push_back(reshape(packed, {1, 2, packed.dim(1), packed.dim(2)}));
    }
    Tensor<S> h = B == 1 ? maps[0] : concat(maps, 0);

    h = conv2d(h, params_.at("stem.w"), std::optional<Tensor<S>>(params_.at("stem.b")), 2, 2,
               (cfg_.stem_kernel - 1) / 2, (cfg_.stem_kernel - 1) / 2);
    h = leaky_relu(h);
    h = leaky_relu(conv2d_p1(h, "d1.c1"));
    h = leaky_relu(conv2d_p1(h, "d1.c2"));
    for (int s = 2; s <= 4; ++s) {
      const std::string st = "d" + std::to_string(s);
      h = resblock(h, st + ".b0", /*stride=*/2, /*projection=*/true);
      h = resblock(h, st + ".b1", /*stride=*/1, /*projection=*/false);
    }
    // global average pool over (frames, bins), then the 1x1 head
    Tensor<S> pooled = mean(h, std::vector<int64_t>{2, 3});  // [B, C]
    pooled = reshape(pooled, {B, pooled.dim(1), 1});
    Tensor<S> logit = conv1d(pooled, params_.at("head.w"),
                             std::optional<Tensor<S>>(params_.at("head.b")));
    return reshape(logit, {B, 1});
  }

  ModelParams<S>& params() { return params_; }
  const ModelParams<S>& params() const { return params_; }
  const FreqDiscConfig& config() const { return cfg_; }

 private:
  Tensor<S> conv2d_p1(const Tensor<S>& h, const std::string& name) const {
    return conv2d(h, params_.at(name + ".w"), std::optional<Tensor<S>>(params_.at(name + ".b")),
                  1, 1, 1, 1);
  }

  Tensor<S> resblock(const Tensor<S>& x, const std::string& name, int64_t stride,
                     bool projection) const {
    Tensor<S> h = conv2d(x, params_.at(name + ".c1.w"),
                         std::optional<Tensor<S>>(params_.at(name + ".c1.b")), stride, stride, 1, 1);
    h = leaky_relu(h);
    h = conv2d_p1(h, name + ".c2");
    Tensor<S> sc = projection
                       ? conv2d(x, params_.at(name + ".sc.w"),
                                std::optional<Tensor<S>>(params_.at(name + ".sc.b")), stride,
                                stride, 0, 0)
                       : x;
    return leaky_relu(add(h, sc));
  }

  void add_conv2d(const std::string& name, int64_t c_out, int64_t c_in, int64_t k, Rng& rng) {
    params_.add(name + ".w", uniform_fan_in<S>(rng, {c_out, c_in, k, k}, c_in * k * k));
    params_.add(name + ".b", uniform_fan_in<S>(rng, {c_out}, c_in * k * k));
  }

  FreqDiscConfig cfg_;
  ModelParams<S> params_;
};

}  // namespace tfgan
