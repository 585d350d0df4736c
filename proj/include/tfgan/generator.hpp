// Mel-to-waveform generator: pre-conv, three upsample stages (8x, 6x, 5x)
// each followed by a 4-layer dilated residual stack, and a tanh output conv.
// Each upsample stage adds a transposed-conv branch and a repeat+1x1-conv
// branch after a x + sin(x) gate.
#pragma once

#include <string>
#include <vector>

#include "tfgan/model.hpp"
#include "tfgan/ops.hpp"

namespace tfgan {

struct GeneratorConfig {
  int64_t n_mels = 80;
  int64_t pre_channels = 512;
  std::vector<int64_t> stage_channels{256, 128, 64};
  std::vector<int64_t> up_factors{8, 6, 5};
  std::vector<int64_t> dilations{1, 3, 9, 27};
  int64_t res_kernel = 3;
  int64_t out_kernel = 7;
  double channel_scale = 1.0;     // desk-scale shrink multiplier
  bool residual_upsample = true;  // sine gate + repeat branch; plain tconv when off

  int64_t total_upsampling() const {
    int64_t p = 1;
    for (int64_t f : up_factors) p *= f;
    return p;
  }

  int64_t ch(int64_t base) const {
    const int64_t c = static_cast<int64_t>(std::lround(static_cast<double>(base) * channel_scale));
    return c < 1 ? 1 : c;
  }

  void validate() const {
    check(stage_channels.size() == up_factors.size(),
          "GeneratorConfig: stage_channels and up_factors must have equal length");
    check(!up_factors.empty(), "GeneratorConfig: needs at least one upsample stage");
    check(channel_scale > 0, "GeneratorConfig: channel_scale must be positive");
    for (int64_t d : dilations) check(d >= 1, "GeneratorConfig: dilations must be >= 1");
    check(res_kernel >= 1 && res_kernel % 2 == 1, "GeneratorConfig: res_kernel must be odd");
    check(out_kernel >= 1 && out_kernel % 2 == 1, "GeneratorConfig: out_kernel must be odd");
  }
};

// x + sin(x), the upsample-gate activation.
template <typename S>
Tensor<S> sine_gate(const Tensor<S>& x) {
  return add(x, sin(x));
}

namespace detail {

// Same-length conv over the last axis with mirror padding. Multi-bounce
// reflection keeps degenerate short inputs (pad >= length) defined.
template <typename S>
Tensor<S> conv1d_same(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b,
                      int64_t dilation = 1, int64_t groups = 1) {
  const int64_t K = w.dim(2);
  const int64_t pad = dilation * (K - 1) / 2;
  Tensor<S> xp = pad == 0 ? x : pad1d_impl(x, pad, pad, PadMode::kReflect, /*tiled_mirror=*/true);
  return conv1d(xp, w, b, /*stride=*/1, dilation, /*padding=*/0, groups);
}

}  // namespace detail

template <typename S>
class Generator {
 public:
  Generator(const GeneratorConfig& cfg, Rng& rng) : cfg_(cfg) {
    cfg_.validate();
    int64_t c_in = cfg_.ch(cfg_.pre_channels);
    add_conv("pre", c_in, cfg_.n_mels, cfg_.out_kernel, rng);
    for (size_t i = 0; i < cfg_.up_factors.size(); ++i) {
      const int64_t c_out = cfg_.ch(cfg_.stage_channels[i]);
      const int64_t f = cfg_.up_factors[i];
      const std::string up = "up" + std::to_string(i);
      // transposed conv: kernel twice the stride, weight [Cin,Cout,K]
      params_.add(up + ".tconv.w", uniform_fan_in<S>(rng, {c_in, c_out, 2 * f}, c_in * 2 * f));
      params_.add(up + ".tconv.b", uniform_fan_in<S>(rng, {c_out}, c_in * 2 * f));
      params_.add(up + ".rep.w", uniform_fan_in<S>(rng, {c_out, c_in, 1}, c_in));
      params_.add(up + ".rep.b", uniform_fan_in<S>(rng, {c_out}, c_in));
      const std::string res = "res" + std::to_string(i);
      for (size_t j = 0; j < cfg_.dilations.size(); ++j) {
        const std::string unit = res + ".u" + std::to_string(j);
        add_conv(unit + ".c1", c_out, c_out, cfg_.res_kernel, rng);
        add_conv(unit + ".c2", c_out, c_out, 1, rng);
      }
      c_in = c_out;
    }
    add_conv("out", 1, c_in, cfg_.out_kernel, rng);
  }

  // mel [B, frames, n_mels] -> waveform [B, 1, frames * total_upsampling()].
  Tensor<S> forward(const Tensor<S>& mel) const {
    check(mel.rank() == 3, "generator: mel must be [B,frames,n_mels], got " +
                               shape_str(mel.shape()));
    check(mel.dim(2) == cfg_.n_mels,
          "generator: pre-conv layer expects " + std::to_string(cfg_.n_mels) +
              " mel bins, input has " + std::to_string(mel.dim(2)));
    check(mel.dim(1) >= 1, "generator: needs at least one mel frame");

    Tensor<S> h = permute(mel, {0, 2, 1});  // [B, n_mels, F]
    h = detail::conv1d_same(h, params_.at("pre.w"), params_.at("pre.b"));
    for (size_t i = 0; i < cfg_.up_factors.size(); ++i) {
      h = upsample_block(h, i);
      h = resstack(h, i);
    }
    h = leaky_relu(h);
    h = detail::conv1d_same(h, params_.at("out.w"), params_.at("out.b"));
    return tanh(h);
  }

  // One upsample stage: output length is exactly T * factor.
  Tensor<S> upsample_block(const Tensor<S>& x, size_t stage) const {
    const int64_t f = cfg_.up_factors[stage];
    const int64_t T = x.dim(2);
    const std::string up = "up" + std::to_string(stage);
    Tensor<S> h = cfg_.residual_upsample ? sine_gate(x) : x;
    // (T-1)*f + 2f = T*f + f samples; trim f/2 from the left edge
    Tensor<S> a = conv_transpose1d(h, params_.at(up + ".tconv.w"),
                                   std::optional<Tensor<S>>(params_.at(up + ".tconv.b")), f);
    const int64_t lead = f / 2;
    a = slice(a, 2, lead, lead + T * f);
    if (!cfg_.residual_upsample) return a;
    Tensor<S> b = conv1d(repeat_interleave(h, f), params_.at(up + ".rep.w"),
                         std::optional<Tensor<S>>(params_.at(up + ".rep.b")));
    return add(a, b);
  }

  // Four residual units with dilations 1, 3, 9, 27; length preserving.
  Tensor<S> resstack(const Tensor<S>& x, size_t stage) const {
    const std::string res = "res" + std::to_string(stage);
    Tensor<S> h = x;
    for (size_t j = 0; j < cfg_.dilations.size(); ++j) {
      const std::string unit = res + ".u" + std::to_string(j);
      Tensor<S> t = detail::conv1d_same(leaky_relu(h), params_.at(unit + ".c1.w"),
                                        params_.at(unit + ".c1.b"), cfg_.dilations[j]);
      t = conv1d(leaky_relu(t), params_.at(unit + ".c2.w"),
                 std::optional<Tensor<S>>(params_.at(unit + ".c2.b")));
      h = add(h, t);
    }
    return h;
  }

  ModelParams<S>& params() { return params_; }
  const ModelParams<S>& params() const { return params_; }
  const GeneratorConfig& config() const { return cfg_; }

 private:
  void add_conv(const std::string& name, int64_t c_out, int64_t c_in, int64_t k, Rng& rng) {
    params_.add(name + ".w", uniform_fan_in<S>(rng, {c_out, c_in, k}, c_in * k));
    params_.add(name + ".b", uniform_fan_in<S>(rng, {c_out}, c_in * k));
  }

  GeneratorConfig cfg_;
  ModelParams<S> params_;
};

}  // namespace tfgan
