// Training objectives: spectral convergence and log-magnitude STFT losses at
// multiple resolutions, the three time-domain losses at four frame scales,
// hinge adversarial losses for both discriminators, optional feature
// matching, and the weighted generator total.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tfgan/discriminators.hpp"
#include "tfgan/dsp.hpp"
#include "tfgan/ops.hpp"

namespace tfgan {

struct StftLossConfig {
  std::vector<StftConfig> resolutions{
      {1024, 120, 600, false}, {2048, 240, 1200, false}, {512, 50, 240, false}};

  int64_t max_fft() const {
    int64_t m = 0;
    for (const auto& r : resolutions) m = std::max(m, r.fft_size);
    return m;
  }
};

struct TimeLossConfig {
  // (frame_length, hop_length) per scale
  std::vector<std::pair<int64_t, int64_t>> scales{{1, 1}, {240, 120}, {480, 240}, {960, 480}};

  int64_t max_frame() const {
    int64_t m = 0;
    for (const auto& s : scales) m = std::max(m, s.first);
    return m;
  }

  void validate() const {
    for (const auto& [frame, hop] : scales)
      check(hop >= 1 && hop <= frame, "TimeLossConfig: requires 1 <= hop <= frame");
  }
};

struct LossWeights {
  double lambda1 = 1.0;  // time-domain adversarial
  double lambda2 = 1.0;  // multi-resolution STFT
  double lambda3 = 1.0;  // frequency-domain adversarial
  double lambda4 = 20.0; // time-domain reconstruction
  double lambda_fm = 10.0;  // feature matching, only when enabled

  void validate() const {
    check(lambda1 >= 0 && lambda2 >= 0 && lambda3 >= 0 && lambda4 >= 0 && lambda_fm >= 0,
          "LossWeights: weights must be non-negative");
  }
};

constexpr double kMagnitudeFloor = 1e-7;

namespace detail {

// Waveform tensors are accepted as [T], [B,T] or [B,1,T]; losses average
// over the batch items.
template <typename S>
std::vector<Tensor<S>> wave_items(const Tensor<S>& x, const char* name) {
  if (x.rank() == 1) return {x};
  if (x.rank() == 2) {
    std::vector<Tensor<S>> items;
    for (int64_t b = 0; b < x.dim(0); ++b)
      items.push_back(reshape(slice(x, 0, b, b + 1), {x.dim(1)}));
    return items;
  }
  if (x.rank() == 3) {
    check(x.dim(1) == 1, std::string(name) + ": expected [B,1,T], got " + shape_str(x.shape()));
    std::vector<Tensor<S>> items;
    for (int64_t b = 0; b < x.dim(0); ++b)
      items.push_back(reshape(slice(x, 0, b, b + 1), {x.dim(2)}));
    return items;
  }
  throw ValueError(std::string(name) + ": waveform rank must be 1..3, got " +
                   shape_str(x.shape()));
}

template <typename S>
void check_same_length(const Tensor<S>& x, const Tensor<S>& y, const char* name) {
  check(x.shape() == y.shape(), std::string(name) + ": length mismatch, " +
                                    shape_str(x.shape()) + " vs " + shape_str(y.shape()));
}

// max(t, c) through relu; gradient is zero where the clamp is active.
template <typename S>
Tensor<S> clamp_min(const Tensor<S>& t, S c) {
  return add(relu(sub(t, c)), c);
}

template <typename S>
Tensor<S> batch_mean(std::vector<Tensor<S>> terms) {
  Tensor<S> acc = terms[0];
  for (size_t i = 1; i < terms.size(); ++i) acc = add(acc, terms[i]);
  return terms.size() == 1 ? acc : mul(acc, S(1) / static_cast<S>(terms.size()));
}

}  // namespace detail

// --- STFT losses --------------------------------------------------------------

// || |X| - |X~| ||_F / || |X| ||_F, denominator floored.
template <typename S>
Tensor<S> spectral_convergence(const Tensor<S>& x, const Tensor<S>& x_tilde,
                               const StftConfig& cfg) {
  detail::check_same_length(x, x_tilde, "spectral_convergence");
  auto xs = detail::wave_items(x, "spectral_convergence");
  auto ys = detail::wave_items(x_tilde, "spectral_convergence");
  std::vector<Tensor<S>> terms;
  for (size_t b = 0; b < xs.size(); ++b) {
    Tensor<S> mx = magnitude(stft(xs[b], cfg), S(kMagnitudeFloor));
    Tensor<S> my = magnitude(stft(ys[b], cfg), S(kMagnitudeFloor));
    Tensor<S> num = frobenius_norm(sub(mx, my));
    Tensor<S> den = detail::clamp_min(frobenius_norm(mx), S(kMagnitudeFloor));
    terms.push_back(div(num, den));
  }
  return detail::batch_mean(std::move(terms));
}

// (1/N) || log|X| - log|X~| ||_1 with N = frames * bins.
template <typename S>
Tensor<S> log_magnitude_loss(const Tensor<S>& x, const Tensor<S>& x_tilde,
                             const StftConfig& cfg) {
  detail::check_same_length(x, x_tilde, "log_magnitude_loss");
  auto xs = detail::wave_items(x, "log_magnitude_loss");
  auto ys = detail::wave_items(x_tilde, "log_magnitude_loss");
  std::vector<Tensor<S>> terms;
  for (size_t b = 0; b < xs.size(); ++b) {
    Tensor<S> mx = magnitude(stft(xs[b], cfg), S(kMagnitudeFloor));
    Tensor<S> my = magnitude(stft(ys[b], cfg), S(kMagnitudeFloor));
    terms.push_back(mean(abs(sub(log(mx), log(my)))));
  }
  return detail::batch_mean(std::move(terms));
}

// (1/M) sum over resolutions of (L_sc + L_mag).
template <typename S>
Tensor<S> multi_res_stft_loss(const Tensor<S>& x, const Tensor<S>& x_tilde,
                              const StftLossConfig& cfg) {
  check(!cfg.resolutions.empty(), "multi_res_stft_loss: no resolutions configured");
  Tensor<S> acc = Tensor<S>::scalar(S(0));
  for (const auto& res : cfg.resolutions) {
    acc = add(acc, spectral_convergence(x, x_tilde, res));
    acc = add(acc, log_magnitude_loss(x, x_tilde, res));
  }
  return mul(acc, S(1) / static_cast<S>(cfg.resolutions.size()));
}

// --- time-domain losses ---------------------------------------------------------

template <typename S>
struct TimeDomainLosses {
  Tensor<S> energy;  // mean_f | mean(x_f^2) - mean(x~_f^2) |
  Tensor<S> time;    // mean_f | mean(x_f)  -  mean(x~_f)  |
  Tensor<S> phase;   // mean | dx - dx~ | over first differences
};

template <typename S>
TimeDomainLosses<S> time_domain_losses(const Tensor<S>& x, const Tensor<S>& x_tilde,
                                       int64_t frame_length, int64_t hop_length) {
  detail::check_same_length(x, x_tilde, "time_domain_losses");
  auto xs = detail::wave_items(x, "time_domain_losses");
  auto ys = detail::wave_items(x_tilde, "time_domain_losses");
  std::vector<Tensor<S>> es, ts, ps;
  for (size_t b = 0; b < xs.size(); ++b) {
    const int64_t T = xs[b].dim(0);
    check(T >= 2, "time_domain_losses: signal too short for first differences");
    Tensor<S> fx = frame_signal(xs[b], frame_length, hop_length);
    Tensor<S> fy = frame_signal(ys[b], frame_length, hop_length);
    Tensor<S> ex = mean(square(fx), std::vector<int64_t>{1});
    Tensor<S> ey = mean(square(fy), std::vector<int64_t>{1});
    es.push_back(mean(abs(sub(ex, ey))));
    Tensor<S> tx = mean(fx, std::vector<int64_t>{1});
    Tensor<S> ty = mean(fy, std::vector<int64_t>{1});
    ts.push_back(mean(abs(sub(tx, ty))));
    Tensor<S> dx = sub(slice(xs[b], 0, 1, T), slice(xs[b], 0, 0, T - 1));
    Tensor<S> dy = sub(slice(ys[b], 0, 1, T), slice(ys[b], 0, 0, T - 1));
    ps.push_back(mean(abs(sub(dx, dy))));
  }
  TimeDomainLosses<S> out;
  out.energy = detail::batch_mean(std::move(es));
  out.time = detail::batch_mean(std::move(ts));
  out.phase = detail::batch_mean(std::move(ps));
  return out;
}

// Sum over the four scales of (loss_e + loss_t + loss_p).
template <typename S>
Tensor<S> total_time_loss(const Tensor<S>& x, const Tensor<S>& x_tilde,
                          const TimeLossConfig& cfg) {
  cfg.validate();
  const int64_t len = detail::wave_items(x, "total_time_loss")[0].dim(0);
  check(len >= cfg.max_frame(), "total_time_loss: signal length " + std::to_string(len) +
                                    " below largest frame, shortest valid is " +
                                    std::to_string(cfg.max_frame()));
  Tensor<S> acc = Tensor<S>::scalar(S(0));
  for (const auto& [frame, hop] : cfg.scales) {
    auto l = time_domain_losses(x, x_tilde, frame, hop);
    acc = add(add(acc, l.energy), add(l.time, l.phase));
  }
  return acc;
}

// --- adversarial losses ----------------------------------------------------------

// sum_k [ mean relu(1 - D_k(x)) + mean relu(1 + D_k(x^)) ]. Callers pass
// fake logits computed from a detached waveform.
template <typename S>
Tensor<S> hinge_d_loss(const std::vector<Tensor<S>>& real_logits,
                       const std::vector<Tensor<S>>& fake_logits) {
  check(!real_logits.empty() && real_logits.size() == fake_logits.size(),
        "hinge_d_loss: logit lists must be non-empty and aligned");
  Tensor<S> acc = Tensor<S>::scalar(S(0));
  for (size_t k = 0; k < real_logits.size(); ++k) {
    acc = add(acc, mean(relu(sub(S(1), real_logits[k]))));
    acc = add(acc, mean(relu(add(fake_logits[k], S(1)))));
  }
  return acc;
}

// sum_k mean(-D_k(x^)), gradients flowing to the generator.
template <typename S>
Tensor<S> hinge_g_loss(const std::vector<Tensor<S>>& fake_logits) {
  check(!fake_logits.empty(), "hinge_g_loss: no logits given");
  Tensor<S> acc = Tensor<S>::scalar(S(0));
  for (const auto& l : fake_logits) acc = add(acc, mean(neg(l)));
  return acc;
}

// Mean over scales and layers of mean |real - fake|; real side detached.
template <typename S>
Tensor<S> feature_matching(const std::vector<std::vector<Tensor<S>>>& real_feats,
                           const std::vector<std::vector<Tensor<S>>>& fake_feats) {
  check(real_feats.size() == fake_feats.size(), "feature_matching: scale count mismatch");
  Tensor<S> acc = Tensor<S>::scalar(S(0));
  int64_t count = 0;
  for (size_t s = 0; s < real_feats.size(); ++s) {
    check(real_feats[s].size() == fake_feats[s].size(), "feature_matching: layer count mismatch");
    for (size_t l = 0; l < real_feats[s].size(); ++l) {
      check(real_feats[s][l].shape() == fake_feats[s][l].shape(),
            "feature_matching: feature shape mismatch at scale " + std::to_string(s) +
                " layer " + std::to_string(l));
      acc = add(acc, mean(abs(sub(fake_feats[s][l], real_feats[s][l].detach()))));
      ++count;
    }
  }
  check(count > 0, "feature_matching: no features given");
  return mul(acc, S(1) / static_cast<S>(count));
}

// --- totals -----------------------------------------------------------------------

struct LossFlags {
  bool use_stft_loss = true;
  bool use_freq_disc = true;
  bool use_time_losses = true;
  bool use_feature_matching = false;
  bool adversarial = true;  // false during generator warm-up
};

template <typename S>
struct LossBreakdown {
  Tensor<S> total;
  // component name -> unweighted value; only active terms appear
  std::vector<std::pair<std::string, double>> components;

  double component(const std::string& name) const {
    for (const auto& [k, v] : components)
      if (k == name) return v;
    throw ValueError("LossBreakdown: no component '" + name + "'");
  }
  bool has(const std::string& name) const {
    for (const auto& [k, v] : components)
      if (k == name) return true;
    return false;
  }
};

// Weighted generator objective. Inactive terms are skipped entirely so a
// zero-weighted run is bit-identical to a run without the term.
template <typename S>
LossBreakdown<S> generator_total_loss(const Tensor<S>& x, const Tensor<S>& x_hat,
                                      const TimeDiscriminator<S>& time_disc,
                                      const FreqDiscriminator<S>& freq_disc,
                                      const LossWeights& weights, const StftLossConfig& stft_cfg,
                                      const TimeLossConfig& time_cfg, const LossFlags& flags) {
  weights.validate();
  detail::check_same_length(x, x_hat, "generator_total_loss");
  LossBreakdown<S> out;
  out.total = Tensor<S>::scalar(S(0));

  if (flags.adversarial && weights.lambda1 != 0) {
    auto fake = time_disc.forward(x_hat);
    std::vector<Tensor<S>> logits;
    for (auto& o : fake) logits.push_back(o.logits);
    Tensor<S> adv_t = hinge_g_loss(logits);
    out.components.emplace_back("adv_time", static_cast<double>(adv_t.value()));
    out.total = add(out.total, mul(adv_t, static_cast<S>(weights.lambda1)));
    if (flags.use_feature_matching && weights.lambda_fm != 0) {
      auto real = time_disc.forward(x);
      std::vector<std::vector<Tensor<S>>> rf, ff;
      for (auto& o : real) rf.push_back(o.features);
      for (auto& o : fake) ff.push_back(o.features);
      Tensor<S> fm = feature_matching(rf, ff);
      out.components.emplace_back("feat_match", static_cast<double>(fm.value()));
      out.total = add(out.total, mul(fm, static_cast<S>(weights.lambda_fm)));
    }
  }
  if (flags.use_stft_loss && weights.lambda2 != 0) {
    Tensor<S> stft_l = multi_res_stft_loss(x, x_hat, stft_cfg);
    out.components.emplace_back("stft", static_cast<double>(stft_l.value()));
    out.total = add(out.total, mul(stft_l, static_cast<S>(weights.lambda2)));
  }
  if (flags.adversarial && flags.use_freq_disc && weights.lambda3 != 0) {
    Tensor<S> adv_f = mean(neg(freq_disc.forward(x_hat)));
    out.components.emplace_back("adv_freq", static_cast<double>(adv_f.value()));
    out.total = add(out.total, mul(adv_f, static_cast<S>(weights.lambda3)));
  }
  if (flags.use_time_losses && weights.lambda4 != 0) {
    Tensor<S> time_l = total_time_loss(x, x_hat, time_cfg);
    out.components.emplace_back("time", static_cast<double>(time_l.value()));
    out.total = add(out.total, mul(time_l, static_cast<S>(weights.lambda4)));
  }
  return out;
}

// Hinge loss over the three time scales plus the single frequency logit.
// x_hat must already be detached from the generator graph.
template <typename S>
LossBreakdown<S> discriminator_total_loss(const Tensor<S>& x, const Tensor<S>& x_hat,
                                          const TimeDiscriminator<S>& time_disc,
                                          const FreqDiscriminator<S>& freq_disc,
                                          const LossFlags& flags) {
  detail::check_same_length(x, x_hat, "discriminator_total_loss");
  LossBreakdown<S> out;
  auto real = time_disc.forward(x);
  auto fake = time_disc.forward(x_hat);
  std::vector<Tensor<S>> rl, fl;
  for (auto& o : real) rl.push_back(o.logits);
  for (auto& o : fake) fl.push_back(o.logits);
  Tensor<S> d_time = hinge_d_loss(rl, fl);
  out.components.emplace_back("d_time", static_cast<double>(d_time.value()));
  out.total = d_time;
  if (flags.use_freq_disc) {
    std::vector<Tensor<S>> rfl{freq_disc.forward(x)};
    std::vector<Tensor<S>> ffl{freq_disc.forward(x_hat)};
    Tensor<S> d_freq = hinge_d_loss(rfl, ffl);
    out.components.emplace_back("d_freq", static_cast<double>(d_freq.value()));
    out.total = add(out.total, d_freq);
  }
  return out;
}

}  // namespace tfgan
