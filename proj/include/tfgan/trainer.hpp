// The alternating GAN training loop, checkpoint serialization and inference.
// One trainer owns the three models, both optimizer states and the seeded
// data RNG; (seed, config, data) fixes the entire loss trajectory.
#pragma once

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "tfgan/adam.hpp"
#include "tfgan/config.hpp"
#include "tfgan/container.hpp"
#include "tfgan/dataset.hpp"
#include "tfgan/discriminators.hpp"
#include "tfgan/generator.hpp"
#include "tfgan/losses.hpp"
#include "tfgan/trainer_report.hpp"

namespace tfgan {

constexpr int64_t kCheckpointVersion = 1;

template <typename S>
class Trainer {
 public:
  explicit Trainer(TrainConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.resolve();
    Rng init_rng(cfg_.seed);
    generator_ = std::make_unique<Generator<S>>(cfg_.generator, init_rng);
    time_disc_ = std::make_unique<TimeDiscriminator<S>>(cfg_.time_disc, init_rng);
    freq_disc_ = std::make_unique<FreqDiscriminator<S>>(cfg_.freq_disc, init_rng);
    opt_g_.init(generator_->params());
    opt_dt_.init(time_disc_->params());
    opt_df_.init(freq_disc_->params());
    data_rng_ = Rng(cfg_.seed + 0x9e3779b97f4a7c15ULL);
  }

  void attach_dataset(std::shared_ptr<Dataset<S>> ds) { dataset_ = std::move(ds); }

  // One full alternating step: generator forward, discriminator update on
  // the detached waveform, then generator update with fresh discriminator
  // forwards through the attached waveform.
  StepReport step() {
    check(dataset_ != nullptr, "Trainer: no dataset attached");
    auto batch = dataset_->next_batch(cfg_.batch_size, data_rng_);
    return step_on(batch.mel, batch.wave);
  }

  StepReport step_on(const Tensor<S>& mel, const Tensor<S>& wave) {
    const auto t0 = std::chrono::steady_clock::now();
    const bool adversarial = step_ >= cfg_.g_warmup_steps;
    const LossFlags flags = cfg_.flags(adversarial);
    StepReport r;
    r.step = step_;

    Graph<S> tape_g;
    Tensor<S> x_hat = generator_->forward(mel);

    if (adversarial) {
      Graph<S> tape_d;
      auto d = discriminator_total_loss(wave, x_hat.detach(), *time_disc_, *freq_disc_, flags);
      r.d_total = static_cast<double>(d.total.value());
      r.d_time = d.component("d_time");
      if (d.has("d_freq")) r.d_freq = d.component("d_freq");
      abort_if_not_finite(r, "discriminator");
      time_disc_->params().zero_grads();
      freq_disc_->params().zero_grads();
      tape_d.backward(d.total);
      const double lr = effective_lr();
      adam_step(time_disc_->params(), opt_dt_, lr, cfg_.beta1, cfg_.beta2, cfg_.adam_eps,
                cfg_.grad_clip);
      adam_step(freq_disc_->params(), opt_df_, lr, cfg_.beta1, cfg_.beta2, cfg_.adam_eps,
                cfg_.grad_clip);
    }

    auto g = generator_total_loss(wave, x_hat, *time_disc_, *freq_disc_, cfg_.weights,
                                  cfg_.stft_losses, cfg_.time_losses, flags);
    r.g_total = static_cast<double>(g.total.value());
    for (const auto& [name, value] : g.components) {
      if (name == "adv_time") r.adv_time = value;
      else if (name == "stft") r.stft = value;
      else if (name == "adv_freq") r.adv_freq = value;
      else if (name == "time") r.time = value;
      else if (name == "feat_match") r.feat_match = value;
    }
    abort_if_not_finite(r, "generator");
    generator_->params().zero_grads();
    tape_g.backward(g.total);
    adam_step(generator_->params(), opt_g_, effective_lr(), cfg_.beta1, cfg_.beta2, cfg_.adam_eps,
              cfg_.grad_clip);

    ++step_;
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
    return r;
  }

  // Inference: mel [F, n_mels] -> samples in (-1, 1), no graph recording.
  std::vector<double> synthesize(const Tensor<S>& mel) const {
    check(mel.rank() == 2, "synthesize: mel must be [frames, n_mels]");
    check(mel.dim(0) >= 1, "synthesize: frame count is 0");
    Tensor<S> batched = reshape(mel, {1, mel.dim(0), mel.dim(1)});
    Tensor<S> wave = generator_->forward(batched);
    std::vector<double> out(static_cast<size_t>(wave.numel()));
    auto wd = wave.data();
    for (size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(wd[i]);
    return out;
  }

  void save_checkpoint(const std::string& path) const {
    std::vector<NamedArray> arrays;
    arrays.push_back(NamedArray::from_f64(
        "meta", {2}, {static_cast<double>(kCheckpointVersion), static_cast<double>(step_)}));
    arrays.push_back(NamedArray::from_bytes("config", config_to_json(cfg_)));
    arrays.push_back(NamedArray::from_bytes("rng_data", data_rng_.save_state()));
    dump_params("g/", generator_->params(), arrays);
    dump_params("dt/", time_disc_->params(), arrays);
    dump_params("df/", freq_disc_->params(), arrays);
    dump_opt("optg/", opt_g_, generator_->params(), arrays);
    dump_opt("optdt/", opt_dt_, time_disc_->params(), arrays);
    dump_opt("optdf/", opt_df_, freq_disc_->params(), arrays);
    write_container(path, arrays);
  }

  static Trainer<S> load_checkpoint(const std::string& path) {
    auto arrays = read_container(path);
    const auto meta = find_array(arrays, "meta").as_f64();
    check_rt(meta.size() == 2, "checkpoint: malformed meta array");
    check_rt(static_cast<int64_t>(meta[0]) == kCheckpointVersion,
             "checkpoint: version " + std::to_string(static_cast<int64_t>(meta[0])) +
                 " unsupported (expected " + std::to_string(kCheckpointVersion) + ")");
    TrainConfig cfg = config_from_json(find_array(arrays, "config").as_bytes());
    Trainer<S> tr(cfg);
    tr.step_ = static_cast<int64_t>(meta[1]);
    tr.load_params("g/", tr.generator_->params(), arrays);
    tr.load_params("dt/", tr.time_disc_->params(), arrays);
    tr.load_params("df/", tr.freq_disc_->params(), arrays);
    tr.load_opt("optg/", tr.opt_g_, tr.generator_->params(), arrays);
    tr.load_opt("optdt/", tr.opt_dt_, tr.time_disc_->params(), arrays);
    tr.load_opt("optdf/", tr.opt_df_, tr.freq_disc_->params(), arrays);
    tr.data_rng_.load_state(find_array(arrays, "rng_data").as_bytes());
    return tr;
  }

  int64_t current_step() const { return step_; }
  const TrainConfig& config() const { return cfg_; }
  Generator<S>& generator() { return *generator_; }
  TimeDiscriminator<S>& time_disc() { return *time_disc_; }
  FreqDiscriminator<S>& freq_disc() { return *freq_disc_; }
  Rng& data_rng() { return data_rng_; }

 private:
  double effective_lr() const {
    return cfg_.lr_decay == 1.0 ? cfg_.lr
                                : cfg_.lr * std::pow(cfg_.lr_decay, static_cast<double>(step_));
  }

  void abort_if_not_finite(const StepReport& r, const char* phase) const {
    if (r.finite()) return;
    throw RuntimeError(std::string("train_step: non-finite ") + phase + " loss at step " +
                       std::to_string(step_) + "; components: " + r.to_string());
  }

  static void dump_params(const std::string& prefix, const ModelParams<S>& params,
                          std::vector<NamedArray>& arrays) {
    for (const auto& [name, p] : params.items()) {
      std::vector<uint32_t> dims;
      for (int64_t d : p.shape()) dims.push_back(static_cast<uint32_t>(d));
      if constexpr (std::is_same_v<S, float>)
        arrays.push_back(NamedArray::from_f32(prefix + name, dims,
                                              {p.data().begin(), p.data().end()}));
      else
        arrays.push_back(NamedArray::from_f64(prefix + name, dims,
                                              {p.data().begin(), p.data().end()}));
    }
  }

  void load_params(const std::string& prefix, ModelParams<S>& params,
                   const std::vector<NamedArray>& arrays) {
    for (auto& [name, p] : params.items()) {
      const NamedArray& a = find_array(arrays, prefix + name);
      check_rt(a.count() == p.numel(), "checkpoint: size mismatch for " + prefix + name);
      copy_into(a, p.mutable_data());
    }
  }

  void dump_opt(const std::string& prefix, const AdamState<S>& st, const ModelParams<S>& params,
                std::vector<NamedArray>& arrays) const {
    arrays.push_back(NamedArray::from_f64(prefix + "t", {1}, {static_cast<double>(st.t)}));
    for (size_t i = 0; i < params.size(); ++i) {
      const auto& name = params.items()[i].first;
      const std::vector<uint32_t> dims{static_cast<uint32_t>(st.m[i].size())};
      if constexpr (std::is_same_v<S, float>) {
        arrays.push_back(NamedArray::from_f32(prefix + "m/" + name, dims,
                                              {st.m[i].begin(), st.m[i].end()}));
        arrays.push_back(NamedArray::from_f32(prefix + "v/" + name, dims,
                                              {st.v[i].begin(), st.v[i].end()}));
      } else {
        arrays.push_back(NamedArray::from_f64(prefix + "m/" + name, dims,
                                              {st.m[i].begin(), st.m[i].end()}));
        arrays.push_back(NamedArray::from_f64(prefix + "v/" + name, dims,
                                              {st.v[i].begin(), st.v[i].end()}));
      }
    }
  }

  void load_opt(const std::string& prefix, AdamState<S>& st, const ModelParams<S>& params,
                const std::vector<NamedArray>& arrays) {
    const auto t = find_array(arrays, prefix + "t").as_f64();
    check_rt(t.size() == 1, "checkpoint: malformed optimizer step count");
    st.t = static_cast<int64_t>(t[0]);
    for (size_t i = 0; i < params.size(); ++i) {
      const auto& name = params.items()[i].first;
      copy_into(find_array(arrays, prefix + "m/" + name), std::span<S>(st.m[i]));
      copy_into(find_array(arrays, prefix + "v/" + name), std::span<S>(st.v[i]));
    }
  }

  static void copy_into(const NamedArray& a, std::span<S> dst) {
    if constexpr (std::is_same_v<S, float>) {
      check_rt(a.dtype == Dtype::kF32,
               "checkpoint: " + a.name + " stored as f64 but this run uses f32 precision");
      const auto v = a.as_f32();
      check_rt(v.size() == dst.size(), "checkpoint: size mismatch for " + a.name);
      std::copy(v.begin(), v.end(), dst.begin());
    } else {
      check_rt(a.dtype == Dtype::kF64,
               "checkpoint: " + a.name + " stored as f32 but this run uses f64 precision");
      const auto v = a.as_f64();
      check_rt(v.size() == dst.size(), "checkpoint: size mismatch for " + a.name);
      std::copy(v.begin(), v.end(), dst.begin());
    }
  }

  TrainConfig cfg_;
  std::unique_ptr<Generator<S>> generator_;
  std::unique_ptr<TimeDiscriminator<S>> time_disc_;
  std::unique_ptr<FreqDiscriminator<S>> freq_disc_;
  AdamState<S> opt_g_, opt_dt_, opt_df_;
  Rng data_rng_;
  std::shared_ptr<Dataset<S>> dataset_;
  int64_t step_ = 0;
};

}  // namespace tfgan
