// Run configuration: hyperparameters, architecture sizes, loss settings and
// ablation flags, with JSON round-tripping for config files, run manifests
// and the checkpoint config echo.
#pragma once

#include <cstdint>
#include <string>

#include "tfgan/generator.hpp"
#include "tfgan/losses.hpp"

namespace tfgan {

struct TrainConfig {
  // optimizer
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double adam_eps = 1e-8;
  double grad_clip = 0.0;  // global-norm clip, 0 disables
  double lr_decay = 1.0;   // per-step multiplier, 1 disables

  // loop
  int64_t batch_size = 2;      // paper scale: 16
  int64_t clip_samples = 4800; // paper scale: 24000; must be a multiple of 240
  int64_t steps = 2000;
  uint64_t seed = 1234;
  int64_t g_warmup_steps = 0;  // steps before discriminators engage
  int64_t checkpoint_every = 500;

  // losses
  LossWeights weights;
  StftLossConfig stft_losses;
  TimeLossConfig time_losses;

  // architecture; channel_scale below is pushed into all three model configs
  GeneratorConfig generator;
  TimeDiscConfig time_disc;
  FreqDiscConfig freq_disc;
  MelConfig mel;
  double channel_scale = 0.125;  // desk default; paper scale: 1.0

  // ablation flags
  bool use_stft_loss = true;
  bool use_residual_upsample = true;
  bool use_freq_disc = true;
  bool use_time_losses = true;
  bool use_feature_matching = false;

  // Copies the shared knobs into the per-model configs and validates.
  void resolve();
  void validate() const;

  LossFlags flags(bool adversarial) const {
    return LossFlags{use_stft_loss, use_freq_disc, use_time_losses, use_feature_matching,
                     adversarial};
  }
};

// JSON round trip. Parsing starts from defaults; absent keys keep them.
std::string config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const std::string& json_text);
TrainConfig config_from_file(const std::string& path);

// Ablation presets: B0, P1, P2, P3, P4.
void apply_ablation(TrainConfig& cfg, const std::string& name);

}  // namespace tfgan
