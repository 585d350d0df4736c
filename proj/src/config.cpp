#include "tfgan/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tfgan {

using nlohmann::json;

void TrainConfig::resolve() {
  generator.channel_scale = channel_scale;
  generator.residual_upsample = use_residual_upsample;
  time_disc.channel_scale = channel_scale;
  freq_disc.channel_scale = channel_scale;
  validate();
}

void TrainConfig::validate() const {
  check(lr > 0, "TrainConfig: lr must be positive");
  check(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1, "TrainConfig: betas must be in [0,1)");
  check(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
  check(steps >= 0, "TrainConfig: steps must be >= 0");
  check(g_warmup_steps >= 0, "TrainConfig: g_warmup_steps must be >= 0");
  generator.validate();
  weights.validate();
  time_losses.validate();
  const int64_t up = generator.total_upsampling();
  check(clip_samples % up == 0, "TrainConfig: clip_samples (" + std::to_string(clip_samples) +
                                    ") must be multiple of " + std::to_string(up));
  check(clip_samples >= time_losses.max_frame(),
        "TrainConfig: clip_samples below largest time-loss frame");
  check(mel.hop_length == up,
        "TrainConfig: mel hop_length (" + std::to_string(mel.hop_length) +
            ") must equal the generator upsampling product (" + std::to_string(up) + ")");
  for (const auto& r : stft_losses.resolutions) r.validate();
  freq_disc.stft.validate();
}

namespace {

json stft_cfg_to_json(const StftConfig& c) {
  return json{{"fft_size", c.fft_size},
              {"hop_length", c.hop_length},
              {"win_length", c.win_length},
              {"center", c.center}};
}

StftConfig stft_cfg_from_json(const json& j, StftConfig c) {
  c.fft_size = j.value("fft_size", c.fft_size);
  c.hop_length = j.value("hop_length", c.hop_length);
  c.win_length = j.value("win_length", c.win_length);
  c.center = j.value("center", c.center);
  return c;
}

}  // namespace

std::string config_to_json(const TrainConfig& cfg) {
  json j;
  j["lr"] = cfg.lr;
  j["adam_betas"] = {cfg.beta1, cfg.beta2};
  j["adam_eps"] = cfg.adam_eps;
  j["grad_clip"] = cfg.grad_clip;
  j["lr_decay"] = cfg.lr_decay;
  j["batch_size"] = cfg.batch_size;
  j["clip_samples"] = cfg.clip_samples;
  j["steps"] = cfg.steps;
  j["seed"] = cfg.seed;
  j["g_warmup_steps"] = cfg.g_warmup_steps;
  j["checkpoint_every"] = cfg.checkpoint_every;
  j["channel_scale"] = cfg.channel_scale;

  j["weights"] = {{"lambda1", cfg.weights.lambda1},
                  {"lambda2", cfg.weights.lambda2},
                  {"lambda3", cfg.weights.lambda3},
                  {"lambda4", cfg.weights.lambda4},
                  {"lambda_fm", cfg.weights.lambda_fm}};

  json res = json::array();
  for (const auto& r : cfg.stft_losses.resolutions)
    res.push_back({r.fft_size, r.hop_length, r.win_length});
  j["stft_resolutions"] = res;

  json scales = json::array();
  for (const auto& [frame, hop] : cfg.time_losses.scales) scales.push_back({frame, hop});
  j["time_scales"] = scales;

  j["generator"] = {{"n_mels", cfg.generator.n_mels},
                    {"pre_channels", cfg.generator.pre_channels},
                    {"stage_channels", cfg.generator.stage_channels},
                    {"up_factors", cfg.generator.up_factors},
                    {"dilations", cfg.generator.dilations},
                    {"res_kernel", cfg.generator.res_kernel},
                    {"out_kernel", cfg.generator.out_kernel}};

  j["time_disc"] = {{"n_scales", cfg.time_disc.n_scales},
                    {"base_channels", cfg.time_disc.base_channels},
                    {"max_channels", cfg.time_disc.max_channels},
                    {"entry_kernel", cfg.time_disc.entry_kernel},
                    {"n_strided", cfg.time_disc.n_strided},
                    {"strided_kernel", cfg.time_disc.strided_kernel},
                    {"stride", cfg.time_disc.stride},
                    {"groups", cfg.time_disc.groups},
                    {"post_kernel", cfg.time_disc.post_kernel},
                    {"logit_kernel", cfg.time_disc.logit_kernel},
                    {"min_input_len", cfg.time_disc.min_input_len}};

  j["freq_disc"] = {{"stft", stft_cfg_to_json(cfg.freq_disc.stft)},
                    {"stage_channels", cfg.freq_disc.stage_channels},
                    {"stem_kernel", cfg.freq_disc.stem_kernel}};

  j["mel"] = {{"fft_size", cfg.mel.fft_size},
              {"hop_length", cfg.mel.hop_length},
              {"win_length", cfg.mel.win_length},
              {"n_mels", cfg.mel.n_mels},
              {"fmin", cfg.mel.fmin},
              {"fmax", cfg.mel.fmax},
              {"sample_rate", cfg.mel.sample_rate}};

  j["use_stft_loss"] = cfg.use_stft_loss;
  j["use_residual_upsample"] = cfg.use_residual_upsample;
  j["use_freq_disc"] = cfg.use_freq_disc;
  j["use_time_losses"] = cfg.use_time_losses;
  j["use_feature_matching"] = cfg.use_feature_matching;
  return j.dump(2);
}

TrainConfig config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValueError(std::string("config: invalid JSON: ") + e.what());
  }
  TrainConfig cfg;
  try {
    cfg.lr = j.value("lr", cfg.lr);
    if (j.contains("adam_betas")) {
      cfg.beta1 = j["adam_betas"].at(0).get<double>();
      cfg.beta2 = j["adam_betas"].at(1).get<double>();
    }
    cfg.adam_eps = j.value("adam_eps", cfg.adam_eps);
    cfg.grad_clip = j.value("grad_clip", cfg.grad_clip);
    cfg.lr_decay = j.value("lr_decay", cfg.lr_decay);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.clip_samples = j.value("clip_samples", cfg.clip_samples);
    cfg.steps = j.value("steps", cfg.steps);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.g_warmup_steps = j.value("g_warmup_steps", cfg.g_warmup_steps);
    cfg.checkpoint_every = j.value("checkpoint_every", cfg.checkpoint_every);
    cfg.channel_scale = j.value("channel_scale", cfg.channel_scale);

    if (j.contains("weights")) {
      const auto& w = j["weights"];
      cfg.weights.lambda1 = w.value("lambda1", cfg.weights.lambda1);
      cfg.weights.lambda2 = w.value("lambda2", cfg.weights.lambda2);
      cfg.weights.lambda3 = w.value("lambda3", cfg.weights.lambda3);
      cfg.weights.lambda4 = w.value("lambda4", cfg.weights.lambda4);
      cfg.weights.lambda_fm = w.value("lambda_fm", cfg.weights.lambda_fm);
    }
    if (j.contains("stft_resolutions")) {
      cfg.stft_losses.resolutions.clear();
      for (const auto& r : j["stft_resolutions"])
        cfg.stft_losses.resolutions.push_back(
            {r.at(0).get<int64_t>(), r.at(1).get<int64_t>(), r.at(2).get<int64_t>(), false});
    }
    if (j.contains("time_scales")) {
      cfg.time_losses.scales.clear();
      for (const auto& s : j["time_scales"])
        cfg.time_losses.scales.emplace_back(s.at(0).get<int64_t>(), s.at(1).get<int64_t>());
    }
    if (j.contains("generator")) {
      const auto& g = j["generator"];
      cfg.generator.n_mels = g.value("n_mels", cfg.generator.n_mels);
      cfg.generator.pre_channels = g.value("pre_channels", cfg.generator.pre_channels);
      if (g.contains("stage_channels"))
        cfg.generator.stage_channels = g["stage_channels"].get<std::vector<int64_t>>();
      if (g.contains("up_factors"))
        cfg.generator.up_factors = g["up_factors"].get<std::vector<int64_t>>();
      if (g.contains("dilations"))
        cfg.generator.dilations = g["dilations"].get<std::vector<int64_t>>();
      cfg.generator.res_kernel = g.value("res_kernel", cfg.generator.res_kernel);
      cfg.generator.out_kernel = g.value("out_kernel", cfg.generator.out_kernel);
    }
    if (j.contains("time_disc")) {
      const auto& d = j["time_disc"];
      cfg.time_disc.n_scales = d.value("n_scales", cfg.time_disc.n_scales);
      cfg.time_disc.base_channels = d.value("base_channels", cfg.time_disc.base_channels);
      cfg.time_disc.max_channels = d.value("max_channels", cfg.time_disc.max_channels);
      cfg.time_disc.entry_kernel = d.value("entry_kernel", cfg.time_disc.entry_kernel);
      cfg.time_disc.n_strided = d.value("n_strided", cfg.time_disc.n_strided);
      cfg.time_disc.strided_kernel = d.value("strided_kernel", cfg.time_disc.strided_kernel);
      cfg.time_disc.stride = d.value("stride", cfg.time_disc.stride);
      cfg.time_disc.groups = d.value("groups", cfg.time_disc.groups);
      cfg.time_disc.post_kernel = d.value("post_kernel", cfg.time_disc.post_kernel);
      cfg.time_disc.logit_kernel = d.value("logit_kernel", cfg.time_disc.logit_kernel);
      cfg.time_disc.min_input_len = d.value("min_input_len", cfg.time_disc.min_input_len);
    }
    if (j.contains("freq_disc")) {
      const auto& d = j["freq_disc"];
      if (d.contains("stft")) cfg.freq_disc.stft = stft_cfg_from_json(d["stft"], cfg.freq_disc.stft);
      if (d.contains("stage_channels"))
        cfg.freq_disc.stage_channels = d["stage_channels"].get<std::vector<int64_t>>();
      cfg.freq_disc.stem_kernel = d.value("stem_kernel", cfg.freq_disc.stem_kernel);
    }
    if (j.contains("mel")) {
      const auto& m = j["mel"];
      cfg.mel.fft_size = m.value("fft_size", cfg.mel.fft_size);
      cfg.mel.hop_length = m.value("hop_length", cfg.mel.hop_length);
      cfg.mel.win_length = m.value("win_length", cfg.mel.win_length);
      cfg.mel.n_mels = m.value("n_mels", cfg.mel.n_mels);
      cfg.mel.fmin = m.value("fmin", cfg.mel.fmin);
      cfg.mel.fmax = m.value("fmax", cfg.mel.fmax);
      cfg.mel.sample_rate = m.value("sample_rate", cfg.mel.sample_rate);
    }
    cfg.use_stft_loss = j.value("use_stft_loss", cfg.use_stft_loss);
    cfg.use_residual_upsample = j.value("use_residual_upsample", cfg.use_residual_upsample);
    cfg.use_freq_disc = j.value("use_freq_disc", cfg.use_freq_disc);
    cfg.use_time_losses = j.value("use_time_losses", cfg.use_time_losses);
    cfg.use_feature_matching = j.value("use_feature_matching", cfg.use_feature_matching);
  } catch (const json::exception& e) {
    throw ValueError(std::string("config: malformed field: ") + e.what());
  }
  return cfg;
}

TrainConfig config_from_file(const std::string& path) {
  std::ifstream in(path);
  check_rt(in.good(), "config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void apply_ablation(TrainConfig& cfg, const std::string& name) {
  if (name == "B0") {
    // MelGAN-like baseline: adversarial + feature matching only
    cfg.use_stft_loss = false;
    cfg.use_residual_upsample = false;
    cfg.use_freq_disc = false;
    cfg.use_time_losses = false;
    cfg.use_feature_matching = true;
  } else if (name == "P1") {
    cfg.use_stft_loss = true;
    cfg.use_residual_upsample = false;
    cfg.use_freq_disc = false;
    cfg.use_time_losses = false;
    cfg.use_feature_matching = false;
  } else if (name == "P2") {
    cfg.use_stft_loss = true;
    cfg.use_residual_upsample = true;
    cfg.use_freq_disc = false;
    cfg.use_time_losses = false;
    cfg.use_feature_matching = false;
  } else if (name == "P3") {
    cfg.use_stft_loss = true;
    cfg.use_residual_upsample = true;
    cfg.use_freq_disc = false;
    cfg.use_time_losses = true;
    cfg.use_feature_matching = false;
  } else if (name == "P4") {
    cfg.use_stft_loss = true;
    cfg.use_residual_upsample = true;
    cfg.use_freq_disc = true;
    cfg.use_time_losses = true;
    cfg.use_feature_matching = false;
  } else {
    throw ValueError("unknown ablation '" + name + "' (expected B0, P1, P2, P3 or P4)");
  }
}

}  // namespace tfgan
