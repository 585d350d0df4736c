// Training data: scans a directory of mono 24 kHz PCM-16 WAVs, serves
// random clip_samples crops aligned to the feature hop, and pairs each crop
// with the matching rows of the file's full centered log-mel matrix (computed
// lazily, or loaded from an extract cache when present and type-compatible).
#pragma once

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "tfgan/container.hpp"
#include "tfgan/dsp.hpp"
#include "tfgan/rng.hpp"
#include "tfgan/wav.hpp"

namespace tfgan {

template <typename S>
class Dataset {
 public:
  struct Batch {
    Tensor<S> mel;   // [B, F, n_mels]
    Tensor<S> wave;  // [B, 1, clip_samples]
  };

  Dataset(const std::string& dir, const MelConfig& mel_cfg, int64_t clip_samples,
          const std::string& cache_dir = "")
      : mel_cfg_(mel_cfg), clip_samples_(clip_samples), cache_dir_(cache_dir) {
    check(clip_samples_ % mel_cfg_.hop_length == 0,
          "Dataset: clip_samples must be a multiple of the feature hop");
    std::vector<std::string> rejected;
    std::vector<std::filesystem::path> paths;
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".wav") paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
      try {
        AudioClip clip = wav_read(p.string());
        if (clip.sample_rate != mel_cfg_.sample_rate) {
          rejected.push_back(p.filename().string() + ": sample rate " +
                             std::to_string(clip.sample_rate) + ", need " +
                             std::to_string(mel_cfg_.sample_rate));
          continue;
        }
        if (static_cast<int64_t>(clip.samples.size()) < clip_samples_) {
          rejected.push_back(p.filename().string() + ": only " +
                             std::to_string(clip.samples.size()) + " samples, need >= " +
                             std::to_string(clip_samples_));
          std::cerr << "[dataset] skipping " << rejected.back() << "\n";
          continue;
        }
        files_.push_back(Entry{p.string(), std::move(clip), {}, false});
      } catch (const std::exception& e) {
        rejected.push_back(p.filename().string() + ": " + e.what());
      }
    }
    if (files_.empty()) {
      std::string msg = "Dataset: no usable WAV files in " + dir;
      for (const auto& r : rejected) msg += "\n  rejected " + r;
      throw ValueError(msg);
    }
  }

  size_t file_count() const { return files_.size(); }
  const std::string& file_path(size_t i) const { return files_[i].path; }
  int64_t clip_samples() const { return clip_samples_; }
  const MelConfig& mel_config() const { return mel_cfg_; }

  // Uniform file, uniform hop-aligned crop; wave[i] pairs with mel frame
  // i / hop of the same crop.
  Batch next_batch(int64_t batch_size, Rng& rng) {
    const int64_t hop = mel_cfg_.hop_length;
    const int64_t F = clip_samples_ / hop;
    Tensor<S> mel = Tensor<S>::zeros({batch_size, F, mel_cfg_.n_mels});
    Tensor<S> wave = Tensor<S>::zeros({batch_size, 1, clip_samples_});
    auto md = mel.mutable_data();
    auto wd = wave.mutable_data();
    for (int64_t b = 0; b < batch_size; ++b) {
      const size_t fi = static_cast<size_t>(rng.uniform_index(files_.size()));
      Entry& e = files_[fi];
      const int64_t n_pos = (static_cast<int64_t>(e.clip.samples.size()) - clip_samples_) / hop + 1;
      const int64_t start = hop * static_cast<int64_t>(rng.uniform_index(static_cast<uint64_t>(n_pos)));
      ensure_mel(e);
      const int64_t frame0 = start / hop;
      const auto fm = e.mel.data();
      std::copy(fm.begin() + frame0 * mel_cfg_.n_mels, fm.begin() + (frame0 + F) * mel_cfg_.n_mels,
                md.begin() + b * F * mel_cfg_.n_mels);
      for (int64_t i = 0; i < clip_samples_; ++i)
        wd[static_cast<size_t>(b * clip_samples_ + i)] =
            static_cast<S>(e.clip.samples[static_cast<size_t>(start + i)]);
    }
    return Batch{mel, wave};
  }

  // Full-file mel for copy synthesis and tests.
  Tensor<S> full_mel(size_t file_index) {
    ensure_mel(files_[file_index]);
    return files_[file_index].mel;
  }

 private:
  struct Entry {
    std::string path;
    AudioClip clip;
    Tensor<S> mel;  // [frames_full, n_mels], centered
    bool mel_ready = false;
  };

  void ensure_mel(Entry& e) {
    if (e.mel_ready) return;
    if (!cache_dir_.empty()) {
      const auto cache_path = std::filesystem::path(cache_dir_) /
                              (std::filesystem::path(e.path).stem().string() + ".mel");
      if (std::filesystem::exists(cache_path)) {
        auto arrays = read_container(cache_path.string());
        const NamedArray& a = find_array(arrays, "mel");
        const bool type_ok = (std::is_same_v<S, float> && a.dtype == Dtype::kF32) ||
                             (std::is_same_v<S, double> && a.dtype == Dtype::kF64);
        if (type_ok && a.dims.size() == 2 && a.dims[1] == static_cast<uint32_t>(mel_cfg_.n_mels)) {
          std::vector<S> vals;
          if constexpr (std::is_same_v<S, float>) {
            auto f = a.as_f32();
            vals.assign(f.begin(), f.end());
          } else {
            auto f = a.as_f64();
            vals.assign(f.begin(), f.end());
          }
          e.mel = Tensor<S>::from({static_cast<int64_t>(a.dims[0]), mel_cfg_.n_mels},
                                  std::move(vals));
          e.mel_ready = true;
          return;
        }
        std::cerr << "[dataset] cache " << cache_path
                  << " has incompatible dtype/shape, recomputing\n";
      }
    }
    e.mel = mel_features<S>(e.clip, mel_cfg_).values;
    e.mel_ready = true;
  }

  MelConfig mel_cfg_;
  int64_t clip_samples_;
  std::string cache_dir_;
  std::vector<Entry> files_;
};

}  // namespace tfgan
