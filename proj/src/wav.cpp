#include "tfgan/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace tfgan {

namespace {

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

void write_u32(std::ostream& out, uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

void write_u16(std::ostream& out, uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  out.write(b, 2);
}

}  // namespace

AudioClip wav_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check_rt(in.good(), "wav_read: cannot open " + path);

  char tag[4];
  in.read(tag, 4);
  check_rt(in.good() && std::memcmp(tag, "RIFF", 4) == 0, "wav_read: not a RIFF file: " + path);
  read_u32(in);  // riff size
  in.read(tag, 4);
  check_rt(in.good() && std::memcmp(tag, "WAVE", 4) == 0, "wav_read: not a WAVE file: " + path);

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  std::vector<int16_t> pcm;
  bool have_data = false;

  while (in.peek() != EOF) {
    in.read(tag, 4);
    if (!in.good()) break;
    const uint32_t size = read_u32(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      check_rt(size >= 16, "wav_read: malformed fmt chunk in " + path);
      format = read_u16(in);
      channels = read_u16(in);
      sample_rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      if (size > 16) in.seekg(size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      check_rt(have_fmt, "wav_read: data chunk before fmt in " + path);
      check_rt(format == 1, "wav_read: " + path + ": PCM required (format code " +
                                std::to_string(format) + ")");
      check_rt(channels == 1, "wav_read: " + path + ": mono required (got " +
                                  std::to_string(channels) + " channels)");
      check_rt(bits == 16, "wav_read: " + path + ": 16-bit samples required (got " +
                               std::to_string(bits) + ")");
      pcm.resize(size / 2);
      in.read(reinterpret_cast<char*>(pcm.data()), static_cast<std::streamsize>(size / 2 * 2));
      check_rt(in.good(), "wav_read: truncated data chunk in " + path);
      have_data = true;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);  // chunks are word-aligned
    }
    if (size & 1 && std::memcmp(tag, "data", 4) == 0) in.seekg(1, std::ios::cur);
  }
  check_rt(have_data, "wav_read: no data chunk in " + path);

  AudioClip clip;
  clip.sample_rate = static_cast<int>(sample_rate);
  clip.samples.resize(pcm.size());
  for (size_t i = 0; i < pcm.size(); ++i)
    clip.samples[i] = static_cast<double>(pcm[i]) / 32768.0;
  return clip;
}

void wav_write(const std::string& path, const AudioClip& clip) {
  std::vector<int16_t> pcm(clip.samples.size());
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    const double v = clip.samples[i];
    check_rt(std::isfinite(v), "wav_write: non-finite sample at index " + std::to_string(i));
    double r = v * 32768.0;
    r = r >= 0.0 ? std::floor(r + 0.5) : std::ceil(r - 0.5);  // round half away from zero
    if (r > 32767.0) r = 32767.0;
    if (r < -32768.0) r = -32768.0;
    pcm[i] = static_cast<int16_t>(r);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  check_rt(out.good(), "wav_write: cannot open " + path);
  const uint32_t data_size = static_cast<uint32_t>(pcm.size() * 2);
  const uint32_t sr = static_cast<uint32_t>(clip.sample_rate);
  out.write("RIFF", 4);
  write_u32(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, 1);  // mono
  write_u32(out, sr);
  write_u32(out, sr * 2);  // byte rate
  write_u16(out, 2);       // block align
  write_u16(out, 16);      // bits
  out.write("data", 4);
  write_u32(out, data_size);
  out.write(reinterpret_cast<const char*>(pcm.data()), static_cast<std::streamsize>(data_size));
  check_rt(out.good(), "wav_write: write failed for " + path);
}

}  // namespace tfgan
