// RIFF/WAVE PCM-16 mono reader and writer. Samples map to [-1, 1) by /32768;
// writing rounds half away from zero and clamps, the exact inverse on
// 16-bit-representable data.
#pragma once

#include <string>

#include "tfgan/dsp.hpp"

namespace tfgan {

AudioClip wav_read(const std::string& path);
void wav_write(const std::string& path, const AudioClip& clip);

}  // namespace tfgan
