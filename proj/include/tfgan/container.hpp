// Named-array container, the on-disk format for feature caches and
// checkpoints. Layout (little-endian):
//   magic "TFV1" | u32 array count | per array:
//     u16 name length | name bytes | u8 dtype (0=f32, 1=f64) | u8 rank |
//     u32 dims[rank] | raw data
//   | u32 CRC32 over everything after the magic.
// Writes are atomic: temp file, fsync, rename.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tfgan/common.hpp"

namespace tfgan {

enum class Dtype : uint8_t { kF32 = 0, kF64 = 1 };

struct NamedArray {
  std::string name;
  Dtype dtype = Dtype::kF32;
  std::vector<uint32_t> dims;
  std::vector<uint8_t> raw;  // dims product * element size bytes

  int64_t count() const {
    int64_t n = 1;
    for (uint32_t d : dims) n *= d;
    return n;
  }

  static NamedArray from_f32(std::string name, std::vector<uint32_t> dims,
                             const std::vector<float>& values);
  static NamedArray from_f64(std::string name, std::vector<uint32_t> dims,
                             const std::vector<double>& values);
  // Arbitrary bytes stored as a flat f64 array (raw bytes, space padded).
  static NamedArray from_bytes(std::string name, const std::string& bytes);

  std::vector<float> as_f32() const;
  std::vector<double> as_f64() const;
  std::string as_bytes() const;
};

void write_container(const std::string& path, const std::vector<NamedArray>& arrays);
std::vector<NamedArray> read_container(const std::string& path);

// Lookup helper; throws if absent.
const NamedArray& find_array(const std::vector<NamedArray>& arrays, const std::string& name);
bool has_array(const std::vector<NamedArray>& arrays, const std::string& name);

uint32_t file_crc32(const std::string& path);

}  // namespace tfgan
