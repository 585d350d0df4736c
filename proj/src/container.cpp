#include "tfgan/container.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace tfgan {

namespace {

constexpr char kMagic[4] = {'T', 'F', 'V', '1'};

void append_u16(std::vector<uint8_t>& buf, uint16_t v) {
  buf.push_back(static_cast<uint8_t>(v & 0xff));
  buf.push_back(static_cast<uint8_t>(v >> 8));
}

void append_u32(std::vector<uint8_t>& buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

uint16_t take_u16(const std::vector<uint8_t>& buf, size_t& pos) {
  check_rt(pos + 2 <= buf.size(), "container: truncated file");
  const uint16_t v = static_cast<uint16_t>(buf[pos] | (buf[pos + 1] << 8));
  pos += 2;
  return v;
}

uint32_t take_u32(const std::vector<uint8_t>& buf, size_t& pos) {
  check_rt(pos + 4 <= buf.size(), "container: truncated file");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[pos + static_cast<size_t>(i)]) << (8 * i);
  pos += 4;
  return v;
}

size_t element_size(Dtype d) { return d == Dtype::kF32 ? 4 : 8; }

}  // namespace

NamedArray NamedArray::from_f32(std::string name, std::vector<uint32_t> dims,
                                const std::vector<float>& values) {
  NamedArray a;
  a.name = std::move(name);
  a.dtype = Dtype::kF32;
  a.dims = std::move(dims);
  check(a.count() == static_cast<int64_t>(values.size()), "NamedArray: dims/value count mismatch");
  a.raw.resize(values.size() * 4);
  std::memcpy(a.raw.data(), values.data(), a.raw.size());
  return a;
}

NamedArray NamedArray::from_f64(std::string name, std::vector<uint32_t> dims,
                                const std::vector<double>& values) {
  NamedArray a;
  a.name = std::move(name);
  a.dtype = Dtype::kF64;
  a.dims = std::move(dims);
  check(a.count() == static_cast<int64_t>(values.size()), "NamedArray: dims/value count mismatch");
  a.raw.resize(values.size() * 8);
  std::memcpy(a.raw.data(), values.data(), a.raw.size());
  return a;
}

NamedArray NamedArray::from_bytes(std::string name, const std::string& bytes) {
  // u64 true length, then the bytes, space-padded to a multiple of 8 so the
  // payload is a well-formed flat f64 array.
  NamedArray a;
  a.name = std::move(name);
  a.dtype = Dtype::kF64;
  std::string body = bytes;
  while (body.size() % 8 != 0) body.push_back(' ');
  a.raw.resize(8 + body.size());
  const uint64_t len = bytes.size();
  std::memcpy(a.raw.data(), &len, 8);
  std::memcpy(a.raw.data() + 8, body.data(), body.size());
  a.dims = {static_cast<uint32_t>(a.raw.size() / 8)};
  return a;
}

std::vector<float> NamedArray::as_f32() const {
  check_rt(dtype == Dtype::kF32, "NamedArray " + name + ": expected f32 data");
  std::vector<float> v(raw.size() / 4);
  std::memcpy(v.data(), raw.data(), raw.size());
  return v;
}

std::vector<double> NamedArray::as_f64() const {
  check_rt(dtype == Dtype::kF64, "NamedArray " + name + ": expected f64 data");
  std::vector<double> v(raw.size() / 8);
  std::memcpy(v.data(), raw.data(), raw.size());
  return v;
}

std::string NamedArray::as_bytes() const {
  check_rt(raw.size() >= 8, "NamedArray " + name + ": not a byte payload");
  uint64_t len = 0;
  std::memcpy(&len, raw.data(), 8);
  check_rt(len <= raw.size() - 8, "NamedArray " + name + ": corrupt byte payload length");
  return std::string(raw.begin() + 8, raw.begin() + 8 + static_cast<long>(len));
}

void write_container(const std::string& path, const std::vector<NamedArray>& arrays) {
  std::vector<uint8_t> payload;
  append_u32(payload, static_cast<uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    check(a.name.size() <= 0xffff, "container: array name too long");
    check(a.raw.size() == static_cast<size_t>(a.count()) * element_size(a.dtype),
          "container: raw size does not match dims for " + a.name);
    append_u16(payload, static_cast<uint16_t>(a.name.size()));
    payload.insert(payload.end(), a.name.begin(), a.name.end());
    payload.push_back(static_cast<uint8_t>(a.dtype));
    check(a.dims.size() <= 0xff, "container: rank too large");
    payload.push_back(static_cast<uint8_t>(a.dims.size()));
    for (uint32_t d : a.dims) append_u32(payload, d);
    payload.insert(payload.end(), a.raw.begin(), a.raw.end());
  }
  const uint32_t crc =
      static_cast<uint32_t>(crc32(0L, payload.data(), static_cast<uInt>(payload.size())));
  append_u32(payload, crc);

  const std::string tmp = path + ".tmp";
  {
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    check_rt(fd >= 0, "container: cannot open " + tmp);
    size_t off = 0;
    bool ok = true;
    while (off < 4) {
      const ssize_t n = ::write(fd, kMagic + off, 4 - off);
      if (n <= 0) { ok = false; break; }
      off += static_cast<size_t>(n);
    }
    off = 0;
    while (ok && off < payload.size()) {
      const ssize_t n = ::write(fd, payload.data() + off, payload.size() - off);
      if (n <= 0) { ok = false; break; }
      off += static_cast<size_t>(n);
    }
    if (ok) ok = ::fsync(fd) == 0;
    ::close(fd);
    check_rt(ok, "container: write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  check_rt(!ec, "container: rename to " + path + " failed: " + ec.message());
}

std::vector<NamedArray> read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check_rt(in.good(), "container: cannot open " + path);
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0);
  check_rt(size >= 12, "container: " + path + " too small to be valid");

  char magic[4];
  in.read(magic, 4);
  check_rt(std::memcmp(magic, kMagic, 4) == 0, "container: bad magic in " + path);

  std::vector<uint8_t> payload(static_cast<size_t>(size - 4));
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  check_rt(in.good(), "container: truncated read of " + path);

  check_rt(payload.size() >= 4, "container: truncated file " + path);
  const size_t body = payload.size() - 4;
  uint32_t stored_crc = 0;
  for (int i = 0; i < 4; ++i) stored_crc |= static_cast<uint32_t>(payload[body + static_cast<size_t>(i)]) << (8 * i);
  const uint32_t actual_crc =
      static_cast<uint32_t>(crc32(0L, payload.data(), static_cast<uInt>(body)));
  check_rt(stored_crc == actual_crc, "container: checksum mismatch in " + path +
                                         " (file corrupt or truncated)");

  payload.resize(body);
  size_t pos = 0;
  const uint32_t count = take_u32(payload, pos);
  std::vector<NamedArray> arrays;
  arrays.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    const uint16_t name_len = take_u16(payload, pos);
    check_rt(pos + name_len <= payload.size(), "container: truncated name in " + path);
    a.name.assign(payload.begin() + static_cast<long>(pos),
                  payload.begin() + static_cast<long>(pos + name_len));
    pos += name_len;
    check_rt(pos + 2 <= payload.size(), "container: truncated header in " + path);
    const uint8_t dt = payload[pos++];
    check_rt(dt <= 1, "container: unknown dtype code " + std::to_string(dt) + " in " + path);
    a.dtype = static_cast<Dtype>(dt);
    const uint8_t rank = payload[pos++];
    a.dims.resize(rank);
    for (uint8_t r = 0; r < rank; ++r) a.dims[r] = take_u32(payload, pos);
    const size_t bytes = static_cast<size_t>(a.count()) * element_size(a.dtype);
    check_rt(pos + bytes <= payload.size(), "container: truncated data for " + a.name);
    a.raw.assign(payload.begin() + static_cast<long>(pos),
                 payload.begin() + static_cast<long>(pos + bytes));
    pos += bytes;
    arrays.push_back(std::move(a));
  }
  check_rt(pos == payload.size(), "container: trailing bytes in " + path);
  return arrays;
}

const NamedArray& find_array(const std::vector<NamedArray>& arrays, const std::string& name) {
  for (const auto& a : arrays)
    if (a.name == name) return a;
  throw RuntimeError("container: missing array '" + name + "'");
}

bool has_array(const std::vector<NamedArray>& arrays, const std::string& name) {
  for (const auto& a : arrays)
    if (a.name == name) return true;
  return false;
}

uint32_t file_crc32(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check_rt(in.good(), "file_crc32: cannot open " + path);
  uLong crc = crc32(0L, Z_NULL, 0);
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    crc = crc32(crc, reinterpret_cast<const Bytef*>(buf), static_cast<uInt>(in.gcount()));
  return static_cast<uint32_t>(crc);
}

}  // namespace tfgan
