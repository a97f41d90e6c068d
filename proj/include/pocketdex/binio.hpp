#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <string>

#include "pocketdex/errors.hpp"

namespace pocketdex::binio {

// All on-disk integers are little-endian, written byte by byte so the
// formats are identical on any host.

inline void write_bytes(std::ostream& out, const void* p, size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void write_u8(std::ostream& out, uint8_t v) { write_bytes(out, &v, 1); }

inline void write_u16le(std::ostream& out, uint16_t v) {
  uint8_t b[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
  write_bytes(out, b, 2);
}

inline void write_u32le(std::ostream& out, uint32_t v) {
  uint8_t b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<uint8_t>(v >> (8 * i));
  write_bytes(out, b, 4);
}

inline void write_u64le(std::ostream& out, uint64_t v) {
  uint8_t b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<uint8_t>(v >> (8 * i));
  write_bytes(out, b, 8);
}

inline void write_f32le(std::ostream& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32le(out, bits);
}

inline void read_bytes(std::istream& in, void* p, size_t n, const char* what) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n)
    throw TruncatedFileError(std::string("unexpected end of file while reading ") + what);
}

inline uint8_t read_u8(std::istream& in, const char* what) {
  uint8_t v;
  read_bytes(in, &v, 1, what);
  return v;
}

inline uint16_t read_u16le(std::istream& in, const char* what) {
  uint8_t b[2];
  read_bytes(in, b, 2, what);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

inline uint32_t read_u32le(std::istream& in, const char* what) {
  uint8_t b[4];
  read_bytes(in, b, 4, what);
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline uint64_t read_u64le(std::istream& in, const char* what) {
  uint8_t b[8];
  read_bytes(in, b, 8, what);
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline float read_f32le(std::istream& in, const char* what) {
  uint32_t bits = read_u32le(in, what);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

// Writes through a temp file and renames into place, so a crash never
// leaves a half-written output.
inline void atomic_write_file(const std::string& path,
                              const std::function<void(std::ostream&)>& writer) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot open for writing: " + tmp.string());
    writer(out);
    out.flush();
    if (!out) throw InvalidArgument("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace pocketdex::binio
