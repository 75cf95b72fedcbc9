#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace voxflow::io {

using Bytes = std::vector<std::uint8_t>;

Bytes read_file(const std::filesystem::path &path);  // throws IoFailure
void write_file(const std::filesystem::path &path, std::span<const std::uint8_t> data);
void write_file(const std::filesystem::path &path, const std::string &text);

bool has_gzip_magic(std::span<const std::uint8_t> data);
Bytes gzip_compress(std::span<const std::uint8_t> data);
Bytes gzip_decompress(std::span<const std::uint8_t> data); // throws TruncatedData
Bytes zlib_compress(std::span<const std::uint8_t> data);   // raw zlib stream (PNG IDAT)
std::uint32_t crc32(std::span<const std::uint8_t> data);

template <typename T> T load_le(const std::uint8_t *p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T> T byteswap_value(T v) {
  std::uint8_t b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  std::memcpy(&v, b, sizeof(T));
  return v;
}

template <typename T> void store_le(Bytes &out, T v) {
  const auto *p = reinterpret_cast<const std::uint8_t *>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

} // namespace voxflow::io
