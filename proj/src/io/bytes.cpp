#include "voxflow/io/bytes.hpp"

#include <fstream>
#include <zlib.h>

#include "voxflow/core/error.hpp"

namespace voxflow::io {

Bytes read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("IoFailure", "cannot open '" + path.string() + "'");
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  in.seekg(0, std::ios::beg);
  Bytes data(static_cast<std::size_t>(size));
  if (size > 0 && !in.read(reinterpret_cast<char *>(data.data()), size))
    fail("IoFailure", "cannot read '" + path.string() + "'");
  return data;
}

void write_file(const std::filesystem::path &path, std::span<const std::uint8_t> data) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail("IoFailure", "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char *>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) fail("IoFailure", "write failed for '" + path.string() + "'");
}

void write_file(const std::filesystem::path &path, const std::string &text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

bool has_gzip_magic(std::span<const std::uint8_t> data) {
  return data.size() >= 2 && data[0] == 0x1f && data[1] == 0x8b;
}

namespace {

Bytes deflate_with(std::span<const std::uint8_t> data, int window_bits) {
  z_stream zs{};
  if (deflateInit2(&zs, 6, Z_DEFLATED, window_bits, 8, Z_DEFAULT_STRATEGY) != Z_OK)
    fail("IoFailure", "deflateInit2 failed");
  Bytes out(deflateBound(&zs, static_cast<uLong>(data.size())) + 32);
  zs.next_in = const_cast<Bytef *>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) fail("IoFailure", "deflate failed");
  out.resize(zs.total_out);
  return out;
}

} // namespace

Bytes gzip_compress(std::span<const std::uint8_t> data) { return deflate_with(data, 15 + 16); }
Bytes zlib_compress(std::span<const std::uint8_t> data) { return deflate_with(data, 15); }

Bytes gzip_decompress(std::span<const std::uint8_t> data) {
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 32) != Z_OK) fail("IoFailure", "inflateInit2 failed");
  zs.next_in = const_cast<Bytef *>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  Bytes out;
  std::uint8_t chunk[1 << 16];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = chunk;
    zs.avail_out = sizeof(chunk);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      fail("TruncatedData", "corrupt or truncated gzip stream");
    }
    out.insert(out.end(), chunk, chunk + (sizeof(chunk) - zs.avail_out));
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      fail("TruncatedData", "gzip stream ended early");
    }
  }
  inflateEnd(&zs);
  return out;
}

std::uint32_t crc32(std::span<const std::uint8_t> data) {
  return static_cast<std::uint32_t>(::crc32(0L, data.data(), static_cast<uInt>(data.size())));
}

} // namespace voxflow::io
