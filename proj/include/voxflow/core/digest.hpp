#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace voxflow {

struct Digest {
  std::array<std::uint8_t, 32> bytes{};

  std::string hex() const;
  static Digest from_hex(std::string_view hex); // throws MalformedDigest
  std::uint64_t low64() const; // digest read as a big-endian integer, mod 2^64

  friend auto operator<=>(const Digest &, const Digest &) = default;
};

// Incremental SHA-256.
class Sha256 {
public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256 &) = delete;
  Sha256 &operator=(const Sha256 &) = delete;

  Sha256 &update(std::span<const std::uint8_t> data);
  Sha256 &update(std::string_view text);
  Digest finish();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view text);

bool is_hex_digest(std::string_view s);

} // namespace voxflow
