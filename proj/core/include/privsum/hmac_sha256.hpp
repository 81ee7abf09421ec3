#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace privsum::hash {

// Self-contained SHA-256 (FIPS 180-4). Streaming interface so HMAC can
// reuse a keyed inner state.
class Sha256 {
 public:
  static constexpr std::size_t kDigestSize = 32;
  static constexpr std::size_t kBlockSize = 64;

  Sha256();

  void update(std::span<const std::uint8_t> data);
  std::array<std::uint8_t, kDigestSize> finish();

  static std::array<std::uint8_t, kDigestSize> digest(
      std::span<const std::uint8_t> data);

 private:
  void compress(const std::uint8_t* block);

  std::array<std::uint32_t, 8> state_;
  std::uint64_t total_len_ = 0;
  std::array<std::uint8_t, kBlockSize> buffer_{};
  std::size_t buffer_len_ = 0;
};

// HMAC-SHA-256 (RFC 2104). Keys longer than the block size are hashed
// first, shorter keys zero-padded, as the RFC requires.
std::array<std::uint8_t, Sha256::kDigestSize> hmac_sha256(
    std::span<const std::uint8_t> key, std::span<const std::uint8_t> message);

}  // namespace privsum::hash
