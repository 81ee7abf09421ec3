#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "privsum/crypto.hpp"

namespace privsum {

// One stored observation: plaintext header (user id, timestamp) plus the
// five per-state ciphertexts, optionally followed by ciphertexts of the
// squared values for non-Boolean data.
struct CipherRecord {
  std::string user_id;
  std::uint64_t timestamp = 0;
  std::array<Ciphertext, kStateCount> ciphertexts{};
  std::optional<std::array<Ciphertext, kStateCount>> squares;

  bool operator==(const CipherRecord&) const = default;
};

// Wire layout, big-endian throughout:
//   flags(1)        bit 0 = squares present, other bits zero
//   uid_len(2)      user id byte count
//   uid             UTF-8 user id
//   timestamp(8)
//   5 ciphertexts   cipher_bytes(params) each
//   5 squares       only when flagged
std::vector<std::uint8_t> serialize_record(const CipherRecord& record,
                                           const ModulusParams& params);

CipherRecord parse_record(std::span<const std::uint8_t> bytes,
                          const ModulusParams& params);

// Parses one record from the front of `bytes` (the format is
// self-delimiting); advances `consumed`. Used to replay append-only logs.
CipherRecord parse_record_prefix(std::span<const std::uint8_t> bytes,
                                 const ModulusParams& params,
                                 std::size_t& consumed);

}  // namespace privsum
