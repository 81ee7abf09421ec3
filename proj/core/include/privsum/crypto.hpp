#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "privsum/modulus.hpp"

namespace privsum {

inline constexpr unsigned kStateCount = 5;

// Uniformly random PRF key, 128 or 256 bits.
struct SecretKey {
  std::vector<std::uint8_t> bytes;

  bool operator==(const SecretKey&) const = default;
};

SecretKey generate_key(unsigned security_bits);
SecretKey key_from_hex(std::string_view hex);
std::string key_to_hex(const SecretKey& key);

// PRF input: one per (timestamp, presence-state type). A (key, nonce)
// pair must never be reused for two different plaintexts.
struct Nonce {
  std::uint64_t timestamp = 0;
  std::uint8_t state_index = 0;  // in [0, 4]

  bool operator==(const Nonce&) const = default;
  auto operator<=>(const Nonce&) const = default;
};

// Wire layout: 8-byte big-endian timestamp followed by 1 state byte.
std::array<std::uint8_t, 9> nonce_bytes(const Nonce& nonce);

struct Pad {
  std::uint64_t value = 0;

  bool operator==(const Pad&) const = default;
};

struct Ciphertext {
  std::uint64_t value = 0;

  bool operator==(const Ciphertext&) const = default;
};

std::vector<std::uint8_t> cipher_to_bytes(Ciphertext c,
                                          const ModulusParams& params);
Ciphertext cipher_from_bytes(std::span<const std::uint8_t> bytes,
                             const ModulusParams& params);
std::string cipher_to_hex(Ciphertext c, const ModulusParams& params);
Ciphertext cipher_from_hex(std::string_view hex, const ModulusParams& params);

// Keyed PRF over the serialized nonce: HMAC-SHA-256, 256-bit output.
std::array<std::uint8_t, 32> prf(const SecretKey& key, const Nonce& nonce);

// Length-matching hash h: splits the block into consecutive mu-bit
// big-endian words (final partial word zero-padded on the right) and sums
// them mod M. Needs uniform output on uniform input, not collision
// resistance.
Pad length_match(std::span<const std::uint8_t> block,
                 const ModulusParams& params);

// r = h(f_k(n)), the keystream residue added to a plaintext.
Pad pad(const SecretKey& key, const Nonce& nonce, const ModulusParams& params);

// c = v + pad(k, n) mod M.
Ciphertext encrypt(std::uint64_t v, const SecretKey& key, const Nonce& nonce,
                   const ModulusParams& params);

// v = c - pad(k, n) mod M.
std::uint64_t decrypt(Ciphertext c, const SecretKey& key, const Nonce& nonce,
                      const ModulusParams& params);

// Weighted modular sum of ciphertexts; with unit weights this is the plain
// encrypted sum the computation engine produces.
Ciphertext combine(std::span<const Ciphertext> ciphertexts,
                   std::span<const std::uint64_t> weights,
                   const ModulusParams& params);
Ciphertext combine(std::span<const Ciphertext> ciphertexts,
                   const ModulusParams& params);

// Weighted sum of pads; subtracting it from the matching combined
// ciphertext yields the weighted plaintext sum.
Pad pad_sum(std::span<const std::pair<SecretKey, Nonce>> keys_and_nonces,
            std::span<const std::uint64_t> weights,
            const ModulusParams& params);
Pad pad_sum(std::span<const std::pair<SecretKey, Nonce>> keys_and_nonces,
            const ModulusParams& params);

}  // namespace privsum
