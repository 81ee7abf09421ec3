#include "privsum/crypto.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "privsum/errors.hpp"
#include "privsum/hmac_sha256.hpp"

namespace privsum {
namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::vector<std::uint8_t> bytes_from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw ValidationError("hex string of odd length");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw ValidationError("invalid hex digit");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

std::string bytes_to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

}  // namespace

SecretKey generate_key(unsigned security_bits) {
  if (security_bits != 128 && security_bits != 256)
    throw ValidationError("security parameter must be 128 or 256");
  SecretKey key;
  key.bytes.resize(security_bits / 8);
  std::size_t off = 0;
  while (off < key.bytes.size()) {
    // getentropy caps a single request at 256 bytes; keys are smaller.
    if (getentropy(key.bytes.data() + off, key.bytes.size() - off) != 0)
      throw KeyError(std::string("randomness source failure: ") +
                     std::strerror(errno));
    off = key.bytes.size();
  }
  return key;
}

SecretKey key_from_hex(std::string_view hex) {
  SecretKey key{bytes_from_hex(hex)};
  if (key.bytes.size() != 16 && key.bytes.size() != 32)
    throw ValidationError("key must be 16 or 32 bytes");
  return key;
}

std::string key_to_hex(const SecretKey& key) { return bytes_to_hex(key.bytes); }

std::array<std::uint8_t, 9> nonce_bytes(const Nonce& nonce) {
  if (nonce.state_index >= kStateCount)
    throw ValidationError("nonce state index out of range");
  std::array<std::uint8_t, 9> out;
  for (int i = 0; i < 8; ++i)
    out[i] = static_cast<std::uint8_t>(nonce.timestamp >> (56 - 8 * i));
  out[8] = nonce.state_index;
  return out;
}

std::vector<std::uint8_t> cipher_to_bytes(Ciphertext c,
                                          const ModulusParams& params) {
  const std::size_t n = params.cipher_bytes();
  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = static_cast<std::uint8_t>(c.value >> (8 * (n - 1 - i)));
  return out;
}

Ciphertext cipher_from_bytes(std::span<const std::uint8_t> bytes,
                             const ModulusParams& params) {
  if (bytes.size() != params.cipher_bytes())
    throw ValidationError("ciphertext length mismatch");
  std::uint64_t v = 0;
  for (std::uint8_t b : bytes) v = (v << 8) | b;
  return Ciphertext{v};
}

std::string cipher_to_hex(Ciphertext c, const ModulusParams& params) {
  return bytes_to_hex(cipher_to_bytes(c, params));
}

Ciphertext cipher_from_hex(std::string_view hex, const ModulusParams& params) {
  return cipher_from_bytes(bytes_from_hex(hex), params);
}

std::array<std::uint8_t, 32> prf(const SecretKey& key, const Nonce& nonce) {
  auto msg = nonce_bytes(nonce);
  return hash::hmac_sha256(key.bytes, msg);
}

Pad length_match(std::span<const std::uint8_t> block,
                 const ModulusParams& params) {
  const unsigned mu = params.bits();
  const std::size_t total_bits = block.size() * 8;
  std::uint64_t sum = 0;
  for (std::size_t start = 0; start < total_bits; start += mu) {
    const std::size_t end = std::min<std::size_t>(start + mu, total_bits);
    std::uint64_t word = 0;
    std::size_t got = 0;
    for (std::size_t b = start; b < end;) {
      const std::size_t byte = b >> 3;
      const unsigned offset = b & 7;
      const unsigned take =
          std::min<std::size_t>(8 - offset, end - b);
      const std::uint8_t chunk =
          static_cast<std::uint8_t>(block[byte] >> (8 - offset - take)) &
          static_cast<std::uint8_t>((1u << take) - 1);
      word = (word << take) | chunk;
      got += take;
      b += take;
    }
    word <<= (mu - got);  // zero-pad a final partial word on the right
    sum = params.add(sum, params.reduce(word));
  }
  return Pad{sum};
}

Pad pad(const SecretKey& key, const Nonce& nonce,
        const ModulusParams& params) {
  auto block = prf(key, nonce);
  return length_match(block, params);
}

Ciphertext encrypt(std::uint64_t v, const SecretKey& key, const Nonce& nonce,
                   const ModulusParams& params) {
  if (v != params.reduce(v)) throw ValidationError("plaintext out of range");
  return Ciphertext{params.add(v, pad(key, nonce, params).value)};
}

std::uint64_t decrypt(Ciphertext c, const SecretKey& key, const Nonce& nonce,
                      const ModulusParams& params) {
  return params.sub(c.value, pad(key, nonce, params).value);
}

Ciphertext combine(std::span<const Ciphertext> ciphertexts,
                   std::span<const std::uint64_t> weights,
                   const ModulusParams& params) {
  if (ciphertexts.size() != weights.size())
    throw ValidationError("ciphertext/weight length mismatch");
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < ciphertexts.size(); ++i)
    sum = params.add(sum, params.mul(ciphertexts[i].value, weights[i]));
  return Ciphertext{sum};
}

Ciphertext combine(std::span<const Ciphertext> ciphertexts,
                   const ModulusParams& params) {
  std::uint64_t sum = 0;
  for (const Ciphertext& c : ciphertexts) sum = params.add(sum, c.value);
  return Ciphertext{sum};
}

Pad pad_sum(std::span<const std::pair<SecretKey, Nonce>> keys_and_nonces,
            std::span<const std::uint64_t> weights,
            const ModulusParams& params) {
  if (keys_and_nonces.size() != weights.size())
    throw ValidationError("pad/weight length mismatch");
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < keys_and_nonces.size(); ++i) {
    const auto& [key, nonce] = keys_and_nonces[i];
    sum = params.add(sum, params.mul(pad(key, nonce, params).value,
                                     weights[i]));
  }
  return Pad{sum};
}

Pad pad_sum(std::span<const std::pair<SecretKey, Nonce>> keys_and_nonces,
            const ModulusParams& params) {
  std::uint64_t sum = 0;
  for (const auto& [key, nonce] : keys_and_nonces)
    sum = params.add(sum, pad(key, nonce, params).value);
  return Pad{sum};
}

}  // namespace privsum
