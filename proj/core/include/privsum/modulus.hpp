#pragma once

#include <cstdint>

#include "privsum/errors.hpp"

namespace privsum {

// Power-of-two modulus M with mu = log2(M). All residue arithmetic in the
// system goes through this class; values live in [0, M). mu = 64 is
// supported (M does not fit in a uint64_t, the mask still does).
class ModulusParams {
 public:
  // mu in [1, 64].
  static ModulusParams from_bits(unsigned mu) {
    if (mu < 1 || mu > 64)
      throw ValidationError("modulus bit length must be in [1, 64]");
    return ModulusParams(mu);
  }

  // m must be a power of two, 2 <= m <= 2^63. Use from_bits(64) for 2^64.
  static ModulusParams from_modulus(std::uint64_t m) {
    if (m < 2 || (m & (m - 1)) != 0)
      throw ValidationError("modulus must be a power of two >= 2");
    unsigned mu = 0;
    while ((std::uint64_t{1} << mu) != m) ++mu;
    return ModulusParams(mu);
  }

  // The paper-era default, M = 2^32.
  ModulusParams() : ModulusParams(32) {}

  unsigned bits() const { return mu_; }
  std::uint64_t mask() const { return mask_; }

  // Modulus value; only valid for mu < 64.
  std::uint64_t modulus() const {
    if (mu_ == 64) throw ValidationError("2^64 does not fit in uint64_t");
    return mask_ + 1;
  }

  std::uint64_t reduce(std::uint64_t x) const { return x & mask_; }

  std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
    return (a + b) & mask_;
  }

  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const {
    // Subtraction as addition of the modular complement.
    return add(a, negate(b));
  }

  std::uint64_t negate(std::uint64_t a) const { return (0 - a) & mask_; }

  std::uint64_t mul(std::uint64_t a, std::uint64_t w) const {
    return static_cast<std::uint64_t>(
               static_cast<unsigned __int128>(a & mask_) * w) &
           mask_;
  }

  // Bytes of one ciphertext on the wire; requires byte-aligned mu.
  std::size_t cipher_bytes() const {
    if (mu_ % 8 != 0)
      throw ValidationError(
          "wire serialization requires a byte-aligned modulus");
    return mu_ / 8;
  }

  bool operator==(const ModulusParams&) const = default;

 private:
  explicit ModulusParams(unsigned mu)
      : mu_(mu), mask_(mu == 64 ? ~std::uint64_t{0}
                                : (std::uint64_t{1} << mu) - 1) {}

  unsigned mu_;
  std::uint64_t mask_;
};

}  // namespace privsum
