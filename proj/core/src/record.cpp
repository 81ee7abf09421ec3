#include "privsum/record.hpp"

#include "privsum/errors.hpp"

namespace privsum {
namespace {

constexpr std::uint8_t kSquaresFlag = 0x01;

void put_be(std::vector<std::uint8_t>& out, std::uint64_t v, unsigned bytes) {
  for (unsigned i = 0; i < bytes; ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * (bytes - 1 - i))));
}

std::uint64_t get_be(std::span<const std::uint8_t> in, std::size_t off,
                     unsigned bytes) {
  std::uint64_t v = 0;
  for (unsigned i = 0; i < bytes; ++i) v = (v << 8) | in[off + i];
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_record(const CipherRecord& record,
                                           const ModulusParams& params) {
  if (record.user_id.empty() || record.user_id.size() > 0xffff)
    throw ValidationError("user id must be 1..65535 bytes");
  const std::size_t cb = params.cipher_bytes();

  std::vector<std::uint8_t> out;
  out.reserve(1 + 2 + record.user_id.size() + 8 +
              cb * kStateCount * (record.squares ? 2 : 1));
  out.push_back(record.squares ? kSquaresFlag : 0);
  put_be(out, record.user_id.size(), 2);
  out.insert(out.end(), record.user_id.begin(), record.user_id.end());
  put_be(out, record.timestamp, 8);
  for (const Ciphertext& c : record.ciphertexts) {
    if (c.value != params.reduce(c.value))
      throw ValidationError("ciphertext out of modulus range");
    put_be(out, c.value, static_cast<unsigned>(cb));
  }
  if (record.squares)
    for (const Ciphertext& c : *record.squares) {
      if (c.value != params.reduce(c.value))
        throw ValidationError("ciphertext out of modulus range");
      put_be(out, c.value, static_cast<unsigned>(cb));
    }
  return out;
}

CipherRecord parse_record_prefix(std::span<const std::uint8_t> bytes,
                                 const ModulusParams& params,
                                 std::size_t& consumed) {
  const std::size_t cb = params.cipher_bytes();
  if (bytes.size() < 3) throw ValidationError("record truncated");
  const std::uint8_t flags = bytes[0];
  if (flags & ~kSquaresFlag)
    throw ValidationError("record has unknown flag bits");
  const bool has_squares = flags & kSquaresFlag;
  const std::size_t uid_len = get_be(bytes, 1, 2);
  if (uid_len == 0) throw ValidationError("record has empty user id");

  const std::size_t total =
      1 + 2 + uid_len + 8 + cb * kStateCount * (has_squares ? 2 : 1);
  if (bytes.size() < total) throw ValidationError("record truncated");

  CipherRecord record;
  record.user_id.assign(reinterpret_cast<const char*>(bytes.data() + 3),
                        uid_len);
  std::size_t off = 3 + uid_len;
  record.timestamp = get_be(bytes, off, 8);
  off += 8;
  for (unsigned i = 0; i < kStateCount; ++i) {
    record.ciphertexts[i] =
        Ciphertext{get_be(bytes, off, static_cast<unsigned>(cb))};
    off += cb;
  }
  if (has_squares) {
    std::array<Ciphertext, kStateCount> squares;
    for (unsigned i = 0; i < kStateCount; ++i) {
      squares[i] = Ciphertext{get_be(bytes, off, static_cast<unsigned>(cb))};
      off += cb;
    }
    record.squares = squares;
  }
  consumed = total;
  return record;
}

CipherRecord parse_record(std::span<const std::uint8_t> bytes,
                          const ModulusParams& params) {
  std::size_t consumed = 0;
  CipherRecord record = parse_record_prefix(bytes, params, consumed);
  if (consumed != bytes.size())
    throw ValidationError("trailing bytes after record");
  return record;
}

}  // namespace privsum
