#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "privsum/crypto.hpp"
#include "privsum/errors.hpp"
#include "privsum/hmac_sha256.hpp"

using namespace privsum;

namespace {

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2)
    out.push_back(static_cast<std::uint8_t>(
        std::stoul(std::string(hex.substr(i, 2)), nullptr, 16)));
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

struct GoldenLine {
  SecretKey key;
  Nonce nonce;
  std::uint64_t pad_value;
  std::uint64_t cipher_value;
};

std::vector<GoldenLine> load_golden() {
  std::ifstream in(std::string(PRIVSUM_GOLDEN_DIR) + "/vectors.txt");
  REQUIRE(in.good());
  std::vector<GoldenLine> lines;
  std::string key_hex, nonce_hex, pad_hex, cipher_hex;
  while (in >> key_hex >> nonce_hex >> pad_hex >> cipher_hex) {
    GoldenLine line;
    line.key = key_from_hex(key_hex);
    auto nb = from_hex(nonce_hex);
    REQUIRE(nb.size() == 9);
    std::uint64_t ts = 0;
    for (int i = 0; i < 8; ++i) ts = ts << 8 | nb[i];
    line.nonce = Nonce{ts, nb[8]};
    line.pad_value = std::stoull(pad_hex, nullptr, 16);
    line.cipher_value = std::stoull(cipher_hex, nullptr, 16);
    lines.push_back(std::move(line));
  }
  REQUIRE(lines.size() == 15);
  return lines;
}

}  // namespace

TEST_CASE("sha256 matches the FIPS examples") {
  auto hex_of = [](std::string_view msg) {
    auto d = hash::Sha256::digest(
        {reinterpret_cast<const std::uint8_t*>(msg.data()), msg.size()});
    return to_hex(d);
  };
  CHECK(hex_of("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(hex_of("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(hex_of("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("sha256 streaming equals one-shot across split points") {
  std::mt19937 rng(7);
  std::vector<std::uint8_t> data(300);
  for (auto& b : data) b = static_cast<std::uint8_t>(rng());
  const auto oneshot = hash::Sha256::digest(data);
  for (std::size_t split : {0u, 1u, 63u, 64u, 65u, 128u, 299u}) {
    hash::Sha256 h;
    h.update(std::span(data).first(split));
    h.update(std::span(data).subspan(split));
    CHECK(h.finish() == oneshot);
  }
}

TEST_CASE("hmac-sha256 matches RFC 4231 vectors") {
  auto check = [](std::vector<std::uint8_t> key, std::string_view msg,
                  std::string_view want) {
    auto mac = hash::hmac_sha256(
        key, {reinterpret_cast<const std::uint8_t*>(msg.data()), msg.size()});
    CHECK(to_hex(mac) == want);
  };
  check(std::vector<std::uint8_t>(20, 0x0b), "Hi There",
        "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7");
  check({'J', 'e', 'f', 'e'}, "what do ya want for nothing?",
        "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
  check(std::vector<std::uint8_t>(20, 0xaa),
        std::string(50, static_cast<char>(0xdd)),
        "773ea91e36800e46854db8ebd09181a72959098b3ef8c122d9635514ced565fe");
  // Key longer than the block size is hashed first.
  check(std::vector<std::uint8_t>(131, 0xaa),
        "Test Using Larger Than Block-Size Key - Hash Key First",
        "60e431591ee0b67f0d8a26aacbf5b77f8e0bc6213728c5140546040f0ee37f54");
}

TEST_CASE("prf golden block") {
  // Frozen from the reference implementation behind golden/generate.py.
  const auto key = key_from_hex("000102030405060708090a0b0c0d0e0f");
  const Nonce nonce{1600041600, 0};
  CHECK(to_hex(prf(key, nonce)) ==
        "c10dc0027479cd573f26d46bc34e57247407dca7db1059f7c30f940b5bb49a72");
}

TEST_CASE("prf is deterministic and nonce-sensitive") {
  const auto key = key_from_hex("000102030405060708090a0b0c0d0e0f");
  const Nonce a{1600041600, 0};
  const Nonce b{1600041600, 1};
  CHECK(prf(key, a) == prf(key, a));
  CHECK(prf(key, a) != prf(key, b));
}

TEST_CASE("nonce serialization is 8-byte big-endian timestamp then state") {
  const auto bytes = nonce_bytes(Nonce{0x0102030405060708ull, 4});
  CHECK(to_hex(bytes) == "010203040506070804");
  CHECK_THROWS_AS(nonce_bytes(Nonce{0, 5}), ValidationError);
}

TEST_CASE("length_match word sums") {
  const ModulusParams params;  // 2^32

  SUBCASE("all-zero block") {
    std::vector<std::uint8_t> zeros(32, 0);
    CHECK(length_match(zeros, params).value == 0);
  }
  SUBCASE("eight repetitions of 01 00 00 00") {
    std::vector<std::uint8_t> block;
    for (int i = 0; i < 8; ++i) {
      block.push_back(0x01);
      block.push_back(0x00);
      block.push_back(0x00);
      block.push_back(0x00);
    }
    CHECK(length_match(block, params).value == 0x08000000u);
  }
  SUBCASE("golden block reduces to the golden pad") {
    const auto block = from_hex(
        "c10dc0027479cd573f26d46bc34e57247407dca7db1059f7c30f940b5bb49a72");
    CHECK(length_match(block, params).value == 0xa5d91e03u);
  }
  SUBCASE("final partial word is zero-padded on the right") {
    // mu = 48: five full words cover 240 bits, the last 16 bits become
    // the high bits of a sixth word.
    const auto p48 = ModulusParams::from_bits(48);
    std::vector<std::uint8_t> block(32, 0);
    block[30] = 0xab;
    block[31] = 0xcd;
    CHECK(length_match(block, p48).value == 0xabcd00000000ull);
  }
  SUBCASE("mu = 64 wraps modulo 2^64") {
    const auto p64 = ModulusParams::from_bits(64);
    std::vector<std::uint8_t> block(32, 0xff);
    // Four words of 2^64-1 sum to 2^64-4 mod 2^64.
    CHECK(length_match(block, p64).value == ~std::uint64_t{0} - 3);
  }
}

TEST_CASE("length_match output passes a chi-square uniformity smoke test") {
  const ModulusParams params;
  std::mt19937_64 rng(2024);
  constexpr int kSamples = 10000;
  constexpr int kBuckets = 256;
  std::array<int, kBuckets> counts{};
  std::vector<std::uint8_t> block(32);
  for (int i = 0; i < kSamples; ++i) {
    for (auto& b : block) b = static_cast<std::uint8_t>(rng());
    counts[length_match(block, params).value >> 24] += 1;
  }
  const double expected = double(kSamples) / kBuckets;
  double chi2 = 0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 255 degrees of freedom: mean 255, sigma ~22.6. Not a security proof.
  CHECK(chi2 < 400.0);
}

TEST_CASE("golden vectors: pad and encrypt of v=1") {
  const ModulusParams params;
  for (const GoldenLine& line : load_golden()) {
    CAPTURE(key_to_hex(line.key));
    CAPTURE(line.nonce.timestamp);
    CHECK(pad(line.key, line.nonce, params).value == line.pad_value);
    CHECK(encrypt(1, line.key, line.nonce, params).value ==
          line.cipher_value);
    CHECK(decrypt(Ciphertext{line.cipher_value}, line.key, line.nonce,
                  params) == 1);
  }
}

TEST_CASE("generate_key") {
  auto k128 = generate_key(128);
  CHECK(k128.bytes.size() == 16);
  auto k256 = generate_key(256);
  CHECK(k256.bytes.size() == 32);
  CHECK(generate_key(128).bytes != generate_key(128).bytes);
  CHECK_THROWS_AS(generate_key(77), ValidationError);
}

TEST_CASE("encrypt edge cases") {
  const ModulusParams params;
  const auto key = key_from_hex("000102030405060708090a0b0c0d0e0f");
  const Nonce nonce{1600041600, 0};

  SUBCASE("v = 0 yields the pad itself") {
    CHECK(encrypt(0, key, nonce, params).value ==
          pad(key, nonce, params).value);
  }
  SUBCASE("modular wraparound") {
    // Choose a nonce/key whose pad is known and add across the modulus.
    const std::uint64_t p = pad(key, nonce, params).value;
    const std::uint64_t v = (std::uint64_t{1} << 32) - p + 2;  // v + p = M+2
    if (v < (std::uint64_t{1} << 32)) {
      CHECK(encrypt(v, key, nonce, params).value == 2);
    }
  }
  SUBCASE("plaintext out of range is rejected") {
    CHECK_THROWS_AS(encrypt(std::uint64_t{1} << 32, key, nonce, params),
                    ValidationError);
  }
  SUBCASE("ciphertext equal to pad decrypts to zero") {
    CHECK(decrypt(Ciphertext{pad(key, nonce, params).value}, key, nonce,
                  params) == 0);
  }
}

TEST_CASE("roundtrip identity for 10,000 random values") {
  const ModulusParams params;
  std::mt19937_64 rng(99);
  const auto key = generate_key(128);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t v = params.reduce(rng());
    const Nonce nonce{rng(), static_cast<std::uint8_t>(rng() % 5)};
    CHECK(decrypt(encrypt(v, key, nonce, params), key, nonce, params) == v);
  }
}

TEST_CASE("wrong key fails to decrypt almost surely") {
  const ModulusParams params;
  std::mt19937_64 rng(7);
  const auto key = generate_key(128);
  const auto wrong = generate_key(128);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t v = params.reduce(rng());
    const Nonce nonce{rng(), static_cast<std::uint8_t>(rng() % 5)};
    if (decrypt(encrypt(v, key, nonce, params), wrong, nonce, params) != v)
      ++mismatches;
  }
  CHECK(mismatches >= 990);
}

TEST_CASE("distinct keys give distinct pads") {
  const ModulusParams params;
  std::mt19937_64 rng(11);
  const auto k1 = generate_key(128);
  const auto k2 = generate_key(128);
  int distinct = 0;
  for (int i = 0; i < 1000; ++i) {
    const Nonce nonce{rng(), static_cast<std::uint8_t>(rng() % 5)};
    if (pad(k1, nonce, params).value != pad(k2, nonce, params).value)
      ++distinct;
  }
  CHECK(distinct >= 990);
}

TEST_CASE("pad composition and determinism") {
  const ModulusParams params;
  const auto key = key_from_hex("ffeeddccbbaa99887766554433221100");
  const Nonce nonce{1600041660, 1};
  CHECK(pad(key, nonce, params) == length_match(prf(key, nonce), params));
  CHECK(pad(key, nonce, params) == pad(key, nonce, params));
}

TEST_CASE("combine") {
  const ModulusParams params;

  SUBCASE("identity") {
    const Ciphertext c{12345};
    const std::uint64_t w[] = {1};
    const Ciphertext cs[] = {c};
    CHECK(combine(cs, w, params) == c);
  }
  SUBCASE("empty sum is zero") {
    CHECK(combine({}, {}, params).value == 0);
  }
  SUBCASE("length mismatch rejected") {
    const Ciphertext cs[] = {Ciphertext{1}, Ciphertext{2}};
    const std::uint64_t w[] = {1};
    CHECK_THROWS_AS(combine(cs, w, params), ValidationError);
  }
  SUBCASE("order independence") {
    std::mt19937_64 rng(5);
    std::vector<Ciphertext> cs;
    for (int i = 0; i < 20; ++i) cs.push_back(Ciphertext{params.reduce(rng())});
    auto forward = combine(cs, params);
    std::reverse(cs.begin(), cs.end());
    CHECK(combine(cs, params) == forward);
  }
}

TEST_CASE("weighted two-key aggregate: c1 + 2*c2 decrypts to v1 + 2*v2") {
  const ModulusParams params;
  std::mt19937_64 rng(17);
  const auto k1 = generate_key(128);
  const auto k2 = generate_key(128);
  for (int trial = 0; trial < 100; ++trial) {
    const std::uint64_t v1 = rng() % 1000;
    const std::uint64_t v2 = rng() % 1000;
    const Nonce n1{rng(), 0};
    const Nonce n2{rng(), 0};
    const Ciphertext cs[] = {encrypt(v1, k1, n1, params),
                             encrypt(v2, k2, n2, params)};
    const std::uint64_t w[] = {1, 2};
    const Ciphertext c = combine(cs, w, params);
    const std::pair<SecretKey, Nonce> kn[] = {{k1, n1}, {k2, n2}};
    const std::uint64_t v =
        params.sub(c.value, pad_sum(kn, w, params).value);
    CHECK(v == v1 + 2 * v2);
  }
}

TEST_CASE("group decryption matches the plaintext oracle for 10 users") {
  const ModulusParams params;
  std::mt19937_64 rng(23);
  std::vector<SecretKey> keys;
  for (int i = 0; i < 10; ++i) keys.push_back(generate_key(128));

  for (int trial = 0; trial < 20; ++trial) {
    const Nonce nonce{rng(), static_cast<std::uint8_t>(trial % 5)};
    std::vector<Ciphertext> cs;
    std::vector<std::pair<SecretKey, Nonce>> kn;
    std::uint64_t oracle = 0;  // brute-force plaintext sum
    for (const auto& key : keys) {
      const std::uint64_t v = rng() % 2;
      oracle += v;
      cs.push_back(encrypt(v, key, nonce, params));
      kn.emplace_back(key, nonce);
    }
    const std::uint64_t got =
        params.sub(combine(cs, params).value, pad_sum(kn, params).value);
    CHECK(got == oracle);
  }
}

TEST_CASE("homomorphism property: random weighted vectors vs oracle") {
  const ModulusParams params;
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    std::vector<Ciphertext> cs;
    std::vector<std::pair<SecretKey, Nonce>> kn;
    std::vector<std::uint64_t> weights;
    std::uint64_t oracle = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto key = generate_key(128);
      const Nonce nonce{rng(), static_cast<std::uint8_t>(rng() % 5)};
      const std::uint64_t v = rng() % 1000;
      const std::uint64_t w = rng() % 16;
      oracle += w * v;
      cs.push_back(encrypt(v, key, nonce, params));
      kn.emplace_back(key, nonce);
      weights.push_back(w);
    }
    const std::uint64_t got = params.sub(
        combine(cs, weights, params).value, pad_sum(kn, weights, params).value);
    CHECK(got == params.reduce(oracle));
  }
}

TEST_CASE("pad_sum single entry equals pad") {
  const ModulusParams params;
  const auto key = key_from_hex("000102030405060708090a0b0c0d0e0f");
  const Nonce nonce{42, 2};
  const std::pair<SecretKey, Nonce> kn[] = {{key, nonce}};
  CHECK(pad_sum(kn, params).value == pad(key, nonce, params).value);
}

TEST_CASE("ciphertext wire form is mu/8 big-endian bytes") {
  const ModulusParams params;
  const Ciphertext c{0x0a0b0c0d};
  CHECK(cipher_to_hex(c, params) == "0a0b0c0d");
  CHECK(cipher_from_hex("0a0b0c0d", params) == c);
  CHECK_THROWS_AS(cipher_from_hex("0a0b0c", params), ValidationError);
  CHECK_THROWS_AS(ModulusParams::from_bits(12).cipher_bytes(),
                  ValidationError);
}

TEST_CASE("modulus params validation") {
  CHECK_THROWS_AS(ModulusParams::from_modulus(12), ValidationError);
  CHECK_THROWS_AS(ModulusParams::from_modulus(1), ValidationError);
  CHECK_THROWS_AS(ModulusParams::from_bits(0), ValidationError);
  CHECK_THROWS_AS(ModulusParams::from_bits(65), ValidationError);
  CHECK(ModulusParams::from_modulus(256).bits() == 8);
  CHECK(ModulusParams().bits() == 32);
  CHECK(ModulusParams::from_bits(64).mask() == ~std::uint64_t{0});
}
