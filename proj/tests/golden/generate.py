#!/usr/bin/env python3
"""Regenerates the golden test vectors from an independent reference.

Uses Python's hmac/hashlib as the reference PRF so the C++ implementation
is checked against an implementation it shares no code with. Output files
are committed; rerun only if the wire formats change.

  vectors.txt  lines of: key_hex nonce_hex pad_hex cipher_hex
               (plaintext is fixed to 1 for every cipher entry)
  record.hex   line 1: record without squares, line 2: with squares
"""

import hashlib
import hmac
import struct

M_BITS = 32
M = 1 << M_BITS


def nonce_bytes(timestamp: int, state_index: int) -> bytes:
    assert 0 <= state_index <= 4
    return struct.pack(">QB", timestamp, state_index)


def prf(key: bytes, nonce: bytes) -> bytes:
    return hmac.new(key, nonce, hashlib.sha256).digest()


def length_match(block: bytes, mu: int = M_BITS) -> int:
    assert mu % 8 == 0
    word_bytes = mu // 8
    total = 0
    for i in range(0, len(block), word_bytes):
        word = block[i:i + word_bytes]
        word = word + b"\x00" * (word_bytes - len(word))
        total = (total + int.from_bytes(word, "big")) % (1 << mu)
    return total


def pad(key: bytes, timestamp: int, state_index: int) -> int:
    return length_match(prf(key, nonce_bytes(timestamp, state_index)))


def encrypt(v: int, key: bytes, timestamp: int, state_index: int) -> int:
    return (v + pad(key, timestamp, state_index)) % M


KEYS = [
    bytes.fromhex("000102030405060708090a0b0c0d0e0f"),
    bytes.fromhex("ffeeddccbbaa99887766554433221100"),
    bytes.fromhex(
        "000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f"),
]

NONCES = [
    (1600041600, 0),
    (1600041600, 4),
    (1600041660, 1),
    (1, 0),
    (0xFFFFFFFFFFFFFFFF, 3),
]


def main() -> None:
    lines = []
    for key in KEYS:
        for ts, state in NONCES:
            p = pad(key, ts, state)
            c = encrypt(1, key, ts, state)
            lines.append("%s %s %08x %08x" %
                         (key.hex(), nonce_bytes(ts, state).hex(), p, c))
    with open("vectors.txt", "w") as f:
        f.write("\n".join(lines) + "\n")

    # The first (key, nonce) pair's raw PRF block, pasted into the unit
    # tests as a frozen constant.
    block = prf(KEYS[0], nonce_bytes(*NONCES[0]))
    print("prf block for key[0], nonce[0]:", block.hex())
    print("pad  for key[0], nonce[0]:     %08x" % pad(KEYS[0], *NONCES[0]))

    # Record wire format: flags(1) | uid_len(2 BE) | uid | ts(8 BE) |
    # 5 x 4-byte ciphertexts | optional 5 x 4-byte squares (flags bit 0).
    user = b"alice"
    ts = 1600041600
    bits = [0, 1, 0, 0, 0]  # has-visitor
    ciphers = [encrypt(bits[j], KEYS[0], ts, j) for j in range(5)]

    plain = struct.pack(">BH", 0, len(user)) + user + struct.pack(">Q", ts)
    for c in ciphers:
        plain += struct.pack(">I", c)

    squares = [5, 6, 7, 8, 9]
    flagged = struct.pack(">BH", 1, len(user)) + user + struct.pack(">Q", ts)
    for c in ciphers:
        flagged += struct.pack(">I", c)
    for s in squares:
        flagged += struct.pack(">I", s)

    with open("record.hex", "w") as f:
        f.write(plain.hex() + "\n" + flagged.hex() + "\n")

    print("record (no squares):", plain.hex())
    print("record (squares):   ", flagged.hex())


if __name__ == "__main__":
    main()
