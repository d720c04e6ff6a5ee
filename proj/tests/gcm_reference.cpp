#include "gcm_reference.hpp"

#include <cstring>

namespace gcmref {
namespace {

// ---------------------------------------------------------------- AES-128

constexpr uint8_t kSbox[256] = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b,
    0xfe, 0xd7, 0xab, 0x76, 0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0,
    0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0, 0xb7, 0xfd, 0x93, 0x26,
    0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2,
    0xeb, 0x27, 0xb2, 0x75, 0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0,
    0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84, 0x53, 0xd1, 0x00, 0xed,
    0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f,
    0x50, 0x3c, 0x9f, 0xa8, 0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5,
    0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2, 0xcd, 0x0c, 0x13, 0xec,
    0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14,
    0xde, 0x5e, 0x0b, 0xdb, 0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c,
    0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79, 0xe7, 0xc8, 0x37, 0x6d,
    0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f,
    0x4b, 0xbd, 0x8b, 0x8a, 0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e,
    0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e, 0xe1, 0xf8, 0x98, 0x11,
    0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f,
    0xb0, 0x54, 0xbb, 0x16};

uint8_t xtime(uint8_t a) {
  return static_cast<uint8_t>((a << 1) ^ ((a & 0x80) ? 0x1b : 0x00));
}

struct RoundKeys {
  // 11 round keys of 16 bytes each, laid out flat in key-schedule order.
  uint8_t bytes[176];
};

RoundKeys expand_key(const std::array<uint8_t, 16>& key) {
  RoundKeys rk{};
  std::memcpy(rk.bytes, key.data(), 16);
  uint8_t rcon = 0x01;
  for (int i = 4; i < 44; ++i) {
    uint8_t t[4];
    std::memcpy(t, rk.bytes + 4 * (i - 1), 4);
    if (i % 4 == 0) {
      // RotWord then SubWord then Rcon on the leading byte.
      const uint8_t first = t[0];
      t[0] = static_cast<uint8_t>(kSbox[t[1]] ^ rcon);
      t[1] = kSbox[t[2]];
      t[2] = kSbox[t[3]];
      t[3] = kSbox[first];
      rcon = xtime(rcon);
    }
    for (int b = 0; b < 4; ++b) {
      rk.bytes[4 * i + b] = static_cast<uint8_t>(rk.bytes[4 * (i - 4) + b] ^ t[b]);
    }
  }
  return rk;
}

// State indexing follows FIPS-197: byte r + 4c of the block is row r,
// column c, and all transforms below are written against that layout.
void sub_bytes(uint8_t s[16]) {
  for (int i = 0; i < 16; ++i) s[i] = kSbox[s[i]];
}

void shift_rows(uint8_t s[16]) {
  uint8_t t[16];
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      t[r + 4 * c] = s[r + 4 * ((c + r) % 4)];
    }
  }
  std::memcpy(s, t, 16);
}

void mix_columns(uint8_t s[16]) {
  for (int c = 0; c < 4; ++c) {
    uint8_t* col = s + 4 * c;
    const uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
    col[0] = static_cast<uint8_t>(xtime(a0) ^ (xtime(a1) ^ a1) ^ a2 ^ a3);
    col[1] = static_cast<uint8_t>(a0 ^ xtime(a1) ^ (xtime(a2) ^ a2) ^ a3);
    col[2] = static_cast<uint8_t>(a0 ^ a1 ^ xtime(a2) ^ (xtime(a3) ^ a3));
    col[3] = static_cast<uint8_t>((xtime(a0) ^ a0) ^ a1 ^ a2 ^ xtime(a3));
  }
}

void add_round_key(uint8_t s[16], const uint8_t* rk) {
  for (int i = 0; i < 16; ++i) s[i] ^= rk[i];
}

void aes_encrypt_block(const RoundKeys& rk, const uint8_t in[16], uint8_t out[16]) {
  uint8_t s[16];
  std::memcpy(s, in, 16);
  add_round_key(s, rk.bytes);
  for (int round = 1; round <= 9; ++round) {
    sub_bytes(s);
    shift_rows(s);
    mix_columns(s);
    add_round_key(s, rk.bytes + 16 * round);
  }
  sub_bytes(s);
  shift_rows(s);
  add_round_key(s, rk.bytes + 160);
  std::memcpy(out, s, 16);
}

// ------------------------------------------------------------------ GHASH

// A 128-bit block viewed as a big-endian bit string: `hi` holds the first
// eight bytes, `lo` the last eight.
struct Block {
  uint64_t hi = 0;
  uint64_t lo = 0;
};

Block load_block(const uint8_t b[16]) {
  Block x;
  for (int i = 0; i < 8; ++i) x.hi = (x.hi << 8) | b[i];
  for (int i = 8; i < 16; ++i) x.lo = (x.lo << 8) | b[i];
  return x;
}

void store_block(const Block& x, uint8_t out[16]) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<uint8_t>(x.hi >> (56 - 8 * i));
  for (int i = 0; i < 8; ++i) out[8 + i] = static_cast<uint8_t>(x.lo >> (56 - 8 * i));
}

// GF(2^128) product per SP 800-38D algorithm 1: walk the bits of x from the
// most significant end, accumulating shifted copies of y reduced by
// R = 0xE1 << 120.
Block gf_mul(const Block& x, const Block& y) {
  Block z;
  Block v = y;
  for (int i = 0; i < 128; ++i) {
    const uint64_t bit =
        i < 64 ? (x.hi >> (63 - i)) & 1 : (x.lo >> (127 - i)) & 1;
    if (bit) {
      z.hi ^= v.hi;
      z.lo ^= v.lo;
    }
    const uint64_t lsb = v.lo & 1;
    v.lo = (v.lo >> 1) | (v.hi << 63);
    v.hi >>= 1;
    if (lsb) v.hi ^= 0xE100000000000000ULL;
  }
  return z;
}

class Ghash {
 public:
  explicit Ghash(const Block& h) : h_(h) {}

  // Absorbs data zero-padded to a whole number of blocks, as GHASH requires
  // for each of the AAD and ciphertext segments.
  void absorb_padded(std::span<const uint8_t> data) {
    size_t off = 0;
    while (off < data.size()) {
      uint8_t buf[16] = {0};
      const size_t take = std::min<size_t>(16, data.size() - off);
      std::memcpy(buf, data.data() + off, take);
      absorb_block(buf);
      off += take;
    }
  }

  void absorb_lengths(uint64_t aad_bits, uint64_t ct_bits) {
    uint8_t buf[16];
    Block lens;
    lens.hi = aad_bits;
    lens.lo = ct_bits;
    store_block(lens, buf);
    absorb_block(buf);
  }

  Block digest() const { return y_; }

 private:
  void absorb_block(const uint8_t b[16]) {
    const Block x = load_block(b);
    y_.hi ^= x.hi;
    y_.lo ^= x.lo;
    y_ = gf_mul(y_, h_);
  }

  Block h_;
  Block y_;
};

void inc32(uint8_t block[16]) {
  for (int i = 15; i >= 12; --i) {
    if (++block[i] != 0) break;
  }
}

}  // namespace

Sealed seal(const std::array<uint8_t, 16>& key, const std::array<uint8_t, 12>& iv,
            std::span<const uint8_t> aad, std::span<const uint8_t> plaintext) {
  const RoundKeys rk = expand_key(key);

  uint8_t h_block[16] = {0};
  uint8_t h_enc[16];
  aes_encrypt_block(rk, h_block, h_enc);
  const Block h = load_block(h_enc);

  // 96-bit IV: J0 = IV || 0x00000001.
  uint8_t j0[16] = {0};
  std::memcpy(j0, iv.data(), 12);
  j0[15] = 1;

  Sealed out;
  out.ciphertext.resize(plaintext.size());
  uint8_t ctr[16];
  std::memcpy(ctr, j0, 16);
  size_t off = 0;
  while (off < plaintext.size()) {
    inc32(ctr);
    uint8_t stream[16];
    aes_encrypt_block(rk, ctr, stream);
    const size_t take = std::min<size_t>(16, plaintext.size() - off);
    for (size_t i = 0; i < take; ++i) {
      out.ciphertext[off + i] = static_cast<uint8_t>(plaintext[off + i] ^ stream[i]);
    }
    off += take;
  }

  Ghash ghash(h);
  ghash.absorb_padded(aad);
  ghash.absorb_padded(out.ciphertext);
  ghash.absorb_lengths(static_cast<uint64_t>(aad.size()) * 8,
                       static_cast<uint64_t>(out.ciphertext.size()) * 8);
  uint8_t s[16];
  store_block(ghash.digest(), s);

  uint8_t ek_j0[16];
  aes_encrypt_block(rk, j0, ek_j0);
  for (int i = 0; i < 16; ++i) out.tag[i] = static_cast<uint8_t>(s[i] ^ ek_j0[i]);
  return out;
}

}  // namespace gcmref
