#include "gridagg/bytes.hpp"

#include "gridagg/errors.hpp"

namespace gridagg {

void put_be16(Bytes& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

void put_be32(Bytes& out, uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<uint8_t>(v >> shift));
  }
}

void put_be64(Bytes& out, uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<uint8_t>(v >> shift));
  }
}

uint16_t get_be16(std::span<const uint8_t> in, size_t offset) {
  if (offset + 2 > in.size()) fail(Errc::ParseError, "short read for u16");
  return static_cast<uint16_t>(in[offset]) << 8 | in[offset + 1];
}

uint32_t get_be32(std::span<const uint8_t> in, size_t offset) {
  if (offset + 4 > in.size()) fail(Errc::ParseError, "short read for u32");
  uint32_t v = 0;
  for (size_t i = 0; i < 4; ++i) v = v << 8 | in[offset + i];
  return v;
}

uint64_t get_be64(std::span<const uint8_t> in, size_t offset) {
  if (offset + 8 > in.size()) fail(Errc::ParseError, "short read for u64");
  uint64_t v = 0;
  for (size_t i = 0; i < 8; ++i) v = v << 8 | in[offset + i];
  return v;
}

std::array<uint8_t, 4> be32(uint32_t v) {
  std::array<uint8_t, 4> out{};
  for (size_t i = 0; i < 4; ++i) out[i] = static_cast<uint8_t>(v >> (24 - 8 * i));
  return out;
}

std::array<uint8_t, 8> be64(uint64_t v) {
  std::array<uint8_t, 8> out{};
  for (size_t i = 0; i < 8; ++i) out[i] = static_cast<uint8_t>(v >> (56 - 8 * i));
  return out;
}

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

constexpr char kBase64Digits[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int base64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

}  // namespace

std::string to_hex(std::span<const uint8_t> data) {
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) fail(Errc::ParseError, "hex string has odd length");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_value(hex[i]);
    int lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) fail(Errc::ParseError, "invalid hex character");
    out.push_back(static_cast<uint8_t>(hi << 4 | lo));
  }
  return out;
}

std::string base64_encode(std::span<const uint8_t> data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    uint32_t v = data[i] << 16 | data[i + 1] << 8 | data[i + 2];
    out.push_back(kBase64Digits[v >> 18 & 0x3f]);
    out.push_back(kBase64Digits[v >> 12 & 0x3f]);
    out.push_back(kBase64Digits[v >> 6 & 0x3f]);
    out.push_back(kBase64Digits[v & 0x3f]);
  }
  size_t rest = data.size() - i;
  if (rest == 1) {
    uint32_t v = data[i] << 16;
    out.push_back(kBase64Digits[v >> 18 & 0x3f]);
    out.push_back(kBase64Digits[v >> 12 & 0x3f]);
    out.append("==");
  } else if (rest == 2) {
    uint32_t v = data[i] << 16 | data[i + 1] << 8;
    out.push_back(kBase64Digits[v >> 18 & 0x3f]);
    out.push_back(kBase64Digits[v >> 12 & 0x3f]);
    out.push_back(kBase64Digits[v >> 6 & 0x3f]);
    out.push_back('=');
  }
  return out;
}

Bytes base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) fail(Errc::ParseError, "base64 length not a multiple of 4");
  Bytes out;
  out.reserve(text.size() / 4 * 3);
  for (size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (size_t k = 0; k < 4; ++k) {
      char c = text[i + k];
      if (c == '=') {
        // Padding is only valid in the last group, trailing positions.
        if (i + 4 != text.size() || k < 2) fail(Errc::ParseError, "misplaced base64 padding");
        vals[k] = 0;
        ++pad;
      } else {
        if (pad > 0) fail(Errc::ParseError, "data after base64 padding");
        vals[k] = base64_value(c);
        if (vals[k] < 0) fail(Errc::ParseError, "invalid base64 character");
      }
    }
    uint32_t v = vals[0] << 18 | vals[1] << 12 | vals[2] << 6 | vals[3];
    out.push_back(static_cast<uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<uint8_t>(v));
  }
  return out;
}

bool constant_time_equal(std::span<const uint8_t> a, std::span<const uint8_t> b) {
  if (a.size() != b.size()) return false;
  uint8_t diff = 0;
  for (size_t i = 0; i < a.size(); ++i) diff |= a[i] ^ b[i];
  return diff == 0;
}

}  // namespace gridagg
