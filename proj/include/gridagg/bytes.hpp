#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gridagg {

using Bytes = std::vector<uint8_t>;

// Big-endian fixed-width integer packing.  All wire formats in this
// project are big-endian.
void put_be16(Bytes& out, uint16_t v);
void put_be32(Bytes& out, uint32_t v);
void put_be64(Bytes& out, uint64_t v);
uint16_t get_be16(std::span<const uint8_t> in, size_t offset);
uint32_t get_be32(std::span<const uint8_t> in, size_t offset);
uint64_t get_be64(std::span<const uint8_t> in, size_t offset);

std::array<uint8_t, 4> be32(uint32_t v);
std::array<uint8_t, 8> be64(uint64_t v);

// Lowercase hex.  from_hex throws Errc::ParseError on odd length or
// non-hex characters.
std::string to_hex(std::span<const uint8_t> data);
Bytes from_hex(std::string_view hex);

// Standard base64 with padding, as used for envelope payloads.
std::string base64_encode(std::span<const uint8_t> data);
Bytes base64_decode(std::string_view text);

inline std::span<const uint8_t> as_span(std::string_view s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

bool constant_time_equal(std::span<const uint8_t> a, std::span<const uint8_t> b);

}  // namespace gridagg
