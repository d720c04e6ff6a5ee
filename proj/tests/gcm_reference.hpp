#pragma once

// Self-contained AES-128-GCM, written from the FIPS-197 / SP 800-38D
// definitions with no shared code or library underneath.  It exists so the
// production channel cipher (OpenSSL-backed) can be checked against a
// second, independently derived route — a bug would have to appear in both
// implementations identically to slip through.
//
// Encrypt-only, 96-bit IVs, 16-byte tags: exactly the shape the channel
// uses.  Not constant-time, not for production use.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace gcmref {

struct Sealed {
  std::vector<uint8_t> ciphertext;
  std::array<uint8_t, 16> tag{};
};

Sealed seal(const std::array<uint8_t, 16>& key, const std::array<uint8_t, 12>& iv,
            std::span<const uint8_t> aad, std::span<const uint8_t> plaintext);

}  // namespace gcmref
