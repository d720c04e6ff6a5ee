#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>

#include "gridagg/bytes.hpp"

namespace gridagg {

using Sha256 = std::array<uint8_t, 32>;
using Key128 = std::array<uint8_t, 16>;
using Nonce96 = std::array<uint8_t, 12>;
using Tag128 = std::array<uint8_t, 16>;
using Key256 = std::array<uint8_t, 32>;
using Signature64 = std::array<uint8_t, 64>;

Sha256 sha256(std::span<const uint8_t> data);
// Hash of the concatenation of several byte strings, without copying them
// into one buffer first.
Sha256 sha256_concat(std::initializer_list<std::span<const uint8_t>> parts);

// Ed25519 signing identity, deterministic from a 32-byte seed.
struct SigningKey {
  Key256 seed{};
  Key256 public_key{};

  static SigningKey from_seed(const Key256& seed);
  Signature64 sign(std::span<const uint8_t> message) const;
};

bool verify_signature(const Key256& public_key, std::span<const uint8_t> message,
                      const Signature64& signature);

// X25519 key agreement pair, deterministic from a 32-byte seed.
struct DhKey {
  Key256 secret{};
  Key256 public_key{};

  static DhKey from_seed(const Key256& seed);
};

Key256 dh_shared(const DhKey& local, const Key256& remote_public);

// AES-128-GCM with a detached 16-byte tag.  seal writes ct (same length as
// pt) and the tag; open returns false on any authentication failure and
// then leaves pt_out untouched.
void aes128gcm_seal(const Key128& key, const Nonce96& nonce,
                    std::span<const uint8_t> aad, std::span<const uint8_t> pt,
                    std::span<uint8_t> ct_out, Tag128& tag_out);
bool aes128gcm_open(const Key128& key, const Nonce96& nonce,
                    std::span<const uint8_t> aad, std::span<const uint8_t> ct,
                    const Tag128& tag, std::span<uint8_t> pt_out);

}  // namespace gridagg
