#pragma once

#include <array>
#include <cstdint>

#include "gridagg/bytes.hpp"
#include "gridagg/crypto.hpp"
#include "gridagg/model.hpp"

namespace gridagg {

// Keys shared by a meter and the aggregation enclave after a successful
// attestation handshake.
struct SessionKeys {
  Key128 channel_key{};
  std::array<uint8_t, 4> session_id{};
  uint32_t established_slot = 0;

  friend bool operator==(const SessionKeys&, const SessionKeys&) = default;
};

// Produces the sender-side nonce sequence for one session: 4-byte session
// id followed by a big-endian 8-byte counter starting at 1.  A nonce value
// is never handed out twice; the counter refuses to wrap.
class NonceCounter {
 public:
  explicit NonceCounter(const std::array<uint8_t, 4>& session_id)
      : session_id_(session_id) {}

  Nonce96 next();
  uint64_t last_issued() const { return counter_; }

 private:
  std::array<uint8_t, 4> session_id_;
  uint64_t counter_ = 0;
};

// One encrypted reading as it travels from meter to enclave.  The wire
// form is fixed:
//
//   meter id   := index (2 bytes BE) || region length (1 byte) || region bytes
//   frame      := meter id || slot j (4 bytes BE) || nonce (12) || ct (8) || tag (16)
//
// The 8-byte plaintext is the reading in Wh, big-endian.  Meter id and
// slot are bound as associated data, so a frame cannot be replayed for a
// different meter or slot without failing authentication.
struct EncryptedMeasurement {
  MeterId meter;
  TimeSlot slot;
  Nonce96 nonce{};
  std::array<uint8_t, 8> ciphertext{};
  Tag128 tag{};

  Bytes encode() const;
  static EncryptedMeasurement decode(std::span<const uint8_t> wire, uint32_t slot_duration_s);

  // Sender counter embedded in the nonce.
  uint64_t counter() const;
  std::array<uint8_t, 4> session_id() const;

  friend bool operator==(const EncryptedMeasurement&, const EncryptedMeasurement&) = default;
};

Bytes meter_id_bytes(const MeterId& meter);

EncryptedMeasurement seal_measurement(const MeterId& meter, MeasurementValue value,
                                      TimeSlot slot, const SessionKeys& keys,
                                      NonceCounter& nonces);

// Authenticates and decrypts one frame.  last_seen_counter is the highest
// counter accepted so far for this session; anything at or below it is a
// replay.  Throws UnknownSession / Replay / TagMismatch.
MeasurementValue open_measurement(const EncryptedMeasurement& em, const SessionKeys& keys,
                                  uint64_t last_seen_counter);

}  // namespace gridagg
