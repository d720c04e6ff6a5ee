#include "gridagg/channel.hpp"

#include <algorithm>
#include <limits>

#include "gridagg/errors.hpp"

namespace gridagg {

Nonce96 NonceCounter::next() {
  if (counter_ == std::numeric_limits<uint64_t>::max()) {
    fail(Errc::CounterExhausted, "nonce counter exhausted");
  }
  ++counter_;
  Nonce96 nonce{};
  std::copy(session_id_.begin(), session_id_.end(), nonce.begin());
  auto ctr = be64(counter_);
  std::copy(ctr.begin(), ctr.end(), nonce.begin() + 4);
  return nonce;
}

Bytes meter_id_bytes(const MeterId& meter) {
  if (meter.region.size() > 255) fail(Errc::InvalidArgument, "region name too long");
  if (meter.index > std::numeric_limits<uint16_t>::max()) {
    fail(Errc::InvalidArgument, "meter index too large for wire form");
  }
  Bytes out;
  put_be16(out, static_cast<uint16_t>(meter.index));
  out.push_back(static_cast<uint8_t>(meter.region.size()));
  out.insert(out.end(), meter.region.begin(), meter.region.end());
  return out;
}

namespace {

Bytes measurement_aad(const MeterId& meter, uint32_t slot_j) {
  Bytes aad = meter_id_bytes(meter);
  put_be32(aad, slot_j);
  return aad;
}

}  // namespace

Bytes EncryptedMeasurement::encode() const {
  Bytes out = meter_id_bytes(meter);
  put_be32(out, slot.j);
  out.insert(out.end(), nonce.begin(), nonce.end());
  out.insert(out.end(), ciphertext.begin(), ciphertext.end());
  out.insert(out.end(), tag.begin(), tag.end());
  return out;
}

EncryptedMeasurement EncryptedMeasurement::decode(std::span<const uint8_t> wire,
                                                  uint32_t slot_duration_s) {
  EncryptedMeasurement em;
  if (wire.size() < 3) fail(Errc::ParseError, "frame too short for meter id");
  em.meter.index = get_be16(wire, 0);
  size_t region_len = wire[2];
  size_t off = 3;
  if (wire.size() < off + region_len) fail(Errc::ParseError, "frame too short for region");
  em.meter.region.assign(wire.begin() + static_cast<ptrdiff_t>(off),
                         wire.begin() + static_cast<ptrdiff_t>(off + region_len));
  off += region_len;
  if (wire.size() != off + 4 + 12 + 8 + 16) {
    fail(Errc::ParseError, "frame length mismatch");
  }
  em.slot.j = get_be32(wire, off);
  em.slot.duration_s = slot_duration_s;
  off += 4;
  std::copy_n(wire.begin() + static_cast<ptrdiff_t>(off), em.nonce.size(), em.nonce.begin());
  off += em.nonce.size();
  std::copy_n(wire.begin() + static_cast<ptrdiff_t>(off), em.ciphertext.size(),
              em.ciphertext.begin());
  off += em.ciphertext.size();
  std::copy_n(wire.begin() + static_cast<ptrdiff_t>(off), em.tag.size(), em.tag.begin());
  return em;
}

uint64_t EncryptedMeasurement::counter() const {
  return get_be64(nonce, 4);
}

std::array<uint8_t, 4> EncryptedMeasurement::session_id() const {
  std::array<uint8_t, 4> sid{};
  std::copy_n(nonce.begin(), sid.size(), sid.begin());
  return sid;
}

EncryptedMeasurement seal_measurement(const MeterId& meter, MeasurementValue value,
                                      TimeSlot slot, const SessionKeys& keys,
                                      NonceCounter& nonces) {
  EncryptedMeasurement em;
  em.meter = meter;
  em.slot = slot;
  em.nonce = nonces.next();
  Bytes aad = measurement_aad(meter, slot.j);
  auto pt = be64(value.wh);
  aes128gcm_seal(keys.channel_key, em.nonce, aad, pt, em.ciphertext, em.tag);
  return em;
}

MeasurementValue open_measurement(const EncryptedMeasurement& em, const SessionKeys& keys,
                                  uint64_t last_seen_counter) {
  if (em.session_id() != keys.session_id) {
    fail(Errc::UnknownSession, "nonce names a different session");
  }
  if (em.counter() <= last_seen_counter) {
    fail(Errc::Replay, "counter " + std::to_string(em.counter()) + " not above " +
                           std::to_string(last_seen_counter));
  }
  Bytes aad = measurement_aad(em.meter, em.slot.j);
  std::array<uint8_t, 8> pt{};
  if (!aes128gcm_open(keys.channel_key, em.nonce, aad, em.ciphertext, em.tag, pt)) {
    fail(Errc::TagMismatch, "frame failed authentication");
  }
  return MeasurementValue{get_be64(pt, 0)};
}

}  // namespace gridagg
