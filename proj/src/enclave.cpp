#include "gridagg/enclave.hpp"

#include <algorithm>

#include "gridagg/errors.hpp"

namespace gridagg {

Bytes SubstitutionPolicy::encode() const {
  Bytes out = to_bytes("policy-v1");
  put_be32(out, window);
  put_be64(out, max_failed_fraction.num);
  put_be64(out, max_failed_fraction.den);
  return out;
}

void ReleaseGate::mark(uint32_t meter_index) {
  if (meter_index == 0 || meter_index > released_.size()) {
    fail(Errc::InvalidArgument, "release gate: bad meter index");
  }
  if (released_[meter_index - 1]) {
    fail(Errc::InvalidArgument,
         "billing for meter " + std::to_string(meter_index) + " already released");
  }
  released_[meter_index - 1] = true;
}

Enclave::Enclave(std::string code_identity, SubstitutionPolicy policy,
                 std::vector<MeterId> roster, uint32_t t, uint32_t slot_duration_s,
                 uint64_t v_max, const Rng& rng)
    : code_identity_(std::move(code_identity)),
      policy_(policy),
      roster_(std::move(roster)),
      t_(t),
      slot_duration_s_(slot_duration_s),
      v_max_(v_max),
      rng_(rng.fork("enclave")),
      gate_(static_cast<uint32_t>(roster_.size())) {
  if (roster_.empty()) fail(Errc::InvalidArgument, "empty roster");
  if (t_ == 0) fail(Errc::InvalidArgument, "period needs at least one slot");
  if (policy_.window == 0) fail(Errc::InvalidArgument, "substitution window must be positive");
  if (v_max_ == 0) fail(Errc::InvalidArgument, "v_max must be positive");
  region_ = roster_.front().region;
  for (size_t i = 0; i < roster_.size(); ++i) {
    if (roster_[i].region != region_ || roster_[i].index != i + 1) {
      fail(Errc::InvalidArgument, "roster must be meters 1..n of one region");
    }
  }
}

EnclaveMeasurement Enclave::measurement() const {
  return measure_code(code_identity_, policy_.encode());
}

uint32_t Enclave::roster_index(const MeterId& meter) const {
  if (meter.region != region_ || meter.index == 0 || meter.index > roster_.size()) {
    return 0;
  }
  return meter.index;
}

Key256 Enclave::begin_session(const MeterId& meter) {
  uint32_t index = roster_index(meter);
  if (index == 0) fail(Errc::InvalidArgument, meter.to_string() + " is not enrolled here");
  Key256 seed{};
  rng_.fork("session/" + meter.to_string() + "/" + std::to_string(session_counter_++))
      .fill(seed);
  DhKey key = DhKey::from_seed(seed);
  pending_dh_[index] = key;
  return key.public_key;
}

void Enclave::finish_session(const MeterId& meter, const Key256& meter_public,
                             const Sha256& transcript_hash,
                             const std::array<uint8_t, 16>& confirm, uint32_t slot_j) {
  uint32_t index = roster_index(meter);
  if (index == 0) fail(Errc::InvalidArgument, meter.to_string() + " is not enrolled here");
  auto pending = pending_dh_.find(index);
  if (pending == pending_dh_.end()) {
    fail(Errc::InvalidArgument, "no handshake in flight for " + meter.to_string());
  }
  SessionKeys keys =
      derive_session_keys(pending->second, meter_public, transcript_hash, slot_j);
  if (key_confirmation(keys, transcript_hash) != confirm) {
    fail(Errc::KeyConfirmationFailed, "confirmation from " + meter.to_string());
  }
  pending_dh_.erase(pending);

  // Re-attestation rotates keys but keeps period accumulators.
  auto [it, inserted] = sessions_.try_emplace(index);
  it->second.keys = keys;
  it->second.last_counter = 0;
  if (inserted) it->second.history.reserve(policy_.window);
}

bool Enclave::session_established(const MeterId& meter) const {
  uint32_t index = roster_index(meter);
  return index != 0 && sessions_.contains(index);
}

void Enclave::push_history(MeterState& state, uint64_t wh) {
  if (state.history_len < policy_.window) {
    state.history.push_back(wh);
    ++state.history_len;
    state.history_head = state.history_len % policy_.window;
  } else {
    state.history[state.history_head] = wh;
    state.history_head = (state.history_head + 1) % policy_.window;
  }
}

std::optional<uint64_t> Enclave::substitute(const MeterState& state) const {
  if (state.history_len == 0) return std::nullopt;
  uint64_t sum = 0;
  for (uint32_t i = 0; i < state.history_len; ++i) {
    sum = checked_add(sum, state.history[i]);
  }
  return sum / state.history_len;
}

void Enclave::ingest(const EncryptedMeasurement& em) {
  uint32_t index = roster_index(em.meter);
  auto it = index == 0 ? sessions_.end() : sessions_.find(index);
  if (it == sessions_.end()) {
    fail(Errc::UnknownSession, "no session for " + em.meter.to_string());
  }
  MeterState& state = it->second;
  if (em.slot.j < current_slot_) {
    fail(Errc::SlotAlreadyClosed, "slot " + std::to_string(em.slot.j) + " already closed");
  }
  if (em.slot.j > current_slot_) {
    fail(Errc::WrongSlot, "slot " + std::to_string(em.slot.j) + " is not open yet");
  }
  if (state.pending) {
    fail(Errc::DuplicateSlot,
         em.meter.to_string() + " already reported slot " + std::to_string(em.slot.j));
  }
  MeasurementValue value = open_measurement(em, state.keys, state.last_counter);
  validate_measurement(value.wh, v_max_);
  uint64_t billing = checked_add(state.billing_wh, value.wh);

  state.last_counter = em.counter();
  state.pending = true;
  state.pending_wh = value.wh;
  state.billing_wh = billing;
  push_history(state, value.wh);
}

AggregateRecord Enclave::close_slot(uint32_t slot_j) {
  if (slot_j == 0 || slot_j > t_) {
    fail(Errc::WrongSlot, "slot " + std::to_string(slot_j) + " outside 1.." + std::to_string(t_));
  }
  if (slot_j < current_slot_) {
    fail(Errc::SlotAlreadyClosed, "slot " + std::to_string(slot_j) + " already closed");
  }
  if (slot_j > current_slot_) {
    fail(Errc::WrongSlot, "slot " + std::to_string(current_slot_) + " must close first");
  }

  uint32_t n = static_cast<uint32_t>(roster_.size());
  uint32_t failed = 0;
  for (uint32_t index = 1; index <= n; ++index) {
    auto it = sessions_.find(index);
    if (it == sessions_.end() || !it->second.pending) ++failed;
  }

  AggregateRecord record;
  record.slot = TimeSlot{slot_j, slot_duration_s_};
  record.contributing = n - failed;

  bool over_threshold = policy_.max_failed_fraction.exceeded_by(failed, n);
  bool substitutable = true;
  uint64_t sum = 0;
  if (!over_threshold) {
    for (uint32_t index = 1; index <= n && substitutable; ++index) {
      auto it = sessions_.find(index);
      if (it != sessions_.end() && it->second.pending) {
        sum = checked_add(sum, it->second.pending_wh);
      } else if (it != sessions_.end()) {
        if (auto sub = substitute(it->second); sub.has_value()) {
          sum = checked_add(sum, *sub);
        } else {
          substitutable = false;
        }
      } else {
        substitutable = false;  // never-connected meter has no history
      }
    }
  }

  if (over_threshold || !substitutable) {
    record.flagged = true;
    record.sum_wh = 0;
    record.substituted = 0;
  } else {
    record.flagged = false;
    record.sum_wh = sum;
    record.substituted = failed;
  }

  for (auto& [index, state] : sessions_) {
    state.pending = false;
    state.pending_wh = 0;
  }
  ++current_slot_;
  ++closed_count_;
  return record;
}

std::vector<BillingRecord> Enclave::close_period() {
  if (closed_count_ != t_) {
    fail(Errc::PeriodIncomplete, std::to_string(closed_count_) + " of " + std::to_string(t_) +
                                     " slots closed");
  }
  std::vector<BillingRecord> records;
  records.reserve(roster_.size());
  for (uint32_t index = 1; index <= roster_.size(); ++index) {
    gate_.mark(index);
    uint64_t total = 0;
    if (auto it = sessions_.find(index); it != sessions_.end()) total = it->second.billing_wh;
    records.push_back(BillingRecord{roster_[index - 1], period_, total});
  }

  for (auto& [index, state] : sessions_) {
    state.billing_wh = 0;
    state.pending = false;
    state.pending_wh = 0;
    state.history.clear();
    state.history_len = 0;
    state.history_head = 0;
  }
  closed_count_ = 0;
  current_slot_ = 1;
  ++period_;
  gate_.reset();
  return records;
}

size_t Enclave::footprint_per_meter_bytes() const {
  // Fixed state plus the history ring's reserved capacity.
  return sizeof(MeterState) + size_t{policy_.window} * sizeof(uint64_t);
}

}  // namespace gridagg
