#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridagg/attest.hpp"
#include "gridagg/channel.hpp"
#include "gridagg/model.hpp"
#include "gridagg/rational.hpp"
#include "gridagg/rng.hpp"

namespace gridagg {

// Fault-tolerance policy, fixed at enclave start and bound into the
// enclave measurement so meters attest the policy along with the code.
struct SubstitutionPolicy {
  // How many of a meter's most recent real readings feed a substitute.
  uint32_t window = 3;
  // A slot is released only while failed/n stays at or below this bound.
  Rational max_failed_fraction{1, 5};

  Bytes encode() const;

  friend bool operator==(const SubstitutionPolicy&, const SubstitutionPolicy&) = default;
};

// Tracks that each meter's billing total leaves the enclave at most once
// per period.
class ReleaseGate {
 public:
  explicit ReleaseGate(uint32_t n) : released_(n, false) {}

  void mark(uint32_t meter_index);  // 1-based; throws on double release
  void reset() { released_.assign(released_.size(), false); }

 private:
  std::vector<bool> released_;
};

// The trusted aggregation core.  Everything a meter's plaintext touches
// lives inside this class: session keys, the current slot's buffered
// readings, per-meter billing accumulators, and the short history ring
// that feeds substitutes.  The host gets out only what close_slot and
// close_period return — per-slot fleet sums and per-period billing totals.
//
// Slots close in order 1..t; close_period then releases billing and
// resets for the next period.  A slot whose failed-meter fraction
// exceeds the policy bound — or where a failed meter has no history to
// substitute from — is refused: its record carries flagged=true and no sum.
class Enclave final : public EnclaveEndpoint {
 public:
  Enclave(std::string code_identity, SubstitutionPolicy policy, std::vector<MeterId> roster,
          uint32_t t, uint32_t slot_duration_s, uint64_t v_max, const Rng& rng);

  // EnclaveEndpoint
  EnclaveMeasurement measurement() const override;
  Key256 begin_session(const MeterId& meter) override;
  void finish_session(const MeterId& meter, const Key256& meter_public,
                      const Sha256& transcript_hash, const std::array<uint8_t, 16>& confirm,
                      uint32_t slot_j) override;

  // Authenticates one frame and buffers its reading for the current slot.
  void ingest(const EncryptedMeasurement& em);

  // Closes the current slot: substitutes for failed meters per policy, or
  // flags the slot.  Substitutes never touch billing accumulators.
  AggregateRecord close_slot(uint32_t slot_j);

  // Releases per-meter billing totals after all t slots closed, then
  // resets for the next period.
  std::vector<BillingRecord> close_period();

  uint32_t current_slot() const { return current_slot_; }
  uint32_t period() const { return period_; }
  bool session_established(const MeterId& meter) const;
  const SubstitutionPolicy& policy() const { return policy_; }

  // Steady-state bytes of enclave memory per enrolled meter.
  size_t footprint_per_meter_bytes() const;

 private:
  struct MeterState {
    SessionKeys keys;
    uint64_t last_counter = 0;
    uint64_t billing_wh = 0;
    bool pending = false;
    uint64_t pending_wh = 0;
    uint32_t history_len = 0;
    uint32_t history_head = 0;
    std::vector<uint64_t> history;  // ring of the last <= window real readings
  };

  uint32_t roster_index(const MeterId& meter) const;  // 0 when not enrolled
  void push_history(MeterState& state, uint64_t wh);
  std::optional<uint64_t> substitute(const MeterState& state) const;

  std::string code_identity_;
  SubstitutionPolicy policy_;
  std::vector<MeterId> roster_;
  std::string region_;
  uint32_t t_;
  uint32_t slot_duration_s_;
  uint64_t v_max_;
  Rng rng_;
  uint64_t session_counter_ = 0;

  std::map<uint32_t, DhKey> pending_dh_;      // handshake in flight, by meter index
  std::map<uint32_t, MeterState> sessions_;   // established, by meter index
  uint32_t current_slot_ = 1;
  uint32_t closed_count_ = 0;
  uint32_t period_ = 1;
  ReleaseGate gate_;
};

}  // namespace gridagg
