#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string_view>
#include <utility>
#include <vector>

#include "gridagg/bus.hpp"
#include "gridagg/channel.hpp"
#include "gridagg/crypto.hpp"
#include "gridagg/model.hpp"
#include "gridagg/rng.hpp"

namespace gridagg {

// Identity of the aggregation code and its policy configuration.  Two
// enclaves with the same code but different substitution policies measure
// differently, so a meter attesting an enclave also pins the policy its
// data will be subject to.
struct EnclaveMeasurement {
  Sha256 digest{};

  friend bool operator==(const EnclaveMeasurement&, const EnclaveMeasurement&) = default;
};

EnclaveMeasurement measure_code(std::string_view code_identity,
                                std::span<const uint8_t> policy_encoding);

// A meter's enrollment certificate: the utility's signature over the meter
// identity and its verification key.
struct Credential {
  MeterId meter;
  Key256 verify_key{};
  Signature64 signature{};

  nlohmann::json to_json() const;
  static Credential from_json(const nlohmann::json& j);

  friend bool operator==(const Credential&, const Credential&) = default;
};

// Utility-side enrollment: issues credentials and checks them against the
// revocation list.
class UtilityProvisioning {
 public:
  explicit UtilityProvisioning(SigningKey key) : key_(std::move(key)) {}

  Credential issue(const MeterId& meter, const Key256& meter_verify_key) const;

  // Signature check plus revocation check; returns the enrolled identity.
  MeterId verify(const Credential& credential) const;

  void revoke(const MeterId& meter) { revoked_.insert(meter); }
  const Key256& public_key() const { return key_.public_key; }

  // Signature-only check for parties that hold the utility's public key
  // but not its revocation list.
  static bool check(const Credential& credential, const Key256& utility_public);

 private:
  SigningKey key_;
  std::set<MeterId> revoked_;
};

// Signed statement that an enclave with a given measurement is running and
// has bound itself to a challenge and an ephemeral key.  report_data is
// challenge (32 bytes) followed by the SHA-256 of the enclave's ephemeral
// public key.
struct Quote {
  EnclaveMeasurement measurement;
  std::array<uint8_t, 64> report_data{};
  Signature64 signature{};

  nlohmann::json to_json() const;
  static Quote from_json(const nlohmann::json& j);

  friend bool operator==(const Quote&, const Quote&) = default;
};

// Stand-in for the platform quoting service: signs quotes with a key whose
// public half every meter is provisioned with.
class AttestationAuthority {
 public:
  explicit AttestationAuthority(SigningKey key) : key_(std::move(key)) {}

  Quote sign(const EnclaveMeasurement& measurement,
             const std::array<uint8_t, 64>& report_data) const;
  const Key256& public_key() const { return key_.public_key; }

 private:
  SigningKey key_;
};

Quote issue_quote(const std::array<uint8_t, 32>& challenge, const Key256& enclave_public,
                  const EnclaveMeasurement& measurement,
                  const AttestationAuthority& authority);

// Full quote verification: authority signature, expected measurement,
// challenge freshness.  Returns the key digest the quote binds, which the
// caller must match against the ephemeral key it uses for key agreement.
Sha256 verify_quote(const Quote& quote, const EnclaveMeasurement& expected,
                    const std::array<uint8_t, 32>& challenge, const Key256& authority_public);

// Derives the shared channel keys from a completed key agreement.  When
// remote_key_binding is given (the digest a verified quote bound), the
// remote public key must hash to it — this is what stops an attacker from
// swapping in their own key after attestation.
SessionKeys derive_session_keys(const DhKey& local, const Key256& remote_public,
                                const Sha256& transcript_hash, uint32_t established_slot,
                                const std::optional<Sha256>& remote_key_binding = std::nullopt);

// Key-confirmation value proving both ends derived the same channel key.
std::array<uint8_t, 16> key_confirmation(const SessionKeys& keys,
                                         const Sha256& transcript_hash);

enum class HandshakeState {
  Identify,
  CredentialVerified,
  Challenged,
  QuoteVerified,
  KeysEstablished,
};

std::string_view handshake_state_name(HandshakeState s);

// The attestation-facing surface of the aggregation enclave: produce an
// ephemeral key for a session, and complete the session once the meter has
// confirmed the derived keys.
class EnclaveEndpoint {
 public:
  virtual ~EnclaveEndpoint() = default;
  virtual EnclaveMeasurement measurement() const = 0;
  virtual Key256 begin_session(const MeterId& meter) = 0;
  // Throws KeyConfirmationFailed if confirm does not match the keys the
  // enclave derived.
  virtual void finish_session(const MeterId& meter, const Key256& meter_public,
                              const Sha256& transcript_hash,
                              const std::array<uint8_t, 16>& confirm, uint32_t slot_j) = 0;
};

// Message payload codecs for the handshake kinds.
Bytes identify_payload(const Credential& credential);
Credential parse_identify(std::span<const uint8_t> payload);
Bytes cred_ok_payload(const MeterId& meter);
Bytes challenge_payload_bytes(const std::array<uint8_t, 32>& challenge,
                              const Key256& meter_public);
std::pair<std::array<uint8_t, 32>, Key256> parse_challenge(std::span<const uint8_t> payload);
Bytes quote_payload_bytes(const Quote& quote, const Key256& enclave_public);
std::pair<Quote, Key256> parse_quote_payload(std::span<const uint8_t> payload);
Bytes attest_ok_payload_bytes(const std::array<uint8_t, 16>& confirm);
std::array<uint8_t, 16> parse_attest_ok(std::span<const uint8_t> payload);

// Aggregator-side handshake referee, one instance per meter session.  It
// observes every handshake message for the session — the meter's inbound
// messages and the quote it emits itself — and advances a five-state
// machine:
//
//   Identify --IDENTIFY--> CredentialVerified --CHALLENGE--> Challenged
//     --QUOTE--> QuoteVerified --ATTEST_OK--> KeysEstablished
//
// Any other (state, kind) pairing throws OutOfOrderMessage, and a failed
// step of any sort leaves the state exactly as it was.  CRED_OK is only
// ever produced, never consumed, so it is invalid as input in all states.
class Handshake {
 public:
  Handshake(const UtilityProvisioning& utility, const AttestationAuthority& authority,
            EnclaveEndpoint& enclave);

  struct Step {
    std::vector<std::pair<MsgKind, Bytes>> replies;
  };

  Step on_message(MsgKind kind, std::span<const uint8_t> payload, uint32_t slot_j);

  HandshakeState state() const { return state_; }
  const MeterId& meter() const;

 private:
  const UtilityProvisioning& utility_;
  const AttestationAuthority& authority_;
  EnclaveEndpoint& enclave_;

  HandshakeState state_ = HandshakeState::Identify;
  std::optional<MeterId> meter_;
  std::array<uint8_t, 32> challenge_{};
  Key256 meter_public_{};
  Key256 enclave_public_{};
  Bytes transcript_;
};

// Meter-side participant.  Produces the payloads the meter publishes,
// verifies the quote it receives, and ends holding the session keys.
class MeterAttestClient {
 public:
  MeterAttestClient(Credential credential, Key256 authority_public,
                    EnclaveMeasurement expected_measurement, Rng rng);

  Bytes identify();
  void on_cred_ok(std::span<const uint8_t> payload);
  Bytes challenge();
  // Verifies the quote, derives keys, and returns the ATTEST_OK payload.
  Bytes attest_ok(std::span<const uint8_t> quote_payload, uint32_t slot_j);

  bool established() const { return keys_.has_value(); }
  const SessionKeys& keys() const;

 private:
  Credential credential_;
  Key256 authority_public_;
  EnclaveMeasurement expected_;
  Rng rng_;
  Bytes transcript_;
  std::array<uint8_t, 32> challenge_value_{};
  DhKey ephemeral_{};
  std::optional<SessionKeys> keys_;
};

}  // namespace gridagg
