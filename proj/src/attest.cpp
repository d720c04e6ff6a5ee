#include "gridagg/attest.hpp"

#include "json_guard.hpp"

#include <algorithm>

#include "gridagg/errors.hpp"

namespace gridagg {

namespace {

constexpr std::string_view kMeasurementContext = "measurement-v1";
constexpr std::string_view kCredentialContext = "meter-credential-v1";
constexpr std::string_view kChannelContext = "channel-v1";
constexpr std::string_view kConfirmContext = "confirm-v1";

template <size_t N>
std::array<uint8_t, N> fixed_bytes(const nlohmann::json& j, const char* field) {
  Bytes raw = base64_decode(j.at(field).get<std::string>());
  if (raw.size() != N) {
    fail(Errc::ParseError, std::string(field) + " must be " + std::to_string(N) + " bytes");
  }
  std::array<uint8_t, N> out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

nlohmann::json parse_payload(std::span<const uint8_t> payload) {
  nlohmann::json j = nlohmann::json::parse(payload.begin(), payload.end(), nullptr, false);
  if (j.is_discarded()) fail(Errc::ParseError, "payload is not valid JSON");
  return j;
}

Bytes credential_signed_bytes(const MeterId& meter, const Key256& verify_key) {
  Bytes msg = to_bytes(kCredentialContext);
  Bytes id = meter_id_bytes(meter);
  msg.insert(msg.end(), id.begin(), id.end());
  msg.insert(msg.end(), verify_key.begin(), verify_key.end());
  return msg;
}

Bytes quote_signed_bytes(const EnclaveMeasurement& measurement,
                         const std::array<uint8_t, 64>& report_data) {
  Bytes msg(measurement.digest.begin(), measurement.digest.end());
  msg.insert(msg.end(), report_data.begin(), report_data.end());
  return msg;
}

}  // namespace

EnclaveMeasurement measure_code(std::string_view code_identity,
                                std::span<const uint8_t> policy_encoding) {
  uint8_t sep = 0;
  Sha256 digest = sha256_concat(
      {as_span(kMeasurementContext), as_span(code_identity), {&sep, 1}, policy_encoding});
  return EnclaveMeasurement{digest};
}

nlohmann::json Credential::to_json() const {
  return {{"meter", meter_to_json(meter)},
          {"verify_key", base64_encode(verify_key)},
          {"signature", base64_encode(signature)}};
}

Credential Credential::from_json(const nlohmann::json& j) {
  return decode_json("credential", [&] {
    Credential c;
    c.meter = meter_from_json(j.at("meter"));
    c.verify_key = fixed_bytes<32>(j, "verify_key");
    c.signature = fixed_bytes<64>(j, "signature");
    return c;
  });
}

Credential UtilityProvisioning::issue(const MeterId& meter,
                                      const Key256& meter_verify_key) const {
  Credential c;
  c.meter = meter;
  c.verify_key = meter_verify_key;
  c.signature = key_.sign(credential_signed_bytes(meter, meter_verify_key));
  return c;
}

bool UtilityProvisioning::check(const Credential& credential, const Key256& utility_public) {
  return verify_signature(utility_public,
                          credential_signed_bytes(credential.meter, credential.verify_key),
                          credential.signature);
}

MeterId UtilityProvisioning::verify(const Credential& credential) const {
  if (!check(credential, key_.public_key)) {
    fail(Errc::BadSignature, "credential for " + credential.meter.to_string());
  }
  if (revoked_.contains(credential.meter)) {
    fail(Errc::Revoked, credential.meter.to_string() + " is revoked");
  }
  return credential.meter;
}

nlohmann::json Quote::to_json() const {
  return {{"measurement", base64_encode(measurement.digest)},
          {"report_data", base64_encode(report_data)},
          {"signature", base64_encode(signature)}};
}

Quote Quote::from_json(const nlohmann::json& j) {
  return decode_json("quote", [&] {
    Quote q;
    q.measurement.digest = fixed_bytes<32>(j, "measurement");
    q.report_data = fixed_bytes<64>(j, "report_data");
    q.signature = fixed_bytes<64>(j, "signature");
    return q;
  });
}

Quote AttestationAuthority::sign(const EnclaveMeasurement& measurement,
                                 const std::array<uint8_t, 64>& report_data) const {
  Quote q;
  q.measurement = measurement;
  q.report_data = report_data;
  q.signature = key_.sign(quote_signed_bytes(measurement, report_data));
  return q;
}

Quote issue_quote(const std::array<uint8_t, 32>& challenge, const Key256& enclave_public,
                  const EnclaveMeasurement& measurement,
                  const AttestationAuthority& authority) {
  std::array<uint8_t, 64> report_data{};
  std::copy(challenge.begin(), challenge.end(), report_data.begin());
  Sha256 key_digest = sha256(enclave_public);
  std::copy(key_digest.begin(), key_digest.end(), report_data.begin() + 32);
  return authority.sign(measurement, report_data);
}

Sha256 verify_quote(const Quote& quote, const EnclaveMeasurement& expected,
                    const std::array<uint8_t, 32>& challenge,
                    const Key256& authority_public) {
  if (!verify_signature(authority_public,
                        quote_signed_bytes(quote.measurement, quote.report_data),
                        quote.signature)) {
    fail(Errc::BadSignature, "quote signature invalid");
  }
  if (!(quote.measurement == expected)) {
    fail(Errc::WrongMeasurement, "quote reports an unexpected enclave measurement");
  }
  if (!std::equal(challenge.begin(), challenge.end(), quote.report_data.begin())) {
    fail(Errc::StaleChallenge, "quote does not answer this challenge");
  }
  Sha256 bound{};
  std::copy(quote.report_data.begin() + 32, quote.report_data.end(), bound.begin());
  return bound;
}

SessionKeys derive_session_keys(const DhKey& local, const Key256& remote_public,
                                const Sha256& transcript_hash, uint32_t established_slot,
                                const std::optional<Sha256>& remote_key_binding) {
  if (remote_key_binding.has_value() && sha256(remote_public) != *remote_key_binding) {
    fail(Errc::DigestMismatch, "remote key does not match the digest bound in the quote");
  }
  Key256 shared = dh_shared(local, remote_public);
  Sha256 okm = sha256_concat({as_span(kChannelContext), shared, transcript_hash});
  SessionKeys keys;
  std::copy_n(okm.begin(), keys.channel_key.size(), keys.channel_key.begin());
  std::copy_n(okm.begin() + keys.channel_key.size(), keys.session_id.size(),
              keys.session_id.begin());
  keys.established_slot = established_slot;
  return keys;
}

std::array<uint8_t, 16> key_confirmation(const SessionKeys& keys,
                                         const Sha256& transcript_hash) {
  Sha256 full = sha256_concat(
      {as_span(kConfirmContext), keys.channel_key, keys.session_id, transcript_hash});
  std::array<uint8_t, 16> confirm{};
  std::copy_n(full.begin(), confirm.size(), confirm.begin());
  return confirm;
}

std::string_view handshake_state_name(HandshakeState s) {
  switch (s) {
    case HandshakeState::Identify: return "Identify";
    case HandshakeState::CredentialVerified: return "CredentialVerified";
    case HandshakeState::Challenged: return "Challenged";
    case HandshakeState::QuoteVerified: return "QuoteVerified";
    case HandshakeState::KeysEstablished: return "KeysEstablished";
  }
  return "?";
}

Bytes identify_payload(const Credential& credential) {
  return to_bytes(nlohmann::json{{"credential", credential.to_json()}}.dump());
}

Credential parse_identify(std::span<const uint8_t> payload) {
  return decode_json("IDENTIFY payload", [&] {
    return Credential::from_json(parse_payload(payload).at("credential"));
  });
}

Bytes cred_ok_payload(const MeterId& meter) {
  return to_bytes(nlohmann::json{{"meter", meter_to_json(meter)}}.dump());
}

Bytes challenge_payload_bytes(const std::array<uint8_t, 32>& challenge,
                              const Key256& meter_public) {
  return to_bytes(nlohmann::json{{"challenge", base64_encode(challenge)},
                                 {"meter_pub", base64_encode(meter_public)}}
                      .dump());
}

std::pair<std::array<uint8_t, 32>, Key256> parse_challenge(std::span<const uint8_t> payload) {
  return decode_json("CHALLENGE payload", [&]() -> std::pair<std::array<uint8_t, 32>, Key256> {
    nlohmann::json j = parse_payload(payload);
    return {fixed_bytes<32>(j, "challenge"), fixed_bytes<32>(j, "meter_pub")};
  });
}

Bytes quote_payload_bytes(const Quote& quote, const Key256& enclave_public) {
  return to_bytes(nlohmann::json{{"quote", quote.to_json()},
                                 {"enclave_pub", base64_encode(enclave_public)}}
                      .dump());
}

std::pair<Quote, Key256> parse_quote_payload(std::span<const uint8_t> payload) {
  return decode_json("QUOTE payload", [&]() -> std::pair<Quote, Key256> {
    nlohmann::json j = parse_payload(payload);
    return {Quote::from_json(j.at("quote")), fixed_bytes<32>(j, "enclave_pub")};
  });
}

Bytes attest_ok_payload_bytes(const std::array<uint8_t, 16>& confirm) {
  return to_bytes(nlohmann::json{{"confirm", base64_encode(confirm)}}.dump());
}

std::array<uint8_t, 16> parse_attest_ok(std::span<const uint8_t> payload) {
  return decode_json("ATTEST_OK payload",
                     [&] { return fixed_bytes<16>(parse_payload(payload), "confirm"); });
}

Handshake::Handshake(const UtilityProvisioning& utility,
                     const AttestationAuthority& authority, EnclaveEndpoint& enclave)
    : utility_(utility), authority_(authority), enclave_(enclave) {}

const MeterId& Handshake::meter() const {
  if (!meter_.has_value()) fail(Errc::InvalidArgument, "no meter identified yet");
  return *meter_;
}

Handshake::Step Handshake::on_message(MsgKind kind, std::span<const uint8_t> payload,
                                      uint32_t slot_j) {
  // Each arm validates completely before touching members, so that any
  // throw leaves the machine in the state it was in.
  if (state_ == HandshakeState::Identify && kind == MsgKind::Identify) {
    Credential credential = parse_identify(payload);
    MeterId meter = utility_.verify(credential);
    Bytes reply = cred_ok_payload(meter);

    meter_ = meter;
    transcript_.insert(transcript_.end(), payload.begin(), payload.end());
    transcript_.insert(transcript_.end(), reply.begin(), reply.end());
    state_ = HandshakeState::CredentialVerified;
    return Step{{{MsgKind::CredOk, std::move(reply)}}};
  }

  if (state_ == HandshakeState::CredentialVerified && kind == MsgKind::Challenge) {
    auto [challenge, meter_public] = parse_challenge(payload);
    Key256 enclave_public = enclave_.begin_session(*meter_);
    Quote quote = issue_quote(challenge, enclave_public, enclave_.measurement(), authority_);
    Bytes reply = quote_payload_bytes(quote, enclave_public);

    challenge_ = challenge;
    meter_public_ = meter_public;
    transcript_.insert(transcript_.end(), payload.begin(), payload.end());
    state_ = HandshakeState::Challenged;
    return Step{{{MsgKind::Quote, std::move(reply)}}};
  }

  if (state_ == HandshakeState::Challenged && kind == MsgKind::Quote) {
    // The quote crosses the bus on its way to the meter; the referee
    // verifies it in transit exactly as the meter will.
    auto [quote, enclave_public] = parse_quote_payload(payload);
    Sha256 bound = verify_quote(quote, enclave_.measurement(), challenge_,
                                authority_.public_key());
    if (sha256(enclave_public) != bound) {
      fail(Errc::DigestMismatch, "enclave key does not match the digest in the quote");
    }

    enclave_public_ = enclave_public;
    transcript_.insert(transcript_.end(), payload.begin(), payload.end());
    state_ = HandshakeState::QuoteVerified;
    return Step{};
  }

  if (state_ == HandshakeState::QuoteVerified && kind == MsgKind::AttestOk) {
    std::array<uint8_t, 16> confirm = parse_attest_ok(payload);
    Sha256 transcript_hash = sha256(transcript_);
    enclave_.finish_session(*meter_, meter_public_, transcript_hash, confirm, slot_j);

    state_ = HandshakeState::KeysEstablished;
    return Step{};
  }

  fail(Errc::OutOfOrderMessage,
       std::string(kind_name(kind)) + " not valid in state " +
           std::string(handshake_state_name(state_)));
}

MeterAttestClient::MeterAttestClient(Credential credential, Key256 authority_public,
                                     EnclaveMeasurement expected_measurement, Rng rng)
    : credential_(std::move(credential)),
      authority_public_(authority_public),
      expected_(expected_measurement),
      rng_(std::move(rng)) {}

Bytes MeterAttestClient::identify() {
  Bytes payload = identify_payload(credential_);
  transcript_.insert(transcript_.end(), payload.begin(), payload.end());
  return payload;
}

void MeterAttestClient::on_cred_ok(std::span<const uint8_t> payload) {
  transcript_.insert(transcript_.end(), payload.begin(), payload.end());
}

Bytes MeterAttestClient::challenge() {
  rng_.fill(challenge_value_);
  Key256 seed{};
  rng_.fill(seed);
  ephemeral_ = DhKey::from_seed(seed);
  Bytes payload = challenge_payload_bytes(challenge_value_, ephemeral_.public_key);
  transcript_.insert(transcript_.end(), payload.begin(), payload.end());
  return payload;
}

Bytes MeterAttestClient::attest_ok(std::span<const uint8_t> quote_payload, uint32_t slot_j) {
  auto [quote, enclave_public] = parse_quote_payload(quote_payload);
  Sha256 bound = verify_quote(quote, expected_, challenge_value_, authority_public_);
  // Hash over a scratch copy so a rejected quote leaves no trace.
  Bytes full = transcript_;
  full.insert(full.end(), quote_payload.begin(), quote_payload.end());
  Sha256 transcript_hash = sha256(full);
  SessionKeys keys =
      derive_session_keys(ephemeral_, enclave_public, transcript_hash, slot_j, bound);
  std::array<uint8_t, 16> confirm = key_confirmation(keys, transcript_hash);
  transcript_ = std::move(full);
  keys_ = keys;
  return attest_ok_payload_bytes(confirm);
}

const SessionKeys& MeterAttestClient::keys() const {
  if (!keys_.has_value()) fail(Errc::InvalidArgument, "session not established");
  return *keys_;
}

}  // namespace gridagg
