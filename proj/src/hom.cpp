#include "gridagg/hom.hpp"

#include "json_guard.hpp"

#include <algorithm>
#include <cmath>

#include "gridagg/errors.hpp"

namespace gridagg::hom {

namespace {

constexpr int kPrimeReps = 40;  // Miller-Rabin rounds; error < 4^-40

nlohmann::json parse_payload(std::span<const uint8_t> payload) {
  nlohmann::json j = nlohmann::json::parse(payload.begin(), payload.end(), nullptr, false);
  if (j.is_discarded()) fail(Errc::ParseError, "payload is not valid JSON");
  return j;
}

bool is_prime(const mpz_class& x) {
  return mpz_probab_prime_p(x.get_mpz_t(), kPrimeReps) != 0;
}

}  // namespace

mpz_class pow_mod(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

mpz_class inv_mod(const mpz_class& a, const mpz_class& mod) {
  mpz_class out;
  if (mpz_invert(out.get_mpz_t(), a.get_mpz_t(), mod.get_mpz_t()) == 0) {
    fail(Errc::InvalidArgument, "element is not invertible");
  }
  return out;
}

bool is_subgroup_element(const GroupParams& group, const mpz_class& x) {
  if (x < 1 || x >= group.p) return false;
  // For p = 2q + 1 the order-q subgroup is exactly the quadratic residues,
  // and 1 is a residue.
  return mpz_legendre(x.get_mpz_t(), group.p.get_mpz_t()) == 1;
}

GroupParams GroupParams::checked(mpz_class p, mpz_class q, mpz_class g) {
  if (p != 2 * q + 1) fail(Errc::InvalidArgument, "p != 2q + 1");
  if (!is_prime(p)) fail(Errc::InvalidArgument, "p is not prime");
  if (!is_prime(q)) fail(Errc::InvalidArgument, "q is not prime");
  GroupParams group{std::move(p), std::move(q), std::move(g)};
  if (group.g == 1 || !is_subgroup_element(group, group.g)) {
    fail(Errc::InvalidArgument, "g does not generate the order-q subgroup");
  }
  return group;
}

mpz_class random_below(Rng& rng, const mpz_class& bound) {
  if (bound <= 0) fail(Errc::InvalidArgument, "bound must be positive");
  size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  size_t nbytes = (bits + 7) / 8;
  unsigned excess = static_cast<unsigned>(nbytes * 8 - bits);
  Bytes buf(nbytes);
  for (;;) {
    rng.fill(buf);
    buf[0] &= static_cast<uint8_t>(0xff >> excess);
    mpz_class candidate;
    mpz_import(candidate.get_mpz_t(), buf.size(), 1, 1, 1, 0, buf.data());
    if (candidate < bound) return candidate;
  }
}

GroupParams setup_group(unsigned bits, Rng& rng) {
  if (bits < 4) fail(Errc::InvalidArgument, "group modulus below 4 bits");
  // Draw a random odd starting point with the top bit set, then scan odd
  // candidates upward.  Deterministic in the RNG.
  mpz_class q = random_below(rng, mpz_class(1) << (bits - 1));
  mpz_setbit(q.get_mpz_t(), bits - 2);
  mpz_setbit(q.get_mpz_t(), 0);

  constexpr unsigned kMaxAttempts = 500000;
  for (unsigned attempt = 0; attempt < kMaxAttempts; ++attempt, q += 2) {
    if (!is_prime(q)) continue;
    mpz_class p = 2 * q + 1;
    if (!is_prime(p)) continue;
    // Any square other than 1 generates the order-q subgroup.
    for (mpz_class h = 2; h < p; ++h) {
      mpz_class g = h * h % p;
      if (g != 1) return GroupParams{p, q, g};
    }
  }
  fail(Errc::PrimalitySearchExhausted,
       "no safe prime near the starting point after " + std::to_string(kMaxAttempts) +
           " candidates");
}

const GroupParams& bench_group_512() {
  static const GroupParams group = GroupParams::checked(
      mpz_from_hex("a6c72fafa2bc91ca9997bc9d3d78a133720bbe02a93c82f5e258bfd205a3b44a"
                   "30c594fdf309846e3dc63f142a65ef9345a8c9b77520b74e178f33f48ae70d67"),
      mpz_from_hex("536397d7d15e48e54ccbde4e9ebc5099b905df01549e417af12c5fe902d1da25"
                   "1862ca7ef984c2371ee31f8a1532f7c9a2d464dbba905ba70bc799fa457386b3"),
      mpz_from_hex("4221dbf7707ec3790c746b867fb460a7739cfe24e780ea23ed98f2a4718d506d"
                   "38a21572f648d47058825a15d74b09be44c4fd4fd25db3aa8b8002711eaf2375"));
  return group;
}

const GroupParams& standard_group_2048() {
  static const GroupParams group = GroupParams::checked(
      mpz_from_hex(
          "ffffffffffffffffc90fdaa22168c234c4c6628b80dc1cd129024e088a67cc74"
          "020bbea63b139b22514a08798e3404ddef9519b3cd3a431b302b0a6df25f1437"
          "4fe1356d6d51c245e485b576625e7ec6f44c42e9a637ed6b0bff5cb6f406b7ed"
          "ee386bfb5a899fa5ae9f24117c4b1fe649286651ece45b3dc2007cb8a163bf05"
          "98da48361c55d39a69163fa8fd24cf5f83655d23dca3ad961c62f356208552bb"
          "9ed529077096966d670c354e4abc9804f1746c08ca18217c32905e462e36ce3b"
          "e39e772c180e86039b2783a2ec07a28fb5c55df06f4c52c9de2bcbf695581718"
          "3995497cea956ae515d2261898fa051015728e5a8aacaa68ffffffffffffffff"),
      mpz_from_hex(
          "7fffffffffffffffe487ed5110b4611a62633145c06e0e68948127044533e63a"
          "0105df531d89cd9128a5043cc71a026ef7ca8cd9e69d218d98158536f92f8a1b"
          "a7f09ab6b6a8e122f242dabb312f3f637a262174d31bf6b585ffae5b7a035bf6"
          "f71c35fdad44cfd2d74f9208be258ff324943328f6722d9ee1003e5c50b1df82"
          "cc6d241b0e2ae9cd348b1fd47e9267afc1b2ae91ee51d6cb0e3179ab1042a95d"
          "cf6a9483b84b4b36b3861aa7255e4c0278ba3604650c10be19482f23171b671d"
          "f1cf3b960c074301cd93c1d17603d147dae2aef837a62964ef15e5fb4aac0b8c"
          "1ccaa4be754ab5728ae9130c4c7d02880ab9472d455655347fffffffffffffff"),
      4);
  return group;
}

std::string mpz_to_hex(const mpz_class& x) {
  if (x < 0) fail(Errc::InvalidArgument, "negative value has no wire form");
  return x.get_str(16);
}

mpz_class mpz_from_hex(const std::string& hex) {
  if (hex.empty()) fail(Errc::ParseError, "empty hex value");
  for (char c : hex) {
    bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    if (!ok) fail(Errc::ParseError, "invalid hex character in group element");
  }
  mpz_class out;
  if (mpz_set_str(out.get_mpz_t(), hex.c_str(), 16) != 0) {
    fail(Errc::ParseError, "unparseable hex value");
  }
  return out;
}

ProducerKeys gen_producer_keys(const GroupParams& group, Credential cert, Rng& rng) {
  mpz_class x = random_below(rng, group.q - 1) + 1;  // x in [1, q-1]
  mpz_class y = pow_mod(group.g, x, group.p);
  return ProducerKeys{std::move(x), std::move(y), std::move(cert)};
}

namespace {

EncryptResult encrypt_with(uint64_t v, const AggregatePublicKey& key,
                           const GroupParams& group, mpz_class z, const mpz_class& r) {
  mpz_class e = (mpz_class(v) + z) % group.q;
  HomCiphertext ct;
  ct.c = pow_mod(group.g, r, group.p);
  ct.d = pow_mod(group.g, e, group.p) * pow_mod(key.y, r, group.p) % group.p;
  return EncryptResult{std::move(ct), std::move(z)};
}

}  // namespace

EncryptResult encrypt_share(uint64_t v, const AggregatePublicKey& key,
                            const GroupParams& group, Rng& rng) {
  mpz_class z = random_below(rng, group.q);
  mpz_class r = random_below(rng, group.q);
  return encrypt_with(v, key, group, std::move(z), r);
}

EncryptResult encrypt_share_with_coins(uint64_t v, const AggregatePublicKey& key,
                                       const GroupParams& group, const mpz_class& z,
                                       const mpz_class& r) {
  if (z < 0 || z >= group.q || r < 0 || r >= group.q) {
    fail(Errc::OutOfRange, "coins must lie in [0, q)");
  }
  return encrypt_with(v, key, group, z, r);
}

HomCiphertext combine(std::span<const HomCiphertext> cts, const GroupParams& group) {
  if (cts.empty()) fail(Errc::EmptyRound, "no ciphertexts to combine");
  HomCiphertext out{1, 1};
  for (const HomCiphertext& ct : cts) {
    if (!is_subgroup_element(group, ct.c) || !is_subgroup_element(group, ct.d)) {
      fail(Errc::NotInSubgroup, "ciphertext component outside the group");
    }
    out.c = out.c * ct.c % group.p;
    out.d = out.d * ct.d % group.p;
  }
  return out;
}

PartialDecryption partial_decrypt(const MeterId& meter, const HomCiphertext& combined,
                                  const mpz_class& x, const mpz_class& mask,
                                  const GroupParams& group) {
  if (!is_subgroup_element(group, combined.c) || !is_subgroup_element(group, combined.d)) {
    fail(Errc::NotInSubgroup, "combined ciphertext outside the group");
  }
  mpz_class t = pow_mod(combined.c, x, group.p) * pow_mod(group.g, mask, group.p) % group.p;
  return PartialDecryption{meter, std::move(t)};
}

BabyStepGiantStep::BabyStepGiantStep(const GroupParams& group, uint64_t bound)
    : group_(group), bound_(bound) {
  m_ = static_cast<uint64_t>(std::sqrt(static_cast<double>(bound) + 1.0));
  while (m_ * m_ < bound + 1) ++m_;
  if (m_ == 0) m_ = 1;
  mpz_class x = 1;
  for (uint64_t j = 0; j < m_; ++j) {
    baby_.emplace(x, j);  // keep the smallest j if the subgroup wraps
    x = x * group_.g % group_.p;
  }
  // x is now g^m; its inverse is the giant stride.
  giant_ = inv_mod(x, group_.p);
}

uint64_t BabyStepGiantStep::solve(const mpz_class& target) const {
  if (target < 1 || target >= group_.p) {
    fail(Errc::InvalidArgument, "discrete-log target outside the group");
  }
  mpz_class x = target;
  for (uint64_t i = 0; i * m_ <= bound_; ++i) {
    auto it = baby_.find(x);
    if (it != baby_.end()) {
      uint64_t e = i * m_ + it->second;
      if (e <= bound_) return e;
    }
    x = x * giant_ % group_.p;
  }
  fail(Errc::LogNotFound, "no exponent in [0, " + std::to_string(bound_) + "] matches");
}

uint64_t recover_sum(const HomCiphertext& combined,
                     std::span<const PartialDecryption> partials,
                     const AggregatePublicKey& key, const GroupParams& group,
                     uint64_t bound, const BabyStepGiantStep* solver) {
  std::map<MeterId, const mpz_class*> by_meter;
  for (const PartialDecryption& partial : partials) {
    if (!is_subgroup_element(group, partial.t)) {
      fail(Errc::NotInSubgroup, "partial decryption outside the group");
    }
    if (!by_meter.emplace(partial.meter, &partial.t).second) {
      fail(Errc::InvalidArgument, "duplicate partial from " + partial.meter.to_string());
    }
  }
  mpz_class prod = 1;
  for (const MeterId& meter : key.roster) {
    auto it = by_meter.find(meter);
    if (it == by_meter.end()) {
      fail(Errc::MissingPartial, "no partial decryption from " + meter.to_string());
    }
    prod = prod * *it->second % group.p;
    by_meter.erase(it);
  }
  if (!by_meter.empty()) {
    fail(Errc::InvalidArgument,
         "partial from non-roster meter " + by_meter.begin()->first.to_string());
  }
  mpz_class d = combined.d * inv_mod(prod, group.p) % group.p;
  if (solver != nullptr) {
    if (solver->bound() < bound) {
      fail(Errc::InvalidArgument, "prebuilt solver bound too small");
    }
    return solver->solve(d);
  }
  return BabyStepGiantStep(group, bound).solve(d);
}

// --- bus payload codecs ---------------------------------------------------

namespace {

nlohmann::json pubkey_entry_json(const PubkeyEntry& entry) {
  return {{"meter", meter_to_json(entry.meter)},
          {"y", mpz_to_hex(entry.y)},
          {"cert", entry.cert.to_json()}};
}

PubkeyEntry pubkey_entry_from_json(const nlohmann::json& j) {
  PubkeyEntry entry;
  entry.meter = meter_from_json(j.at("meter"));
  entry.y = mpz_from_hex(j.at("y").get<std::string>());
  entry.cert = Credential::from_json(j.at("cert"));
  return entry;
}

}  // namespace

Bytes config_req_payload() {
  return to_bytes(nlohmann::json::object().dump());
}

Bytes pubkey_payload(const PubkeyEntry& entry) {
  return to_bytes(pubkey_entry_json(entry).dump());
}

PubkeyEntry parse_pubkey(std::span<const uint8_t> payload) {
  return decode_json("PUBKEY payload",
                     [&] { return pubkey_entry_from_json(parse_payload(payload)); });
}

Bytes roster_payload(std::span<const PubkeyEntry> entries) {
  nlohmann::json list = nlohmann::json::array();
  for (const PubkeyEntry& entry : entries) list.push_back(pubkey_entry_json(entry));
  return to_bytes(nlohmann::json{{"entries", std::move(list)}}.dump());
}

std::vector<PubkeyEntry> parse_roster(std::span<const uint8_t> payload) {
  return decode_json("ROSTER payload", [&] {
    nlohmann::json j = parse_payload(payload);
    std::vector<PubkeyEntry> entries;
    for (const nlohmann::json& item : j.at("entries")) {
      entries.push_back(pubkey_entry_from_json(item));
    }
    return entries;
  });
}

Bytes ct_payload(const MeterId& meter, const HomCiphertext& ct) {
  return to_bytes(nlohmann::json{{"meter", meter_to_json(meter)},
                                 {"c", mpz_to_hex(ct.c)},
                                 {"d", mpz_to_hex(ct.d)}}
                      .dump());
}

std::pair<MeterId, HomCiphertext> parse_ct(std::span<const uint8_t> payload) {
  return decode_json("CT payload", [&]() -> std::pair<MeterId, HomCiphertext> {
    nlohmann::json j = parse_payload(payload);
    return {meter_from_json(j.at("meter")),
            HomCiphertext{mpz_from_hex(j.at("c").get<std::string>()),
                          mpz_from_hex(j.at("d").get<std::string>())}};
  });
}

Bytes combined_payload(const HomCiphertext& ct) {
  return to_bytes(
      nlohmann::json{{"c", mpz_to_hex(ct.c)}, {"d", mpz_to_hex(ct.d)}}.dump());
}

HomCiphertext parse_combined(std::span<const uint8_t> payload) {
  return decode_json("COMBINED payload", [&] {
    nlohmann::json j = parse_payload(payload);
    return HomCiphertext{mpz_from_hex(j.at("c").get<std::string>()),
                         mpz_from_hex(j.at("d").get<std::string>())};
  });
}

Bytes partial_payload(const PartialDecryption& partial) {
  return to_bytes(nlohmann::json{{"meter", meter_to_json(partial.meter)},
                                 {"t", mpz_to_hex(partial.t)}}
                      .dump());
}

PartialDecryption parse_partial(std::span<const uint8_t> payload) {
  return decode_json("PARTIAL payload", [&] {
    nlohmann::json j = parse_payload(payload);
    return PartialDecryption{meter_from_json(j.at("meter")),
                             mpz_from_hex(j.at("t").get<std::string>())};
  });
}

Bytes sum_payload(uint64_t sum_wh, uint32_t contributing) {
  return to_bytes(
      nlohmann::json{{"sum_wh", sum_wh}, {"contributing", contributing}}.dump());
}

std::pair<uint64_t, uint32_t> parse_sum(std::span<const uint8_t> payload) {
  return decode_json("SUM payload", [&]() -> std::pair<uint64_t, uint32_t> {
    nlohmann::json j = parse_payload(payload);
    return {j.at("sum_wh").get<uint64_t>(), j.at("contributing").get<uint32_t>()};
  });
}

// --- protocol roles ---------------------------------------------------------

HomProducer::HomProducer(MeterId meter, ProducerKeys keys, GroupParams group,
                         Key256 utility_public, Rng rng)
    : meter_(std::move(meter)),
      keys_(std::move(keys)),
      group_(std::move(group)),
      utility_public_(utility_public),
      rng_(std::move(rng)) {}

Bytes HomProducer::pubkey() const {
  return pubkey_payload(PubkeyEntry{meter_, keys_.y, keys_.cert});
}

void HomProducer::on_roster(std::span<const uint8_t> payload,
                            std::span<const MeterId> expected_roster) {
  std::vector<PubkeyEntry> entries = parse_roster(payload);
  if (entries.size() != expected_roster.size()) {
    fail(Errc::RosterMismatch, "roster size " + std::to_string(entries.size()) +
                                   ", expected " + std::to_string(expected_roster.size()));
  }
  bool own_seen = false;
  mpz_class y = 1;
  for (size_t i = 0; i < entries.size(); ++i) {
    const PubkeyEntry& entry = entries[i];
    if (entry.meter != expected_roster[i]) {
      fail(Errc::RosterMismatch, "roster position " + std::to_string(i) + " holds " +
                                     entry.meter.to_string());
    }
    if (!UtilityProvisioning::check(entry.cert, utility_public_) ||
        entry.cert.meter != entry.meter) {
      fail(Errc::BadCredential, "certificate for " + entry.meter.to_string());
    }
    if (!is_subgroup_element(group_, entry.y)) {
      fail(Errc::NotInSubgroup, "public key of " + entry.meter.to_string());
    }
    if (entry.meter == meter_) {
      if (entry.y != keys_.y) {
        fail(Errc::RosterMismatch, "own roster entry carries a different key");
      }
      own_seen = true;
    }
    y = y * entry.y % group_.p;
  }
  if (!own_seen) fail(Errc::RosterMismatch, "own entry missing from roster");
  aggregate_ = AggregatePublicKey{std::move(y),
                                  {expected_roster.begin(), expected_roster.end()}};
}

const AggregatePublicKey& HomProducer::aggregate_key() const {
  if (!aggregate_.has_value()) fail(Errc::InvalidArgument, "config phase not completed");
  return *aggregate_;
}

HomCiphertext HomProducer::encrypt_for_slot(uint32_t slot_j, uint64_t v) {
  const AggregatePublicKey& key = aggregate_key();
  if (masks_.contains(slot_j)) {
    fail(Errc::MaskReuse, "slot " + std::to_string(slot_j) + " already encrypted");
  }
  EncryptResult result = encrypt_share(v, key, group_, rng_);
  masks_[slot_j] = std::move(result.mask);
  return std::move(result.ct);
}

PartialDecryption HomProducer::partial_for_slot(uint32_t slot_j,
                                                const HomCiphertext& combined) {
  auto it = masks_.find(slot_j);
  if (it == masks_.end()) {
    fail(Errc::InvalidArgument, "slot " + std::to_string(slot_j) + " was never encrypted");
  }
  if (!it->second.has_value()) {
    fail(Errc::MaskReuse, "mask for slot " + std::to_string(slot_j) + " already consumed");
  }
  PartialDecryption partial =
      partial_decrypt(meter_, combined, keys_.x, *it->second, group_);
  it->second.reset();  // one mask, one partial
  return partial;
}

HomAggregator::HomAggregator(GroupParams group, std::vector<MeterId> roster,
                             Key256 utility_public)
    : group_(std::move(group)), roster_(std::move(roster)), utility_public_(utility_public) {
  if (roster_.empty()) fail(Errc::InvalidArgument, "empty roster");
}

const AggregatePublicKey& HomAggregator::run_config(std::span<const Envelope> pubkey_envs) {
  std::map<MeterId, PubkeyEntry> by_meter;
  for (const Envelope& env : pubkey_envs) {
    if (env.kind != MsgKind::Pubkey) {
      fail(Errc::InvalidArgument, "config phase saw a non-PUBKEY envelope");
    }
    PubkeyEntry entry = parse_pubkey(env.payload);
    if (env.sender != entry.meter.to_string()) {
      fail(Errc::BadCredential, "sender '" + env.sender + "' does not own the entry");
    }
    if (!UtilityProvisioning::check(entry.cert, utility_public_) ||
        entry.cert.meter != entry.meter) {
      fail(Errc::BadCredential, "certificate for " + entry.meter.to_string());
    }
    if (!is_subgroup_element(group_, entry.y)) {
      fail(Errc::NotInSubgroup, "public key of " + entry.meter.to_string());
    }
    MeterId meter = entry.meter;
    if (!by_meter.emplace(std::move(meter), std::move(entry)).second) {
      fail(Errc::InvalidArgument, "duplicate PUBKEY");
    }
  }
  entries_.clear();
  mpz_class y = 1;
  for (const MeterId& meter : roster_) {
    auto it = by_meter.find(meter);
    if (it == by_meter.end()) {
      fail(Errc::RosterMismatch, "no public key from " + meter.to_string());
    }
    y = y * it->second.y % group_.p;
    entries_.push_back(std::move(it->second));
    by_meter.erase(it);
  }
  if (!by_meter.empty()) {
    fail(Errc::RosterMismatch,
         "public key from non-roster meter " + by_meter.begin()->first.to_string());
  }
  aggregate_ = AggregatePublicKey{std::move(y), roster_};
  return *aggregate_;
}

Bytes HomAggregator::roster() const {
  if (!aggregate_.has_value()) fail(Errc::InvalidArgument, "config phase not completed");
  return roster_payload(entries_);
}

const AggregatePublicKey& HomAggregator::aggregate_key() const {
  if (!aggregate_.has_value()) fail(Errc::InvalidArgument, "config phase not completed");
  return *aggregate_;
}

HomCiphertext HomAggregator::combine_round(std::span<const Envelope> ct_envs,
                                           uint32_t slot_j) const {
  std::map<MeterId, HomCiphertext> by_meter;
  for (const Envelope& env : ct_envs) {
    if (env.kind != MsgKind::Ct) fail(Errc::InvalidArgument, "round saw a non-CT envelope");
    if (env.slot != slot_j) {
      fail(Errc::WrongSlot, "ciphertext for a different slot");
    }
    auto [meter, ct] = parse_ct(env.payload);
    if (env.sender != meter.to_string()) {
      fail(Errc::InvalidArgument, "sender '" + env.sender + "' does not own the ciphertext");
    }
    if (!by_meter.emplace(std::move(meter), std::move(ct)).second) {
      fail(Errc::InvalidArgument, "duplicate ciphertext");
    }
  }
  std::vector<HomCiphertext> ordered;
  ordered.reserve(roster_.size());
  for (const MeterId& meter : roster_) {
    auto it = by_meter.find(meter);
    if (it == by_meter.end()) {
      fail(Errc::MissingCiphertext, "no ciphertext from " + meter.to_string());
    }
    ordered.push_back(std::move(it->second));
    by_meter.erase(it);
  }
  if (!by_meter.empty()) {
    fail(Errc::InvalidArgument,
         "ciphertext from non-roster meter " + by_meter.begin()->first.to_string());
  }
  return combine(ordered, group_);
}

uint64_t HomAggregator::recover_round(const HomCiphertext& combined,
                                      std::span<const Envelope> partial_envs,
                                      uint64_t bound,
                                      const BabyStepGiantStep* solver) const {
  if (!aggregate_.has_value()) fail(Errc::InvalidArgument, "config phase not completed");
  std::vector<PartialDecryption> partials;
  partials.reserve(partial_envs.size());
  for (const Envelope& env : partial_envs) {
    if (env.kind != MsgKind::Partial) {
      fail(Errc::InvalidArgument, "round saw a non-PARTIAL envelope");
    }
    PartialDecryption partial = parse_partial(env.payload);
    if (env.sender != partial.meter.to_string()) {
      fail(Errc::InvalidArgument, "sender '" + env.sender + "' does not own the partial");
    }
    partials.push_back(std::move(partial));
  }
  return recover_sum(combined, partials, *aggregate_, group_, bound, solver);
}

}  // namespace gridagg::hom
