#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridagg/attest.hpp"
#include "gridagg/bus.hpp"
#include "gridagg/model.hpp"
#include "gridagg/rng.hpp"

namespace gridagg::hom {

// Multiplicative group for the encrypted-aggregation backend: the order-q
// subgroup of Z_p^* for a safe prime p = 2q + 1, which is exactly the set
// of quadratic residues mod p.  g generates it.
struct GroupParams {
  mpz_class p;
  mpz_class q;
  mpz_class g;

  // Validates p = 2q + 1, primality of both, and that g generates the
  // subgroup (g a residue, g != 1).
  static GroupParams checked(mpz_class p, mpz_class q, mpz_class g);

  size_t bits() const { return mpz_sizeinbase(p.get_mpz_t(), 2); }

  friend bool operator==(const GroupParams&, const GroupParams&) = default;
};

// Searches for a safe-prime group of the given modulus size.  Deterministic
// in the RNG.  Throws PrimalitySearchExhausted if the attempt budget runs
// out before a safe prime appears.
GroupParams setup_group(unsigned bits, Rng& rng);

// Pinned groups so runs don't pay a prime search.  bench_group_512 keeps
// benchmark timings comparable across machines; standard_group_2048 is the
// 2048-bit MODP safe prime from RFC 3526 with the residue generator g = 4.
const GroupParams& bench_group_512();
const GroupParams& standard_group_2048();

// Membership test for the order-q subgroup (Euler criterion via the
// Legendre symbol — cheap compared to an exponentiation).
bool is_subgroup_element(const GroupParams& group, const mpz_class& x);

mpz_class pow_mod(const mpz_class& base, const mpz_class& exp, const mpz_class& mod);
mpz_class inv_mod(const mpz_class& a, const mpz_class& mod);

// Uniform draw from [0, bound) by rejection, deterministic in the RNG.
mpz_class random_below(Rng& rng, const mpz_class& bound);

// Lowercase big-endian hex, no leading zeros ("0" for zero).
std::string mpz_to_hex(const mpz_class& x);
mpz_class mpz_from_hex(const std::string& hex);

// One producer's additive-homomorphic ciphertext (c, d) = (g^r, g^{v+z} y^r).
struct HomCiphertext {
  mpz_class c;
  mpz_class d;

  friend bool operator==(const HomCiphertext&, const HomCiphertext&) = default;
};

// A producer's long-term key material: secret exponent x, public y = g^x,
// and the utility-issued certificate that authenticates y's owner.
struct ProducerKeys {
  mpz_class x;
  mpz_class y;
  Credential cert;
};

// The combined encryption key every producer encrypts under: y = prod of
// all enrolled producers' y_p, with the roster that contributed.
struct AggregatePublicKey {
  mpz_class y;
  std::vector<MeterId> roster;
};

// One producer's share of a round's decryption: T = c^x g^z for the
// combined c and the mask z that producer used this round.
struct PartialDecryption {
  MeterId meter;
  mpz_class t;

  friend bool operator==(const PartialDecryption&, const PartialDecryption&) = default;
};

ProducerKeys gen_producer_keys(const GroupParams& group, Credential cert, Rng& rng);

struct EncryptResult {
  HomCiphertext ct;
  mpz_class mask;  // the z this ciphertext's partial decryption must reuse
};

// Encrypts one reading under the aggregate key with fresh coins z, r drawn
// uniformly from [0, q).
EncryptResult encrypt_share(uint64_t v, const AggregatePublicKey& key,
                            const GroupParams& group, Rng& rng);

// Deterministic-coins variant for cross-checking against hand-computed
// values.  Requires 0 <= z, r < q.
EncryptResult encrypt_share_with_coins(uint64_t v, const AggregatePublicKey& key,
                                       const GroupParams& group, const mpz_class& z,
                                       const mpz_class& r);

// Componentwise product of all ciphertexts in a round.  Every component
// must be a subgroup element.
HomCiphertext combine(std::span<const HomCiphertext> cts, const GroupParams& group);

PartialDecryption partial_decrypt(const MeterId& meter, const HomCiphertext& combined,
                                  const mpz_class& x, const mpz_class& mask,
                                  const GroupParams& group);

// Table-based discrete log in the subgroup for exponents 0..bound.
class BabyStepGiantStep {
 public:
  BabyStepGiantStep(const GroupParams& group, uint64_t bound);

  // Returns e with g^e == target, or throws LogNotFound if no exponent in
  // [0, bound] matches.
  uint64_t solve(const mpz_class& target) const;

  uint64_t bound() const { return bound_; }

 private:
  GroupParams group_;
  uint64_t bound_;
  uint64_t m_;                         // baby-step table width, ceil(sqrt(bound+1))
  std::map<mpz_class, uint64_t> baby_; // g^j -> j for j in [0, m)
  mpz_class giant_;                    // g^{-m}
};

// Removes every producer's share from the combined ciphertext and solves
// the remaining discrete log: sum = log_g(d * prod(T_p)^-1).  Requires a
// partial from every roster member.  A prebuilt solver may be supplied;
// otherwise one is built for this call.
uint64_t recover_sum(const HomCiphertext& combined,
                     std::span<const PartialDecryption> partials,
                     const AggregatePublicKey& key, const GroupParams& group,
                     uint64_t bound, const BabyStepGiantStep* solver = nullptr);

// --- bus payload codecs -------------------------------------------------
// Group elements travel as lowercase big-endian hex inside JSON payloads.

struct PubkeyEntry {
  MeterId meter;
  mpz_class y;
  Credential cert;
};

Bytes config_req_payload();
Bytes pubkey_payload(const PubkeyEntry& entry);
PubkeyEntry parse_pubkey(std::span<const uint8_t> payload);
Bytes roster_payload(std::span<const PubkeyEntry> entries);
std::vector<PubkeyEntry> parse_roster(std::span<const uint8_t> payload);
Bytes ct_payload(const MeterId& meter, const HomCiphertext& ct);
std::pair<MeterId, HomCiphertext> parse_ct(std::span<const uint8_t> payload);
Bytes combined_payload(const HomCiphertext& ct);
HomCiphertext parse_combined(std::span<const uint8_t> payload);
Bytes partial_payload(const PartialDecryption& partial);
PartialDecryption parse_partial(std::span<const uint8_t> payload);
Bytes sum_payload(uint64_t sum_wh, uint32_t contributing);
std::pair<uint64_t, uint32_t> parse_sum(std::span<const uint8_t> payload);

// --- protocol roles ------------------------------------------------------

// Meter-side participant.  Owns the secret exponent and the per-slot masks;
// enforces that each mask feeds exactly one ciphertext and one partial
// decryption (violations throw MaskReuse).
class HomProducer {
 public:
  HomProducer(MeterId meter, ProducerKeys keys, GroupParams group, Key256 utility_public,
              Rng rng);

  const MeterId& meter() const { return meter_; }
  const ProducerKeys& keys() const { return keys_; }
  bool configured() const { return aggregate_.has_value(); }

  Bytes pubkey() const;

  // Checks every roster certificate, that the roster matches what this
  // producer was enrolled with (including its own unmodified entry), and
  // derives the aggregate key.
  void on_roster(std::span<const uint8_t> payload, std::span<const MeterId> expected_roster);

  const AggregatePublicKey& aggregate_key() const;

  HomCiphertext encrypt_for_slot(uint32_t slot_j, uint64_t v);
  PartialDecryption partial_for_slot(uint32_t slot_j, const HomCiphertext& combined);

 private:
  MeterId meter_;
  ProducerKeys keys_;
  GroupParams group_;
  Key256 utility_public_;
  Rng rng_;
  std::optional<AggregatePublicKey> aggregate_;
  // absent: never issued; engaged nullopt: consumed by a partial
  std::map<uint32_t, std::optional<mpz_class>> masks_;
};

// Cloud-side role: collects public keys, publishes the roster, combines
// each round's ciphertexts, and recovers sums from partial decryptions.
// Never holds a secret.
class HomAggregator {
 public:
  HomAggregator(GroupParams group, std::vector<MeterId> roster, Key256 utility_public);

  Bytes config_req() const { return config_req_payload(); }

  // Consumes the PUBKEY envelopes of the config phase.  Verifies each
  // certificate, insists the senders are exactly the roster, and derives
  // the aggregate key.
  const AggregatePublicKey& run_config(std::span<const Envelope> pubkey_envs);

  Bytes roster() const;
  const AggregatePublicKey& aggregate_key() const;

  // Combines a round's CT envelopes.  Every roster member must appear
  // exactly once (MissingCiphertext / InvalidArgument on duplicates).
  HomCiphertext combine_round(std::span<const Envelope> ct_envs, uint32_t slot_j) const;

  // Recovers the round sum from PARTIAL envelopes.
  uint64_t recover_round(const HomCiphertext& combined,
                         std::span<const Envelope> partial_envs, uint64_t bound,
                         const BabyStepGiantStep* solver = nullptr) const;

 private:
  GroupParams group_;
  std::vector<MeterId> roster_;
  Key256 utility_public_;
  std::optional<AggregatePublicKey> aggregate_;
  std::vector<PubkeyEntry> entries_;
};

}  // namespace gridagg::hom
