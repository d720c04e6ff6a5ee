#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "doctest.h"
#include "gridagg/fleet.hpp"
#include "gridagg/hom.hpp"
#include "gridagg/rng.hpp"
#include "test_util.hpp"

using namespace gridagg;
using namespace gridagg::hom;

namespace {

// Tiny toy group p = 23 = 2*11 + 1, subgroup of order 11 generated by 2.
// Small enough that every chain below can be followed on paper.
GroupParams toy_group() { return GroupParams::checked(23, 11, 2); }

struct HomRig {
  SigningKey utility_key = SigningKey::from_seed(Key256{1});
  GroupParams group;
  std::vector<MeterId> roster;
  std::vector<HomProducer> producers;
  HomAggregator aggregator;

  explicit HomRig(GroupParams g, uint32_t n, uint64_t seed = 5)
      : group(g),
        roster(make_roster("west", n)),
        aggregator(g, roster, utility_key.public_key) {
    UtilityProvisioning utility(utility_key);
    Rng root(seed);
    for (uint32_t i = 1; i <= n; ++i) {
      Rng key_rng = root.fork("hom-key/" + std::to_string(i));
      Credential cert = utility.issue(roster[i - 1], SigningKey::from_seed(Key256{
                                                         static_cast<uint8_t>(i)})
                                                         .public_key);
      ProducerKeys keys = gen_producer_keys(group, cert, key_rng);
      producers.emplace_back(roster[i - 1], std::move(keys), group,
                             utility_key.public_key,
                             root.fork("hom-producer/" + std::to_string(i)));
    }
  }

  Envelope env(const std::string& sender, MsgKind kind, std::optional<uint32_t> slot,
               Bytes payload, uint64_t seq = 1) {
    Envelope e;
    e.topic = "hom";
    e.sender = sender;
    e.kind = kind;
    e.slot = slot;
    e.payload = std::move(payload);
    e.seq = seq;
    return e;
  }

  std::vector<Envelope> pubkey_envs() {
    std::vector<Envelope> envs;
    for (auto& p : producers) {
      envs.push_back(env(p.meter().to_string(), MsgKind::Pubkey, std::nullopt, p.pubkey()));
    }
    return envs;
  }

  void configure() {
    aggregator.run_config(pubkey_envs());
    Bytes roster_bytes = aggregator.roster();
    for (auto& p : producers) p.on_roster(roster_bytes, roster);
  }

  std::vector<Envelope> ct_envs(uint32_t slot_j, std::span<const uint64_t> values) {
    std::vector<Envelope> envs;
    for (size_t i = 0; i < producers.size(); ++i) {
      HomCiphertext ct = producers[i].encrypt_for_slot(slot_j, values[i]);
      envs.push_back(env(producers[i].meter().to_string(), MsgKind::Ct, slot_j,
                         ct_payload(producers[i].meter(), ct)));
    }
    return envs;
  }

  std::vector<Envelope> partial_envs(uint32_t slot_j, const HomCiphertext& combined) {
    std::vector<Envelope> envs;
    for (auto& p : producers) {
      PartialDecryption partial = p.partial_for_slot(slot_j, combined);
      envs.push_back(env(p.meter().to_string(), MsgKind::Partial, slot_j,
                         partial_payload(partial), 2));
    }
    return envs;
  }
};

}  // namespace

TEST_CASE("group validation accepts the toy group and rejects near misses") {
  GroupParams g = toy_group();
  CHECK(g.bits() == 5);

  // p not equal to 2q + 1
  check_throws_errc(Errc::InvalidArgument, [] { GroupParams::checked(23, 7, 2); });
  // composite p (25 = 2*12 + 1 needs q = 12, composite anyway)
  check_throws_errc(Errc::InvalidArgument, [] { GroupParams::checked(25, 12, 2); });
  // q composite: p = 19 = 2*9 + 1
  check_throws_errc(Errc::InvalidArgument, [] { GroupParams::checked(19, 9, 4); });
  // g = 1 generates nothing
  check_throws_errc(Errc::InvalidArgument, [] { GroupParams::checked(23, 11, 1); });
  // g = 5 is not a quadratic residue mod 23
  check_throws_errc(Errc::InvalidArgument, [] { GroupParams::checked(23, 11, 5); });
}

TEST_CASE("subgroup membership is the quadratic residue test") {
  GroupParams g = toy_group();
  // Quadratic residues mod 23.
  for (uint64_t x : {1, 2, 3, 4, 6, 8, 9, 12, 13, 16, 18}) {
    CHECK(is_subgroup_element(g, mpz_class(x)));
  }
  for (uint64_t x : {5, 7, 10, 11, 14, 15, 17, 19, 20, 21, 22}) {
    CHECK_FALSE(is_subgroup_element(g, mpz_class(x)));
  }
  CHECK_FALSE(is_subgroup_element(g, mpz_class(0)));
  CHECK_FALSE(is_subgroup_element(g, mpz_class(23)));
  CHECK_FALSE(is_subgroup_element(g, mpz_class(-2)));
}

TEST_CASE("modular helpers agree with hand calculations") {
  CHECK(pow_mod(2, 7, 23) == 13);
  CHECK(pow_mod(2, 0, 23) == 1);
  CHECK(inv_mod(18, 23) == 9);  // 18 * 9 = 162 = 7*23 + 1
  CHECK(mpz_to_hex(mpz_class(0)) == "0");
  CHECK(mpz_to_hex(mpz_class(255)) == "ff");
  CHECK(mpz_from_hex("ff") == 255);
  CHECK(mpz_from_hex(mpz_to_hex(mpz_class("123456789abcdef0123456789", 16))) ==
        mpz_class("123456789abcdef0123456789", 16));
}

TEST_CASE("the single-producer worked example holds end to end") {
  GroupParams g = toy_group();
  // Secret x = 3, so y = 2^3 = 8.
  AggregatePublicKey key{mpz_class(8), make_roster("west", 1)};

  // v = 2 with coins z = 5, r = 4:
  //   c = g^r = 2^4 = 16
  //   d = g^(v+z) * y^r = 2^7 * 8^4 = 13 * 2 = 26 = 3 (mod 23)
  EncryptResult enc = encrypt_share_with_coins(2, key, g, 5, 4);
  CHECK(enc.ct.c == 16);
  CHECK(enc.ct.d == 3);
  CHECK(enc.mask == 5);

  // T = c^x * g^z = 16^3 * 2^5 = 2 * 9 = 18 (mod 23)
  PartialDecryption partial =
      partial_decrypt(MeterId{"west", 1}, enc.ct, 3, enc.mask, g);
  CHECK(partial.t == 18);

  // D = d * T^{-1} = 3 * 9 = 27 = 4 = 2^2, so the sum is 2.
  std::vector<PartialDecryption> partials{partial};
  CHECK(recover_sum(enc.ct, partials, key, g, 10) == 2);
}

TEST_CASE("the two-producer worked example holds end to end") {
  GroupParams g = toy_group();
  auto roster = make_roster("west", 2);
  // x1 = 3, x2 = 4: y = 2^3 * 2^4 = 128 = 13 (mod 23).
  AggregatePublicKey key{mpz_class(13), roster};

  // v1 = 2, z1 = 5, r1 = 4: c1 = 16, d1 = 2^7 * 13^4 = 13 * 18 = 4 (mod 23)
  EncryptResult e1 = encrypt_share_with_coins(2, key, g, 5, 4);
  CHECK(e1.ct.c == 16);
  CHECK(e1.ct.d == 4);
  // v2 = 3, z2 = 1, r2 = 2: c2 = 4, d2 = 2^4 * 13^2 = 16 * 8 = 13 (mod 23)
  EncryptResult e2 = encrypt_share_with_coins(3, key, g, 1, 2);
  CHECK(e2.ct.c == 4);
  CHECK(e2.ct.d == 13);

  // Componentwise product: (16*4, 4*13) = (18, 6) mod 23.
  std::vector<HomCiphertext> cts{e1.ct, e2.ct};
  HomCiphertext combined = combine(cts, g);
  CHECK(combined.c == 18);
  CHECK(combined.d == 6);

  // T1 = 18^3 * 2^5 = 13 * 9 = 2; T2 = 18^4 * 2^1 = 4 * 2 = 8 (mod 23).
  PartialDecryption t1 = partial_decrypt(roster[0], combined, 3, e1.mask, g);
  PartialDecryption t2 = partial_decrypt(roster[1], combined, 4, e2.mask, g);
  CHECK(t1.t == 2);
  CHECK(t2.t == 8);

  // D = 6 * (2*8)^{-1} = 6 * 13 = 78 = 9 = 2^5: the sum is 5 = 2 + 3.
  std::vector<PartialDecryption> partials{t1, t2};
  CHECK(recover_sum(combined, partials, key, g, 10) == 5);
}

TEST_CASE("encryption coins are validated against the subgroup order") {
  GroupParams g = toy_group();
  AggregatePublicKey key{mpz_class(8), make_roster("west", 1)};
  check_throws_errc(Errc::OutOfRange,
                    [&] { encrypt_share_with_coins(1, key, g, 11, 4); });  // z = q
  check_throws_errc(Errc::OutOfRange,
                    [&] { encrypt_share_with_coins(1, key, g, 5, -1); });  // r < 0
  // z = 0 and r = 0 are legal coins: the coin space is [0, q).
  EncryptResult zero = encrypt_share_with_coins(1, key, g, 0, 0);
  CHECK(zero.ct.c == 1);  // g^0
  CHECK(zero.ct.d == 2);  // g^1 * y^0
}

TEST_CASE("combine rejects components outside the subgroup") {
  GroupParams g = toy_group();
  std::vector<HomCiphertext> bad_c{{mpz_class(5), mpz_class(2)}};  // 5 is a non-residue
  check_throws_errc(Errc::NotInSubgroup, [&] { combine(bad_c, g); });
  std::vector<HomCiphertext> bad_d{{mpz_class(2), mpz_class(7)}};
  check_throws_errc(Errc::NotInSubgroup, [&] { combine(bad_d, g); });
  std::vector<HomCiphertext> none;
  check_throws_errc(Errc::EmptyRound, [&] { combine(none, g); });
}

TEST_CASE("masks drawn by encrypt_share are uniform over [0, q)") {
  // Chi-squared goodness of fit for both coins of the encryption, z (via
  // the returned mask) and r (via a discrete log in the toy group).  With
  // q = 11 and 100000 draws, the 5% critical value for 10 degrees of
  // freedom is 29.588.  The generator is seeded, so this is deterministic.
  GroupParams g = toy_group();
  AggregatePublicKey key{mpz_class(8), make_roster("west", 1)};
  Rng rng(20240817);

  std::map<uint64_t, uint64_t> log_table;  // g^e -> e
  for (uint64_t e = 0; e < 11; ++e) {
    log_table[pow_mod(g.g, e, g.p).get_ui()] = e;
  }

  constexpr int kDraws = 100000;
  std::array<uint64_t, 11> z_counts{};
  std::array<uint64_t, 11> r_counts{};
  for (int i = 0; i < kDraws; ++i) {
    EncryptResult enc = encrypt_share(0, key, g, rng);
    // .at() traps any draw outside [0, q) without a per-iteration assertion.
    ++z_counts.at(enc.mask.get_ui());
    ++r_counts.at(log_table.at(enc.ct.c.get_ui()));
  }

  auto chi_squared = [&](const std::array<uint64_t, 11>& counts) {
    const double expected = double(kDraws) / 11.0;
    double chi = 0.0;
    for (uint64_t c : counts) {
      const double d = double(c) - expected;
      chi += d * d / expected;
    }
    return chi;
  };
  CHECK(chi_squared(z_counts) < 29.588);
  CHECK(chi_squared(r_counts) < 29.588);
  // Zero must be reachable: the coin space starts at 0, not 1.
  CHECK(z_counts[0] > 0);
  CHECK(r_counts[0] > 0);
}

TEST_CASE("group setup finds a valid safe-prime group deterministically") {
  Rng rng(11);
  GroupParams g = setup_group(24, rng);
  CHECK(g.bits() == 24);
  // checked() re-validates everything; it must not throw.
  GroupParams again = GroupParams::checked(g.p, g.q, g.g);
  CHECK(again == g);

  Rng rng2(11);
  CHECK(setup_group(24, rng2) == g);

  Rng rng3(12);
  // A different seed finds a different group (overwhelmingly likely).
  CHECK_FALSE(setup_group(24, rng3) == g);
}

TEST_CASE("the pinned groups validate") {
  const GroupParams& bench = bench_group_512();
  CHECK(bench.bits() == 512);
  CHECK_FALSE(GroupParams::checked(bench.p, bench.q, bench.g) == toy_group());

  const GroupParams& standard = standard_group_2048();
  CHECK(standard.bits() == 2048);
  CHECK(standard.g == 4);
  CHECK(is_subgroup_element(standard, standard.g));
  GroupParams::checked(standard.p, standard.q, standard.g);
}

TEST_CASE("baby-step giant-step matches a linear scan on the toy group") {
  GroupParams g = toy_group();
  BabyStepGiantStep solver(g, 10);
  CHECK(solver.bound() == 10);
  for (uint64_t e = 0; e <= 10; ++e) {
    CHECK(solver.solve(pow_mod(g.g, e, g.p)) == e);
  }
  // 2^11 = 1 mod 23 wraps to 0, so pick a target no exponent reaches by
  // restricting the bound below q - 1.
  BabyStepGiantStep narrow(g, 5);
  check_throws_errc(Errc::LogNotFound,
                    [&] { narrow.solve(pow_mod(g.g, 7, g.p)); });
}

TEST_CASE("baby-step giant-step handles larger bounds in a real group") {
  const GroupParams& g = bench_group_512();
  BabyStepGiantStep solver(g, 100000);
  for (uint64_t e : {uint64_t{0}, uint64_t{1}, uint64_t{31337}, uint64_t{99999},
                     uint64_t{100000}}) {
    CHECK(solver.solve(pow_mod(g.g, e, g.p)) == e);
  }
  check_throws_errc(Errc::LogNotFound,
                    [&] { solver.solve(pow_mod(g.g, 100001, g.p)); });
}

TEST_CASE("producer keys land in the subgroup with x in range") {
  GroupParams g = toy_group();
  UtilityProvisioning utility(SigningKey::from_seed(Key256{1}));
  Credential cert = utility.issue(MeterId{"west", 1}, Key256{7});
  Rng rng(3);
  ProducerKeys keys = gen_producer_keys(g, cert, rng);
  CHECK(keys.x >= 1);
  CHECK(keys.x < g.q);
  CHECK(keys.y == pow_mod(g.g, keys.x, g.p));
  CHECK(is_subgroup_element(g, keys.y));
}

TEST_CASE("the full protocol recovers the exact sum over the bus shapes") {
  HomRig rig(toy_group(), 3);
  rig.configure();
  for (auto& p : rig.producers) CHECK(p.configured());

  // Aggregate key is the product of the individual keys.
  mpz_class expect_y = 1;
  for (auto& p : rig.producers) expect_y = expect_y * p.keys().y % rig.group.p;
  CHECK(rig.aggregator.aggregate_key().y == expect_y);
  CHECK(rig.producers[0].aggregate_key().y == expect_y);

  const std::vector<uint64_t> values{2, 0, 3};
  auto cts = rig.ct_envs(1, values);
  HomCiphertext combined = rig.aggregator.combine_round(cts, 1);
  auto partials = rig.partial_envs(1, combined);
  CHECK(rig.aggregator.recover_round(combined, partials, 9) == 5);
}

TEST_CASE("each mask feeds exactly one ciphertext and one partial") {
  HomRig rig(toy_group(), 1);
  rig.configure();
  HomProducer& p = rig.producers[0];

  HomCiphertext ct = p.encrypt_for_slot(1, 2);
  check_throws_errc(Errc::MaskReuse, [&] { p.encrypt_for_slot(1, 2); });

  std::vector<HomCiphertext> cts{ct};
  HomCiphertext combined = combine(cts, rig.group);
  p.partial_for_slot(1, combined);
  check_throws_errc(Errc::MaskReuse, [&] { p.partial_for_slot(1, combined); });

  // A partial for a slot that was never encrypted has no mask to use.
  check_throws_errc(Errc::InvalidArgument, [&] { p.partial_for_slot(9, combined); });

  // Other slots are unaffected.
  p.encrypt_for_slot(2, 1);
}

TEST_CASE("an unconfigured producer refuses to encrypt") {
  HomRig rig(toy_group(), 1);
  check_throws_errc(Errc::InvalidArgument, [&] { rig.producers[0].encrypt_for_slot(1, 2); });
}

TEST_CASE("producers verify the roster before deriving the aggregate key") {
  HomRig rig(toy_group(), 2);
  rig.aggregator.run_config(rig.pubkey_envs());
  Bytes good = rig.aggregator.roster();

  // Wrong order / wrong members.
  std::vector<MeterId> reversed{rig.roster[1], rig.roster[0]};
  check_throws_errc(Errc::RosterMismatch,
                    [&] { rig.producers[0].on_roster(good, reversed); });

  // A roster whose entry for this producer carries someone else's key.
  std::vector<PubkeyEntry> entries = parse_roster(good);
  std::swap(entries[0].y, entries[1].y);
  Bytes swapped = roster_payload(entries);
  check_throws_errc(Errc::RosterMismatch,
                    [&] { rig.producers[0].on_roster(swapped, rig.roster); });

  // A certificate that does not verify.
  entries = parse_roster(good);
  entries[1].cert.signature[0] ^= 1;
  Bytes forged = roster_payload(entries);
  check_throws_errc(Errc::BadCredential,
                    [&] { rig.producers[0].on_roster(forged, rig.roster); });

  // The genuine roster still configures.
  rig.producers[0].on_roster(good, rig.roster);
  CHECK(rig.producers[0].configured());
}

TEST_CASE("the aggregator validates the config phase") {
  HomRig rig(toy_group(), 2);
  auto envs = rig.pubkey_envs();

  // Missing producer.
  std::vector<Envelope> partial_config{envs[0]};
  check_throws_errc(Errc::RosterMismatch,
                    [&] { rig.aggregator.run_config(partial_config); });

  // Sender does not match the key owner.
  std::vector<Envelope> stolen = envs;
  stolen[1].sender = rig.roster[0].to_string();
  check_throws_errc(Errc::BadCredential, [&] { rig.aggregator.run_config(stolen); });

  // Aggregate key requested before config completes.
  check_throws_errc(Errc::InvalidArgument, [&] { rig.aggregator.aggregate_key(); });

  rig.aggregator.run_config(envs);
}

TEST_CASE("rounds demand exactly one contribution from every member") {
  HomRig rig(toy_group(), 3);
  rig.configure();
  const std::vector<uint64_t> values{1, 1, 1};
  auto cts = rig.ct_envs(1, values);

  std::vector<Envelope> one_short{cts[0], cts[1]};
  check_throws_errc(Errc::MissingCiphertext,
                    [&] { rig.aggregator.combine_round(one_short, 1); });

  std::vector<Envelope> duplicated{cts[0], cts[1], cts[2], cts[2]};
  check_throws_errc(Errc::InvalidArgument,
                    [&] { rig.aggregator.combine_round(duplicated, 1); });

  std::vector<Envelope> wrong_slot = cts;
  wrong_slot[2].slot = 2;
  check_throws_errc(Errc::WrongSlot,
                    [&] { rig.aggregator.combine_round(wrong_slot, 1); });

  HomCiphertext combined = rig.aggregator.combine_round(cts, 1);
  auto partials = rig.partial_envs(1, combined);
  std::vector<Envelope> partial_short{partials[0], partials[2]};
  check_throws_errc(Errc::MissingPartial,
                    [&] { rig.aggregator.recover_round(combined, partial_short, 3); });

  CHECK(rig.aggregator.recover_round(combined, partials, 3) == 3);
}

TEST_CASE("payload codecs round trip and reject junk") {
  HomRig rig(toy_group(), 2);
  HomProducer& p = rig.producers[0];

  PubkeyEntry entry{p.meter(), p.keys().y, p.keys().cert};
  PubkeyEntry back = parse_pubkey(pubkey_payload(entry));
  CHECK(back.meter == entry.meter);
  CHECK(back.y == entry.y);
  CHECK(back.cert == entry.cert);

  std::vector<PubkeyEntry> entries{entry};
  auto roster_back = parse_roster(roster_payload(entries));
  REQUIRE(roster_back.size() == 1);
  CHECK(roster_back[0].y == entry.y);

  HomCiphertext ct{mpz_class(16), mpz_class(3)};
  auto [meter2, ct2] = parse_ct(ct_payload(p.meter(), ct));
  CHECK(meter2 == p.meter());
  CHECK(ct2 == ct);
  CHECK(parse_combined(combined_payload(ct)) == ct);

  PartialDecryption partial{p.meter(), mpz_class(18)};
  CHECK(parse_partial(partial_payload(partial)) == partial);

  auto [sum, contributing] = parse_sum(sum_payload(12345, 7));
  CHECK(sum == 12345);
  CHECK(contributing == 7);

  check_throws_errc(Errc::ParseError, [] { parse_ct(as_span("nope")); });
  check_throws_errc(Errc::ParseError, [] { parse_combined(as_span("{}")); });
  check_throws_errc(Errc::ParseError, [] { parse_sum(as_span("{\"sum_wh\":1}")); });
}

TEST_CASE("recover_sum accepts a prebuilt solver and checks its bound") {
  GroupParams g = toy_group();
  AggregatePublicKey key{mpz_class(8), make_roster("west", 1)};
  EncryptResult enc = encrypt_share_with_coins(2, key, g, 5, 4);
  PartialDecryption partial = partial_decrypt(MeterId{"west", 1}, enc.ct, 3, enc.mask, g);
  std::vector<PartialDecryption> partials{partial};

  BabyStepGiantStep solver(g, 10);
  CHECK(recover_sum(enc.ct, partials, key, g, 10, &solver) == 2);
  CHECK(recover_sum(enc.ct, partials, key, g, 10, nullptr) == 2);
}
