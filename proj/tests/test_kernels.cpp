#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"
#include "gridagg/attest.hpp"
#include "gridagg/kernels.hpp"
#include "test_util.hpp"

using namespace gridagg;

namespace {

// A configured fleet of homomorphic producers over the toy group.  Two
// fleets built with the same seed are in identical states, so a serial run
// on one and a parallel run on the other must produce identical output.
struct HomFleet {
  SigningKey utility_key = SigningKey::from_seed(Key256{1});
  hom::GroupParams group = hom::GroupParams::checked(23, 11, 2);
  std::vector<MeterId> roster;
  std::vector<hom::HomProducer> producers;

  HomFleet(uint32_t n, uint64_t seed) : roster(make_roster("west", n)) {
    UtilityProvisioning utility(utility_key);
    hom::HomAggregator aggregator(group, roster, utility_key.public_key);
    Rng root(seed);
    for (uint32_t i = 1; i <= n; ++i) {
      Rng key_rng = root.fork("hom-key/" + std::to_string(i));
      Credential cert = utility.issue(
          roster[i - 1],
          SigningKey::from_seed(Key256{static_cast<uint8_t>(i)}).public_key);
      hom::ProducerKeys keys = hom::gen_producer_keys(group, cert, key_rng);
      producers.emplace_back(roster[i - 1], std::move(keys), group,
                             utility_key.public_key,
                             root.fork("hom-producer/" + std::to_string(i)));
    }
    std::vector<Envelope> envs;
    for (auto& p : producers) {
      Envelope e;
      e.topic = "hom";
      e.sender = p.meter().to_string();
      e.kind = MsgKind::Pubkey;
      e.payload = p.pubkey();
      e.seq = 1;
      envs.push_back(std::move(e));
    }
    aggregator.run_config(envs);
    Bytes roster_bytes = aggregator.roster();
    for (auto& p : producers) p.on_roster(roster_bytes, roster);
  }

  std::vector<hom::HomProducer*> ptrs() {
    std::vector<hom::HomProducer*> out;
    for (auto& p : producers) out.push_back(&p);
    return out;
  }
};

struct SealFixture {
  std::vector<SessionKeys> keys;
  std::vector<NonceCounter> counters;
  std::vector<kernels::SealJob> jobs;

  explicit SealFixture(uint32_t n) {
    keys.resize(n);
    counters.reserve(n);
    jobs.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
      for (size_t b = 0; b < keys[i].channel_key.size(); ++b) {
        keys[i].channel_key[b] = static_cast<uint8_t>(i * 16 + b + 1);
      }
      keys[i].session_id = {static_cast<uint8_t>(i), 0x5a, 0xa5, 0x01};
      keys[i].established_slot = 1;
      counters.emplace_back(keys[i].session_id);
    }
    for (uint32_t i = 0; i < n; ++i) {
      jobs.push_back(kernels::SealJob{MeterId{"west", i + 1},
                                      MeasurementValue{100 + i}, &keys[i],
                                      &counters[i]});
    }
  }
};

}  // namespace

TEST_CASE("the threading report is coherent") {
  CHECK(kernels::thread_count() >= 1);
  if (!kernels::openmp_enabled()) CHECK(kernels::thread_count() == 1);
}

TEST_CASE("parallel trace generation is bit-identical to the serial reference") {
  LoadProfile profile;
  Rng fleet_rng(404);
  auto serial = kernels::generate_traces_serial(profile, "west", 24, 40, 2000, fleet_rng);
  auto parallel = kernels::generate_traces_parallel(profile, "west", 24, 40, 2000, fleet_rng);
  REQUIRE(serial.size() == 24);
  CHECK(serial == parallel);

  // Both must agree with the single-meter generator: order independence
  // comes from per-meter RNG forks, not from iteration order.
  for (uint32_t i = 0; i < 24; ++i) {
    CHECK(serial[i] ==
          generate_trace(profile, MeterId{"west", i + 1}, 40, 2000, fleet_rng));
  }

  auto picked = kernels::generate_traces_auto(profile, "west", 24, 40, 2000, fleet_rng,
                                              kernels::openmp_enabled());
  CHECK(picked == serial);
  auto forced_serial =
      kernels::generate_traces_auto(profile, "west", 24, 40, 2000, fleet_rng, false);
  CHECK(forced_serial == serial);
}

TEST_CASE("parallel sealing is bit-identical and the frames still open") {
  const TimeSlot slot{5, 900};
  SealFixture a(16);
  SealFixture b(16);

  auto serial = kernels::seal_slot_serial(a.jobs, slot);
  auto parallel = kernels::seal_slot_parallel(b.jobs, slot);
  REQUIRE(serial.size() == 16);
  CHECK(serial == parallel);

  // Sealing consumed each job's counter exactly once.
  for (auto& counter : a.counters) CHECK(counter.last_issued() == 1);

  for (uint32_t i = 0; i < 16; ++i) {
    CHECK(serial[i].meter == MeterId{"west", i + 1});
    CHECK(open_measurement(serial[i], a.keys[i], 0).wh == 100 + i);
  }

  SealFixture c(16);
  auto picked = kernels::seal_slot_auto(c.jobs, slot, kernels::openmp_enabled());
  CHECK(picked == serial);
}

TEST_CASE("parallel homomorphic encryption and partials match the serial path") {
  HomFleet a(8, 777);
  HomFleet b(8, 777);
  const std::vector<uint64_t> values{1, 0, 2, 0, 1, 0, 1, 1};  // sum 6 < q

  auto a_ptrs = a.ptrs();
  auto b_ptrs = b.ptrs();
  auto serial_cts = kernels::hom_encrypt_slot_serial(a_ptrs, values, 1);
  auto parallel_cts = kernels::hom_encrypt_slot_parallel(b_ptrs, values, 1);
  REQUIRE(serial_cts.size() == 8);
  CHECK(serial_cts == parallel_cts);

  hom::HomCiphertext combined = hom::combine(serial_cts, a.group);
  auto serial_partials = kernels::hom_partial_slot_serial(a_ptrs, combined, 1);
  auto parallel_partials = kernels::hom_partial_slot_parallel(b_ptrs, combined, 1);
  REQUIRE(serial_partials.size() == 8);
  CHECK(serial_partials == parallel_partials);

  // The parallel path produced real protocol output: the round decrypts.
  CHECK(hom::recover_sum(combined, serial_partials,
                         a.producers[0].aggregate_key(), a.group, 10) == 6);

  // The auto dispatcher runs the same protocol on fresh state.
  HomFleet c(8, 777);
  auto c_ptrs = c.ptrs();
  auto picked_cts =
      kernels::hom_encrypt_slot_auto(c_ptrs, values, 1, kernels::openmp_enabled());
  CHECK(picked_cts == serial_cts);
  auto picked_partials =
      kernels::hom_partial_slot_auto(c_ptrs, combined, 1, kernels::openmp_enabled());
  CHECK(picked_partials == serial_partials);
}
