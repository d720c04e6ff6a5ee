#include <algorithm>
#include <chrono>
#include <utility>

#include "gridagg/errors.hpp"
#include "gridagg/kernels.hpp"
#include "gridagg/sim.hpp"

namespace gridagg {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Key256 seed32(const Rng& root, const std::string& label) {
  Key256 seed{};
  root.fork(label).fill(seed);
  return seed;
}

// Pulls the next envelope of the wanted kind off a subscription, skipping
// envelopes of other kinds (a subscriber sees the whole topic, including
// its own publishes and the opposite direction of its own conversation).
// A kind match with the wrong slot is protocol confusion, not noise.
Envelope expect_envelope(Bus::Subscription& sub, MsgKind kind, std::optional<uint32_t> slot,
                         std::string_view waiter) {
  for (;;) {
    std::optional<Envelope> env = sub.poll();
    if (!env.has_value()) {
      fail(Errc::MissingValue, std::string(waiter) + ": no " +
                                   std::string(kind_name(kind)) + " envelope pending");
    }
    if (env->kind != kind) continue;
    if (slot.has_value() && env->slot != slot) {
      fail(Errc::WrongSlot, std::string(waiter) + ": " + std::string(kind_name(kind)) +
                                " for slot " +
                                (env->slot ? std::to_string(*env->slot) : "none") +
                                ", expected " + std::to_string(*slot));
    }
    return std::move(*env);
  }
}

ConsumptionMatrix build_truth(const FleetConfig& fleet, uint32_t slots_run, bool parallel) {
  Rng root(fleet.seed);
  std::vector<std::vector<MeasurementValue>> traces = kernels::generate_traces_auto(
      fleet.profile, fleet.region, fleet.meters, slots_run, fleet.v_max_wh, root, parallel);
  ConsumptionMatrix truth(fleet.region, fleet.meters, fleet.slots_per_period, fleet.v_max_wh);
  for (uint32_t slot_j = 1; slot_j <= slots_run; ++slot_j) {
    for (uint32_t i = 1; i <= fleet.meters; ++i) {
      truth.append(i, traces[i - 1][slot_j - 1].wh);
    }
  }
  return truth;
}

Bytes json_bytes(const nlohmann::json& j) { return to_bytes(j.dump()); }

SlotResult aborted_slot(uint32_t slot_j, uint32_t contributing, std::string reason,
                        double latency_ms) {
  SlotResult s;
  s.slot = slot_j;
  s.contributing = contributing;
  s.aborted = true;
  s.abort_reason = std::move(reason);
  s.latency_ms = latency_ms;
  return s;
}

// ---------------------------------------------------------------- plain ---

BackendRun run_plain(const FleetConfig& fleet, const ConsumptionMatrix& truth,
                     const FaultPlan& faults, uint32_t slots_run, Bus& bus) {
  BackendRun run;
  run.backend = Backend::Plain;

  const std::string topic = measurements_topic(fleet.region);
  const std::string utility_topic(kUtilityTopic);
  std::vector<Bus::Sender> meters;
  meters.reserve(fleet.meters);
  for (uint32_t i = 1; i <= fleet.meters; ++i) {
    meters.push_back(bus.sender(MeterId{fleet.region, i}.to_string()));
  }
  Bus::Sender aggregator = bus.sender("aggregator/" + fleet.region);
  Bus::Subscription agg_sub = bus.subscribe(topic);

  std::vector<uint64_t> billing(fleet.meters, 0);
  for (uint32_t slot_j = 1; slot_j <= slots_run; ++slot_j) {
    Clock::time_point start = Clock::now();
    for (uint32_t i = 1; i <= fleet.meters; ++i) {
      if (faults.is_faulted(i, slot_j)) continue;
      // Lean binary frame — the baseline's round must not pay more for
      // serialization than the protected pipelines pay for crypto.
      Bytes payload;
      put_be32(payload, i);
      put_be64(payload, truth.at(i, slot_j));
      meters[i - 1].publish(topic, MsgKind::Plain, slot_j, std::move(payload));
    }

    SlotResult slot;
    slot.slot = slot_j;
    try {
      uint64_t sum = 0;
      uint32_t count = 0;
      for (const Envelope& env : agg_sub.drain()) {
        if (env.payload.size() != 12) fail(Errc::ParseError, "plain frame must be 12 bytes");
        uint32_t index = get_be32(env.payload, 0);
        if (index == 0 || index > fleet.meters) {
          fail(Errc::InvalidArgument,
               "reading from unknown " + MeterId{fleet.region, index}.to_string());
        }
        uint64_t wh = validate_measurement(get_be64(env.payload, 4), fleet.v_max_wh).wh;
        sum = checked_add(sum, wh);
        billing[index - 1] = checked_add(billing[index - 1], wh);
        ++count;
      }
      AggregateRecord record;
      record.slot = TimeSlot{slot_j, fleet.slot_duration_s};
      record.sum_wh = sum;
      record.contributing = count;
      aggregator.publish(utility_topic, MsgKind::Aggregate, slot_j,
                         json_bytes(record.to_json()));
      slot.sum_wh = sum;
      slot.contributing = count;
    } catch (const std::exception& e) {
      run.slots.push_back(aborted_slot(slot_j, 0, e.what(), elapsed_ms(start)));
      return run;
    }
    slot.latency_ms = elapsed_ms(start);
    run.slots.push_back(slot);
  }

  if (slots_run == fleet.slots_per_period) {
    for (uint32_t i = 1; i <= fleet.meters; ++i) {
      BillingRecord bill{truth.meter_id(i), 1, billing[i - 1]};
      aggregator.publish(utility_topic, MsgKind::Billing, std::nullopt,
                         json_bytes(bill.to_json()));
      run.billing.push_back(bill);
    }
  }
  return run;
}

// -------------------------------------------------------------- enclave ---

struct MeterChannel {
  SessionKeys keys;
  NonceCounter nonces;

  explicit MeterChannel(const SessionKeys& k) : keys(k), nonces(k.session_id) {}
};

// Runs one meter's attestation handshake end to end over the bus, with the
// referee observing every message.  Returns the established channel.
MeterChannel run_handshake(Bus& bus, const std::string& topic, Bus::Sender& meter_sender,
                           Bus::Sender& agg_sender, Bus::Subscription& agg_sub,
                           const UtilityProvisioning& utility,
                           const AttestationAuthority& authority, Enclave& enclave,
                           const Credential& credential, const Rng& root,
                           QuoteVerification verification) {
  const MeterId& meter = credential.meter;
  MeterAttestClient client(credential, authority.public_key(), enclave.measurement(),
                           root.fork("attest/" + meter.to_string()));
  Handshake referee(utility, authority, enclave);
  Bus::Subscription meter_sub = bus.subscribe(topic);
  constexpr uint32_t kSlot = 1;  // sessions are established before the first slot

  auto referee_consume = [&](MsgKind kind) {
    Envelope env = expect_envelope(agg_sub, kind, std::nullopt, "referee");
    Handshake::Step step = referee.on_message(env.kind, env.payload, kSlot);
    for (auto& [reply_kind, reply] : step.replies) {
      agg_sender.publish(topic, reply_kind, std::nullopt, std::move(reply));
    }
  };

  meter_sender.publish(topic, MsgKind::Identify, std::nullopt, client.identify());
  referee_consume(MsgKind::Identify);
  client.on_cred_ok(expect_envelope(meter_sub, MsgKind::CredOk, std::nullopt, meter.to_string())
                        .payload);

  Bytes challenge_payload = client.challenge();
  meter_sender.publish(topic, MsgKind::Challenge, std::nullopt, challenge_payload);
  referee_consume(MsgKind::Challenge);
  // The quote the referee just emitted crosses the bus; the referee
  // verifies its own emission in transit, exactly as a relaying host would.
  referee_consume(MsgKind::Quote);

  Envelope quote_env = expect_envelope(meter_sub, MsgKind::Quote, std::nullopt, meter.to_string());
  if (verification == QuoteVerification::Service) {
    // Verification-service deployment: the meter submits the quote to the
    // service (which holds the authority key) before acting on it.  The
    // service sees only bus-visible data — the quote and the meter's own
    // published challenge.
    auto [quote, enclave_public] = parse_quote_payload(quote_env.payload);
    (void)enclave_public;
    verify_quote(quote, enclave.measurement(), parse_challenge(challenge_payload).first,
                 authority.public_key());
  }
  meter_sender.publish(topic, MsgKind::AttestOk, std::nullopt,
                       client.attest_ok(quote_env.payload, kSlot));
  referee_consume(MsgKind::AttestOk);

  if (referee.state() != HandshakeState::KeysEstablished || !client.established()) {
    fail(Errc::KeyConfirmationFailed, "handshake for " + meter.to_string() +
                                          " ended in state " +
                                          std::string(handshake_state_name(referee.state())));
  }
  return MeterChannel(client.keys());
}

BackendRun run_enclave(const FleetConfig& fleet, const ConsumptionMatrix& truth,
                       const FaultPlan& faults, uint32_t slots_run, Bus& bus,
                       bool parallel, const Rng& root, bool& period_closed,
                       size_t& footprint_bytes) {
  BackendRun run;
  run.backend = Backend::Enclave;
  period_closed = false;

  UtilityProvisioning utility(SigningKey::from_seed(seed32(root, "utility-key")));
  AttestationAuthority authority(SigningKey::from_seed(seed32(root, "authority-key")));
  std::vector<MeterId> roster = make_roster(fleet.region, fleet.meters);
  Enclave enclave(std::string(kEnclaveCodeIdentity), fleet.policy, roster,
                  fleet.slots_per_period, fleet.slot_duration_s, fleet.v_max_wh, root);
  footprint_bytes = enclave.footprint_per_meter_bytes();

  const std::string attest_topic = attestation_topic(fleet.region);
  const std::string meas_topic = measurements_topic(fleet.region);
  const std::string utility_topic(kUtilityTopic);

  std::vector<Bus::Sender> meter_senders;
  meter_senders.reserve(fleet.meters);
  for (const MeterId& meter : roster) meter_senders.push_back(bus.sender(meter.to_string()));
  Bus::Sender agg_sender = bus.sender("aggregator/" + fleet.region);
  Bus::Sender enclave_sender = bus.sender("enclave/" + fleet.region);
  Bus::Subscription agg_attest_sub = bus.subscribe(attest_topic);
  Bus::Subscription agg_meas_sub = bus.subscribe(meas_topic);

  std::vector<MeterChannel> channels;
  channels.reserve(fleet.meters);
  try {
    for (uint32_t i = 1; i <= fleet.meters; ++i) {
      SigningKey meter_key =
          SigningKey::from_seed(seed32(root, "meter-key/" + std::to_string(i)));
      Credential credential = utility.issue(roster[i - 1], meter_key.public_key);
      channels.push_back(run_handshake(bus, attest_topic, meter_senders[i - 1], agg_sender,
                                       agg_attest_sub, utility, authority, enclave,
                                       credential, root, fleet.quote_verification));
    }
  } catch (const std::exception& e) {
    run.slots.push_back(
        aborted_slot(1, 0, std::string("attestation: ") + e.what(), 0.0));
    return run;
  }

  for (uint32_t slot_j = 1; slot_j <= slots_run; ++slot_j) {
    Clock::time_point start = Clock::now();
    TimeSlot slot{slot_j, fleet.slot_duration_s};

    std::vector<kernels::SealJob> jobs;
    std::vector<uint32_t> job_meters;
    jobs.reserve(fleet.meters);
    for (uint32_t i = 1; i <= fleet.meters; ++i) {
      if (faults.is_faulted(i, slot_j)) continue;
      jobs.push_back(kernels::SealJob{roster[i - 1], MeasurementValue{truth.at(i, slot_j)},
                                      &channels[i - 1].keys, &channels[i - 1].nonces});
      job_meters.push_back(i);
    }

    try {
      std::vector<EncryptedMeasurement> frames =
          kernels::seal_slot_auto(jobs, slot, parallel);
      for (size_t k = 0; k < frames.size(); ++k) {
        meter_senders[job_meters[k] - 1].publish(meas_topic, MsgKind::Measure, slot_j,
                                                 frames[k].encode());
      }
      for (const Envelope& env : agg_meas_sub.drain()) {
        enclave.ingest(EncryptedMeasurement::decode(env.payload, fleet.slot_duration_s));
      }
      AggregateRecord record = enclave.close_slot(slot_j);
      enclave_sender.publish(utility_topic, MsgKind::Aggregate, slot_j,
                             json_bytes(record.to_json()));

      SlotResult result;
      result.slot = slot_j;
      result.sum_wh = record.sum_wh;
      result.contributing = record.contributing;
      result.substituted = record.substituted;
      result.flagged = record.flagged;
      result.latency_ms = elapsed_ms(start);
      run.slots.push_back(result);
    } catch (const std::exception& e) {
      run.slots.push_back(aborted_slot(slot_j, static_cast<uint32_t>(jobs.size()), e.what(),
                                       elapsed_ms(start)));
      return run;
    }
  }

  if (slots_run == fleet.slots_per_period) {
    run.billing = enclave.close_period();
    for (const BillingRecord& bill : run.billing) {
      enclave_sender.publish(utility_topic, MsgKind::Billing, std::nullopt,
                             json_bytes(bill.to_json()));
    }
    period_closed = true;
  }
  return run;
}

// ------------------------------------------------------------------ hom ---

BackendRun run_hom(const FleetConfig& fleet, const ConsumptionMatrix& truth,
                   const FaultPlan& faults, uint32_t slots_run, Bus& bus, bool parallel,
                   const Rng& root, const hom::GroupParams& group) {
  BackendRun run;
  run.backend = Backend::Homomorphic;

  UtilityProvisioning utility(SigningKey::from_seed(seed32(root, "utility-key")));
  std::vector<MeterId> roster = make_roster(fleet.region, fleet.meters);

  const std::string uplink = hom_topic(fleet.region);
  const std::string feed = hom_feed_topic(fleet.region);
  const std::string utility_topic(kUtilityTopic);

  std::vector<hom::HomProducer> producers;
  std::vector<Bus::Sender> meter_senders;
  std::vector<Bus::Subscription> meter_subs;
  producers.reserve(fleet.meters);
  meter_senders.reserve(fleet.meters);
  meter_subs.reserve(fleet.meters);
  Bus::Sender agg_sender = bus.sender("aggregator/" + fleet.region);
  Bus::Subscription agg_sub = bus.subscribe(uplink);

  for (uint32_t i = 1; i <= fleet.meters; ++i) {
    const MeterId& meter = roster[i - 1];
    SigningKey meter_key =
        SigningKey::from_seed(seed32(root, "meter-key/" + std::to_string(i)));
    Credential cert = utility.issue(meter, meter_key.public_key);
    Rng key_rng = root.fork("hom-key/" + std::to_string(i));
    producers.emplace_back(meter, hom::gen_producer_keys(group, std::move(cert), key_rng),
                           group, utility.public_key(),
                           root.fork("hom-producer/" + std::to_string(i)));
    meter_senders.push_back(bus.sender(meter.to_string()));
    meter_subs.push_back(bus.subscribe(feed));
  }

  // Configuration phase: request, per-producer public keys, signed roster.
  uint64_t bound = 0;
  hom::HomAggregator aggregator(group, roster, utility.public_key());
  try {
    agg_sender.publish(feed, MsgKind::ConfigReq, std::nullopt, aggregator.config_req());
    for (uint32_t i = 1; i <= fleet.meters; ++i) {
      expect_envelope(meter_subs[i - 1], MsgKind::ConfigReq, std::nullopt,
                      roster[i - 1].to_string());
      meter_senders[i - 1].publish(uplink, MsgKind::Pubkey, std::nullopt,
                                   producers[i - 1].pubkey());
    }
    std::vector<Envelope> pubkeys = agg_sub.drain();
    aggregator.run_config(pubkeys);
    agg_sender.publish(feed, MsgKind::Roster, std::nullopt, aggregator.roster());
    for (uint32_t i = 1; i <= fleet.meters; ++i) {
      Envelope env = expect_envelope(meter_subs[i - 1], MsgKind::Roster, std::nullopt,
                                     roster[i - 1].to_string());
      producers[i - 1].on_roster(env.payload, roster);
    }
    for (uint32_t i = 1; i <= fleet.meters; ++i) {
      bound = checked_add(bound, fleet.v_max_wh);
    }
  } catch (const std::exception& e) {
    run.slots.push_back(
        aborted_slot(1, 0, std::string("configuration: ") + e.what(), 0.0));
    return run;
  }
  hom::BabyStepGiantStep solver(group, bound);

  for (uint32_t slot_j = 1; slot_j <= slots_run; ++slot_j) {
    Clock::time_point start = Clock::now();

    std::vector<hom::HomProducer*> participants;
    std::vector<uint64_t> values;
    std::vector<uint32_t> participant_index;
    for (uint32_t i = 1; i <= fleet.meters; ++i) {
      if (faults.is_faulted(i, slot_j)) continue;
      participants.push_back(&producers[i - 1]);
      values.push_back(truth.at(i, slot_j));
      participant_index.push_back(i);
    }

    try {
      std::vector<hom::HomCiphertext> cts =
          kernels::hom_encrypt_slot_auto(participants, values, slot_j, parallel);
      for (size_t k = 0; k < cts.size(); ++k) {
        meter_senders[participant_index[k] - 1].publish(
            uplink, MsgKind::Ct, slot_j,
            hom::ct_payload(participants[k]->meter(), cts[k]));
      }
      std::vector<Envelope> ct_envs = agg_sub.drain();
      hom::HomCiphertext combined = aggregator.combine_round(ct_envs, slot_j);
      agg_sender.publish(feed, MsgKind::Combined, slot_j, hom::combined_payload(combined));

      hom::HomCiphertext received{};
      for (uint32_t i : participant_index) {
        Envelope env = expect_envelope(meter_subs[i - 1], MsgKind::Combined, slot_j,
                                       roster[i - 1].to_string());
        received = hom::parse_combined(env.payload);
      }
      std::vector<hom::PartialDecryption> partials =
          kernels::hom_partial_slot_auto(participants, received, slot_j, parallel);
      for (size_t k = 0; k < partials.size(); ++k) {
        meter_senders[participant_index[k] - 1].publish(uplink, MsgKind::Partial, slot_j,
                                                        hom::partial_payload(partials[k]));
      }
      std::vector<Envelope> partial_envs = agg_sub.drain();
      uint64_t sum = aggregator.recover_round(combined, partial_envs, bound, &solver);
      agg_sender.publish(utility_topic, MsgKind::Sum, slot_j,
                         hom::sum_payload(sum, static_cast<uint32_t>(participants.size())));

      SlotResult result;
      result.slot = slot_j;
      result.sum_wh = sum;
      result.contributing = static_cast<uint32_t>(participants.size());
      result.latency_ms = elapsed_ms(start);
      run.slots.push_back(result);
    } catch (const std::exception& e) {
      // A failed round burns its slot; the next round is independent.
      run.slots.push_back(aborted_slot(slot_j, static_cast<uint32_t>(participants.size()),
                                       e.what(), elapsed_ms(start)));
    }
  }
  return run;
}

// ------------------------------------------------------------ mismatches ---

void check_backend(RunReport& report, const BackendRun& run, const ConsumptionMatrix& truth,
                   const FaultPlan& faults, const FleetConfig& fleet, uint32_t slots_run) {
  const std::string name(backend_name(run.backend));
  auto note = [&](const std::string& msg) { report.mismatches.push_back(name + ": " + msg); };
  auto note_slot = [&](uint32_t slot_j, const std::string& msg) {
    note("slot " + std::to_string(slot_j) + ": " + msg);
  };
  auto diff = [](std::string_view field, uint64_t got, uint64_t want) {
    return std::string(field) + " " + std::to_string(got) + " != expected " +
           std::to_string(want);
  };
  const uint32_t n = fleet.meters;

  bool run_died = !run.slots.empty() && run.slots.back().aborted &&
                  run.backend != Backend::Homomorphic;
  if (run.slots.size() != slots_run && !run_died) {
    note("ran " + std::to_string(run.slots.size()) + " of " + std::to_string(slots_run) +
         " slots");
  }

  for (const SlotResult& s : run.slots) {
    std::vector<uint32_t> failed = faults.faulted_meters(s.slot);
    switch (run.backend) {
      case Backend::Plain: {
        if (s.aborted) {
          note_slot(s.slot, "aborted: " + s.abort_reason);
          break;
        }
        uint64_t expected = 0;
        for (uint32_t i = 1; i <= n; ++i) {
          if (!faults.is_faulted(i, s.slot)) {
            expected = checked_add(expected, truth.at(i, s.slot));
          }
        }
        if (s.sum_wh != expected) note_slot(s.slot, diff("sum_wh", s.sum_wh, expected));
        if (s.contributing != n - failed.size()) {
          note_slot(s.slot, diff("contributing", s.contributing, n - failed.size()));
        }
        if (s.flagged) note_slot(s.slot, "flagged, but plain aggregation never flags");
        break;
      }
      case Backend::Enclave: {
        if (s.aborted) {
          note_slot(s.slot, "aborted: " + s.abort_reason);
          break;
        }
        ExpectedSlot e = expected_enclave_slot(truth, faults, fleet.policy, s.slot);
        if (s.flagged != e.flagged) {
          note_slot(s.slot, e.flagged ? "released, but the policy oracle flags this slot"
                                      : "flagged, but the policy oracle releases this slot");
          break;
        }
        if (s.sum_wh != e.sum_wh) note_slot(s.slot, diff("sum_wh", s.sum_wh, e.sum_wh));
        if (s.contributing != e.contributing) {
          note_slot(s.slot, diff("contributing", s.contributing, e.contributing));
        }
        if (s.substituted != e.substituted) {
          note_slot(s.slot, diff("substituted", s.substituted, e.substituted));
        }
        break;
      }
      case Backend::Homomorphic: {
        if (!failed.empty()) {
          if (!s.aborted) {
            note_slot(s.slot, "round completed although " + std::to_string(failed.size()) +
                                  " producers were silent");
          }
          break;  // the abort itself is the expected outcome
        }
        if (s.aborted) {
          note_slot(s.slot, "aborted: " + s.abort_reason);
          break;
        }
        uint64_t expected = slot_aggregate(truth, s.slot);
        if (s.sum_wh != expected) note_slot(s.slot, diff("sum_wh", s.sum_wh, expected));
        if (s.contributing != n) note_slot(s.slot, diff("contributing", s.contributing, n));
        break;
      }
    }
  }

  if (run.backend == Backend::Homomorphic) {
    if (!run.billing.empty()) {
      note("released per-meter billing, which this protocol cannot derive");
    }
    return;
  }
  if (slots_run != fleet.slots_per_period || run_died) return;

  if (run.billing.size() != n) {
    note("released " + std::to_string(run.billing.size()) + " billing records, expected " +
         std::to_string(n));
    return;
  }
  for (uint32_t i = 1; i <= n; ++i) {
    uint64_t expected = 0;
    for (uint32_t slot_j = 1; slot_j <= slots_run; ++slot_j) {
      if (!faults.is_faulted(i, slot_j)) {
        expected = checked_add(expected, truth.at(i, slot_j));
      }
    }
    const BillingRecord& bill = run.billing[i - 1];
    const std::string who = truth.meter_id(i).to_string();
    if (bill.meter != truth.meter_id(i)) note("billing record " + who + " misattributed");
    if (bill.period != 1) note("billing " + who + ": period " + std::to_string(bill.period));
    if (bill.total_wh != expected) {
      note("billing " + who + ": " + diff("total_wh", bill.total_wh, expected));
    }
  }
}

}  // namespace

// ------------------------------------------------------------------ oracle ---

ExpectedSlot expected_enclave_slot(const ConsumptionMatrix& truth, const FaultPlan& faults,
                                   const SubstitutionPolicy& policy, uint32_t slot_j) {
  const uint32_t n = truth.meter_count();
  std::vector<uint32_t> failed = faults.faulted_meters(slot_j);

  ExpectedSlot expected;
  expected.contributing = n - static_cast<uint32_t>(failed.size());

  bool over = policy.max_failed_fraction.exceeded_by(failed.size(), n);
  bool substitutable = true;
  uint64_t sum = 0;
  for (uint32_t i = 1; i <= n; ++i) {
    if (!faults.is_faulted(i, slot_j)) sum = checked_add(sum, truth.at(i, slot_j));
  }
  for (uint32_t i : failed) {
    // The meter's history holds only readings it actually delivered.
    std::vector<uint64_t> delivered;
    for (uint32_t jj = 1; jj < slot_j; ++jj) {
      if (!faults.is_faulted(i, jj)) delivered.push_back(truth.at(i, jj));
    }
    if (delivered.empty()) {
      substitutable = false;
      break;
    }
    size_t window = std::min<size_t>(policy.window, delivered.size());
    uint64_t total = 0;
    for (size_t k = delivered.size() - window; k < delivered.size(); ++k) {
      total = checked_add(total, delivered[k]);
    }
    sum = checked_add(sum, total / window);
  }

  if (over || !substitutable) {
    expected.flagged = true;
  } else {
    expected.sum_wh = sum;
    expected.substituted = static_cast<uint32_t>(failed.size());
  }
  return expected;
}

// ------------------------------------------------------------------- audit ---

AuditReport audit_enclave_run(const Bus& bus, const FleetConfig& fleet,
                              const ConsumptionMatrix& truth, uint32_t slots_run,
                              bool period_closed) {
  AuditReport report;
  auto violate = [&](std::string msg) { report.violations.push_back(std::move(msg)); };
  const std::string enclave_sender = "enclave/" + fleet.region;

  // Releases to the utility: enclave-emitted aggregate and billing records
  // only, exactly one aggregate per slot run and one billing line per meter
  // once the period closed.
  std::vector<bool> slot_seen(slots_run, false);
  for (const Envelope& env : bus.transcript(std::string(kUtilityTopic))) {
    if (env.sender != enclave_sender) {
      violate("utility topic carries an envelope from '" + env.sender + "'");
      continue;
    }
    try {
      if (env.kind == MsgKind::Aggregate) {
        AggregateRecord record = AggregateRecord::from_json(
            nlohmann::json::parse(env.payload.begin(), env.payload.end()));
        ++report.aggregate_records;
        if (record.slot.j == 0 || record.slot.j > slots_run) {
          violate("aggregate record for slot " + std::to_string(record.slot.j) +
                  ", which never ran");
        } else if (slot_seen[record.slot.j - 1]) {
          violate("slot " + std::to_string(record.slot.j) + " released twice");
        } else {
          slot_seen[record.slot.j - 1] = true;
        }
        if (env.slot != record.slot.j) violate("aggregate envelope slot tag mismatch");
      } else if (env.kind == MsgKind::Billing) {
        BillingRecord record = BillingRecord::from_json(
            nlohmann::json::parse(env.payload.begin(), env.payload.end()));
        ++report.billing_records;
        if (record.meter.region != fleet.region || record.meter.index == 0 ||
            record.meter.index > fleet.meters) {
          violate("billing record for unknown " + record.meter.to_string());
        }
      } else {
        violate(std::string("utility topic carries a ") + std::string(kind_name(env.kind)) +
                " envelope");
      }
    } catch (const std::exception& e) {
      violate(std::string("utility release does not parse as a record: ") + e.what());
    }
  }
  if (report.aggregate_records != slots_run) {
    violate("released " + std::to_string(report.aggregate_records) + " aggregates for " +
            std::to_string(slots_run) + " slots");
  }
  size_t expected_billing = period_closed ? fleet.meters : 0;
  if (report.billing_records != expected_billing) {
    violate("released " + std::to_string(report.billing_records) +
            " billing records, expected " + std::to_string(expected_billing));
  }

  // Measurement traffic: every envelope must be a well-formed AEAD frame
  // from its own meter, and the sealed bytes must not expose the reading.
  for (const Envelope& env : bus.transcript(measurements_topic(fleet.region))) {
    if (env.kind != MsgKind::Measure) {
      violate(std::string("measurement topic carries a ") +
              std::string(kind_name(env.kind)) + " envelope");
      continue;
    }
    try {
      EncryptedMeasurement em =
          EncryptedMeasurement::decode(env.payload, fleet.slot_duration_s);
      if (env.sender != em.meter.to_string()) {
        violate("measurement frame from '" + env.sender + "' claims to be " +
                em.meter.to_string());
      }
      if (env.slot != em.slot.j) violate("measurement envelope slot tag mismatch");
      if (em.meter.region == truth.region() && em.meter.index >= 1 &&
          em.meter.index <= truth.meter_count() && truth.has(em.meter.index, em.slot.j)) {
        std::array<uint8_t, 8> plain = be64(truth.at(em.meter.index, em.slot.j));
        if (std::equal(plain.begin(), plain.end(), em.ciphertext.begin())) {
          violate(em.meter.to_string() + " slot " + std::to_string(em.slot.j) +
                  " reading crossed the bus unmasked");
        }
      }
    } catch (const std::exception& e) {
      violate(std::string("measurement frame malformed: ") + e.what());
    }
  }

  // Attestation traffic: handshake kinds only, each conforming to its
  // schema — none of these payloads has a field that could carry a reading.
  for (const Envelope& env : bus.transcript(attestation_topic(fleet.region))) {
    try {
      switch (env.kind) {
        case MsgKind::Identify:
          parse_identify(env.payload);
          break;
        case MsgKind::CredOk:
          meter_from_json(nlohmann::json::parse(env.payload.begin(), env.payload.end())
                              .at("meter"));
          break;
        case MsgKind::Challenge:
          parse_challenge(env.payload);
          break;
        case MsgKind::Quote:
          parse_quote_payload(env.payload);
          break;
        case MsgKind::AttestOk:
          parse_attest_ok(env.payload);
          break;
        default:
          violate(std::string("attestation topic carries a ") +
                  std::string(kind_name(env.kind)) + " envelope");
      }
    } catch (const std::exception& e) {
      violate(std::string("attestation payload malformed: ") + e.what());
    }
  }

  report.clean = report.violations.empty();
  return report;
}

// ---------------------------------------------------------------- simulate ---

RunReport simulate(const RunConfig& config) {
  const FleetConfig& fleet = config.fleet;
  uint32_t slots_run = std::min(config.slots.value_or(fleet.slots_per_period),
                                fleet.slots_per_period);
  if (slots_run == 0) fail(Errc::InvalidArgument, "a run needs at least one slot");
  if (config.backends.empty()) fail(Errc::InvalidArgument, "no backend selected");

  RunReport report;
  report.fleet = fleet;
  report.fleet.seed = config.seed.value_or(fleet.seed);
  report.slots_run = slots_run;
  report.seed = report.fleet.seed;
  report.parallel = fleet.parallel && kernels::openmp_enabled();
  report.threads = report.parallel ? kernels::thread_count() : 1;
  report.rng_algorithm = std::string(Rng::kAlgorithmId);

  const FaultPlan faults = fleet.fault_plan();
  const ConsumptionMatrix truth = build_truth(report.fleet, slots_run, report.parallel);

  std::optional<hom::GroupParams> group;
  for (Backend backend : config.backends) {
    if (backend == Backend::Homomorphic && !group.has_value()) {
      group = fleet.group.resolve(Rng(report.seed));
    }
  }

  for (Backend backend : config.backends) {
    Bus bus;
    Rng root(report.seed);
    Clock::time_point start = Clock::now();
    BackendRun run;
    switch (backend) {
      case Backend::Plain:
        run = run_plain(report.fleet, truth, faults, slots_run, bus);
        break;
      case Backend::Enclave: {
        bool period_closed = false;
        size_t footprint = 0;
        run = run_enclave(report.fleet, truth, faults, slots_run, bus, report.parallel,
                          root, period_closed, footprint);
        report.enclave_footprint_bytes = footprint;
        AuditReport audit =
            audit_enclave_run(bus, report.fleet, truth, slots_run, period_closed);
        for (const std::string& v : audit.violations) {
          report.mismatches.push_back("audit: " + v);
        }
        report.audit = std::move(audit);
        break;
      }
      case Backend::Homomorphic:
        run = run_hom(report.fleet, truth, faults, slots_run, bus, report.parallel, root,
                      *group);
        break;
    }
    run.wall_ms = elapsed_ms(start);
    check_backend(report, run, truth, faults, report.fleet, slots_run);
    report.backends.push_back(std::move(run));
  }
  return report;
}

}  // namespace gridagg
