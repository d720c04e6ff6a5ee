#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridagg/bus.hpp"
#include "gridagg/enclave.hpp"
#include "gridagg/fleet.hpp"
#include "gridagg/hom.hpp"
#include "gridagg/model.hpp"
#include "gridagg/stats.hpp"

namespace gridagg {

// The three aggregation pipelines the simulator can run over one fleet.
//  plain    — readings cross the bus unprotected; baseline and foil.
//  enclave  — attested aggregation core, AEAD channels, fault substitution.
//  hom      — additively homomorphic encryption, sum recovered jointly;
//             no single party decrypts, and a lost meter aborts the round.
enum class Backend { Plain, Enclave, Homomorphic };

std::string_view backend_name(Backend b);
Backend backend_from_name(std::string_view name);

// Where quote verification happens on the meter side: locally against the
// provisioned authority key, or routed through a verification service
// stand-in first (the meter still checks the challenge binding itself).
enum class QuoteVerification { Self, Service };

// Group selection for the homomorphic backend: a named preset, a modulus
// size to search for, or explicit parameters.
struct GroupSpec {
  std::string preset = "bench512";  // "" when bits or explicit params given
  std::optional<unsigned> bits;
  std::optional<std::array<std::string, 3>> pqg_hex;

  hom::GroupParams resolve(const Rng& root) const;

  nlohmann::json to_json() const;
  static GroupSpec from_json(const nlohmann::json& j);
};

// Everything that defines a reproducible fleet: shape, consumption model,
// fault plan, policy, crypto group, and the one seed all randomness flows
// from.
struct FleetConfig {
  std::string region = "west";
  uint32_t meters = 10;
  uint32_t slots_per_period = 96;
  uint32_t slot_duration_s = 900;
  uint64_t v_max_wh = 5000;
  uint64_t seed = 1;
  LoadProfile profile;
  std::vector<Outage> faults;
  SubstitutionPolicy policy;
  GroupSpec group;
  bool parallel = true;
  QuoteVerification quote_verification = QuoteVerification::Self;

  FaultPlan fault_plan() const;

  nlohmann::json to_json() const;
  static FleetConfig from_json(const nlohmann::json& j);
  static FleetConfig load(const std::filesystem::path& path);
};

struct RunConfig {
  FleetConfig fleet;
  std::vector<Backend> backends{Backend::Plain, Backend::Enclave, Backend::Homomorphic};
  std::optional<uint32_t> slots;  // capped at slots_per_period
  std::optional<uint64_t> seed;   // overrides fleet.seed
};

// Outcome of one slot under one backend.  flagged means the policy refused
// to release a total; aborted means a protocol error killed the slot
// (authentication failure, missing contribution) — only the latter makes
// the run unsuccessful.
struct SlotResult {
  uint32_t slot = 0;
  uint64_t sum_wh = 0;
  uint32_t contributing = 0;
  uint32_t substituted = 0;
  bool flagged = false;
  bool aborted = false;
  std::string abort_reason;
  double latency_ms = 0.0;

  nlohmann::json to_json() const;
};

struct BackendRun {
  Backend backend = Backend::Plain;
  std::vector<SlotResult> slots;
  std::vector<BillingRecord> billing;
  double wall_ms = 0.0;

  nlohmann::json to_json() const;
};

// What the privacy audit found in a finished enclave run's transcripts.
struct AuditReport {
  bool clean = false;
  size_t aggregate_records = 0;
  size_t billing_records = 0;
  std::vector<std::string> violations;

  nlohmann::json to_json() const;
};

struct RunReport {
  FleetConfig fleet;
  uint32_t slots_run = 0;
  uint64_t seed = 0;
  bool parallel = false;
  int threads = 1;
  std::string rng_algorithm;
  std::vector<BackendRun> backends;
  std::vector<std::string> mismatches;
  std::optional<AuditReport> audit;                // present when enclave ran
  std::optional<size_t> enclave_footprint_bytes;   // present when enclave ran

  // True when no backend disagreed with the reference and no slot aborted.
  bool ok() const;

  nlohmann::json to_json() const;
};

// Runs every requested backend over the same generated fleet and
// cross-checks the released records against ground truth and each other.
RunReport simulate(const RunConfig& config);

// Reference for what the enclave should release for one slot, computed
// from ground truth and the fault plan alone.  The mismatch check uses it
// so a defect in the enclave's bookkeeping cannot hide behind itself.
struct ExpectedSlot {
  uint64_t sum_wh = 0;
  uint32_t contributing = 0;
  uint32_t substituted = 0;
  bool flagged = false;
};

ExpectedSlot expected_enclave_slot(const ConsumptionMatrix& truth, const FaultPlan& faults,
                                   const SubstitutionPolicy& policy, uint32_t slot_j);

// Inspects a finished enclave run's bus transcripts: the enclave's output
// to the utility must be aggregate and billing records only, measurement
// frames must never carry a reading in the clear, and handshake traffic
// must conform to its schemas.
AuditReport audit_enclave_run(const Bus& bus, const FleetConfig& fleet,
                              const ConsumptionMatrix& truth, uint32_t slots_run,
                              bool period_closed);

// Per-fleet-size latency comparison across backends: one warmup round plus
// `runs` measured rounds per (backend, n); the per-round latencies yield
// mean and 95% confidence interval.
struct BenchRow {
  Backend backend = Backend::Plain;
  uint32_t n = 0;
  double mean_ms = 0.0;
  double ci95_ms = 0.0;
  size_t runs = 0;

  nlohmann::json to_json() const;
};

std::vector<BenchRow> bench(const FleetConfig& base, std::span<const Backend> backends,
                            std::span<const uint32_t> sizes, uint32_t runs);

// CSV with header "backend,n,mean_ms,ci95_ms".
void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows);

// Writes hex-encoded key files (one per role) derived from the fleet seed:
// utility.key, authority.key, meter_<index>.key per meter, group.params.
// The same derivation simulate() uses, so written keys match a run's.
void keygen(const FleetConfig& fleet, const std::filesystem::path& out_dir);

// Bus topic layout.
std::string measurements_topic(const std::string& region);
std::string attestation_topic(const std::string& region);
// Producer-to-aggregator direction of the homomorphic protocol.
std::string hom_topic(const std::string& region);
// Aggregator-to-producers direction (roster, combined ciphertexts, sums),
// split out so producers do not have to scan each other's uplink traffic.
std::string hom_feed_topic(const std::string& region);
inline constexpr std::string_view kUtilityTopic = "utility/aggregates";

// Identity string of the aggregation core, bound into its measurement.
inline constexpr std::string_view kEnclaveCodeIdentity = "gridagg-enclave-core/1";

}  // namespace gridagg
