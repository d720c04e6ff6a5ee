#pragma once

#include <cstdint>
#include <vector>

#include "gridagg/model.hpp"
#include "gridagg/rational.hpp"
#include "gridagg/rng.hpp"

namespace gridagg {

// Shape of a meter's synthetic consumption: a jittered base load with
// occasional spikes (cooking, charging, heating).  All draws come from a
// per-meter fork of the fleet RNG, so traces are reproducible and
// independent of generation order.
struct LoadProfile {
  uint64_t base_wh = 120;
  uint64_t jitter_wh = 40;          // uniform in [-jitter, +jitter] around base
  Rational spike_prob{1, 20};       // per-slot chance of a spike
  uint64_t spike_wh = 1200;

  friend bool operator==(const LoadProfile&, const LoadProfile&) = default;
};

// Full consumption trace for one meter: t values in [0, v_max].
std::vector<MeasurementValue> generate_trace(const LoadProfile& profile,
                                             const MeterId& meter, uint32_t t,
                                             uint64_t v_max, const Rng& fleet_rng);

// One planned communication outage: the meter sends nothing for slots
// from_slot..to_slot inclusive.
struct Outage {
  uint32_t meter_index = 0;
  uint32_t from_slot = 0;
  uint32_t to_slot = 0;

  friend bool operator==(const Outage&, const Outage&) = default;
};

// Which meters are down in which slots.  Validated against the fleet shape
// at construction; queries after that cannot fail.
class FaultPlan {
 public:
  FaultPlan() = default;
  FaultPlan(std::vector<Outage> outages, uint32_t n, uint32_t t);

  bool is_faulted(uint32_t meter_index, uint32_t slot_j) const;
  std::vector<uint32_t> faulted_meters(uint32_t slot_j) const;  // ascending
  const std::vector<Outage>& outages() const { return outages_; }
  bool empty() const { return outages_.empty(); }

 private:
  std::vector<Outage> outages_;
};

std::vector<MeterId> make_roster(const std::string& region, uint32_t n);

// Fills a matrix with generated traces for meters 1..n (serial reference).
ConsumptionMatrix generate_fleet(const LoadProfile& profile, const std::string& region,
                                 uint32_t n, uint32_t t, uint64_t v_max,
                                 const Rng& fleet_rng);

}  // namespace gridagg
