#include "gridagg/fleet.hpp"

#include <algorithm>

namespace gridagg {

std::vector<MeasurementValue> generate_trace(const LoadProfile& profile,
                                             const MeterId& meter, uint32_t t,
                                             uint64_t v_max, const Rng& fleet_rng) {
  if (t == 0) fail(Errc::InvalidArgument, "trace needs at least one slot");
  Rng rng = fleet_rng.fork("trace/" + meter.to_string());
  std::vector<MeasurementValue> trace;
  trace.reserve(t);
  for (uint32_t j = 1; j <= t; ++j) {
    uint64_t value = profile.base_wh;
    if (profile.jitter_wh > 0) {
      // swing - jitter is uniform in [-jitter, +jitter]; floor at zero.
      uint64_t swing = rng.below(2 * profile.jitter_wh + 1);
      uint64_t shifted = checked_add(value, swing);
      value = shifted >= profile.jitter_wh ? shifted - profile.jitter_wh : 0;
    }
    if (profile.spike_prob.num > 0 &&
        rng.below(profile.spike_prob.den) < profile.spike_prob.num) {
      value = checked_add(value, profile.spike_wh);
    }
    trace.push_back(validate_measurement(std::min(value, v_max), v_max));
  }
  return trace;
}

FaultPlan::FaultPlan(std::vector<Outage> outages, uint32_t n, uint32_t t)
    : outages_(std::move(outages)) {
  for (const Outage& o : outages_) {
    if (o.meter_index == 0 || o.meter_index > n) {
      fail(Errc::InvalidArgument,
           "outage meter " + std::to_string(o.meter_index) + " outside 1.." + std::to_string(n));
    }
    if (o.from_slot == 0 || o.to_slot > t || o.from_slot > o.to_slot) {
      fail(Errc::InvalidArgument, "outage slots " + std::to_string(o.from_slot) + ".." +
                                      std::to_string(o.to_slot) + " invalid for t=" +
                                      std::to_string(t));
    }
  }
}

bool FaultPlan::is_faulted(uint32_t meter_index, uint32_t slot_j) const {
  for (const Outage& o : outages_) {
    if (o.meter_index == meter_index && slot_j >= o.from_slot && slot_j <= o.to_slot) {
      return true;
    }
  }
  return false;
}

std::vector<uint32_t> FaultPlan::faulted_meters(uint32_t slot_j) const {
  std::vector<uint32_t> down;
  for (const Outage& o : outages_) {
    if (slot_j >= o.from_slot && slot_j <= o.to_slot) down.push_back(o.meter_index);
  }
  std::sort(down.begin(), down.end());
  down.erase(std::unique(down.begin(), down.end()), down.end());
  return down;
}

std::vector<MeterId> make_roster(const std::string& region, uint32_t n) {
  std::vector<MeterId> roster;
  roster.reserve(n);
  for (uint32_t i = 1; i <= n; ++i) roster.push_back(MeterId{region, i});
  return roster;
}

ConsumptionMatrix generate_fleet(const LoadProfile& profile, const std::string& region,
                                 uint32_t n, uint32_t t, uint64_t v_max,
                                 const Rng& fleet_rng) {
  ConsumptionMatrix m(region, n, t, v_max);
  for (uint32_t i = 1; i <= n; ++i) {
    auto trace = generate_trace(profile, MeterId{region, i}, t, v_max, fleet_rng);
    for (const MeasurementValue& v : trace) m.append(i, v.wh);
  }
  return m;
}

}  // namespace gridagg
