#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gridagg/errors.hpp"
#include "gridagg/rational.hpp"

#include "json.hpp"

namespace gridagg {

// Identity of one smart meter.  Indices are 1-based within a region.
struct MeterId {
  std::string region;
  uint32_t index = 0;

  friend auto operator<=>(const MeterId&, const MeterId&) = default;

  std::string to_string() const { return "meter/" + region + "/" + std::to_string(index); }
};

// One metering interval within a billing period.  Slot indices are 1-based;
// a period has t slots.
struct TimeSlot {
  uint32_t j = 0;
  uint32_t duration_s = 0;

  friend auto operator<=>(const TimeSlot&, const TimeSlot&) = default;
};

// A validated consumption reading in watt-hours.
struct MeasurementValue {
  uint64_t wh = 0;

  friend auto operator<=>(const MeasurementValue&, const MeasurementValue&) = default;
};

nlohmann::json meter_to_json(const MeterId& meter);
MeterId meter_from_json(const nlohmann::json& j);

// Range-checks a raw reading against the per-slot ceiling v_max.
MeasurementValue validate_measurement(uint64_t wh, uint64_t v_max);

// u64 addition that refuses to wrap.
uint64_t checked_add(uint64_t a, uint64_t b);

// Per-slot fleet total released to the utility.
struct AggregateRecord {
  TimeSlot slot;
  uint64_t sum_wh = 0;
  uint32_t contributing = 0;  // meters whose own reading entered the sum
  uint32_t substituted = 0;   // meters covered by a history substitute
  bool flagged = false;       // true when the fault policy refused a total

  nlohmann::json to_json() const;
  static AggregateRecord from_json(const nlohmann::json& j);

  friend bool operator==(const AggregateRecord&, const AggregateRecord&) = default;
};

// Per-meter total over one billing period, released after the last slot.
struct BillingRecord {
  MeterId meter;
  uint32_t period = 0;
  uint64_t total_wh = 0;

  nlohmann::json to_json() const;
  static BillingRecord from_json(const nlohmann::json& j);

  friend bool operator==(const BillingRecord&, const BillingRecord&) = default;
};

// Ground-truth consumption for one region and one billing period: n meter
// rows by up to t slots.  Rows grow append-only, one value per slot in
// order, so a row is always a prefix of the full period.  This is the
// simulator's reference for what every backend should reproduce.
class ConsumptionMatrix {
 public:
  ConsumptionMatrix(std::string region, uint32_t n, uint32_t t, uint64_t v_max);

  // Appends the next slot's reading for a meter (validated against v_max).
  void append(uint32_t meter_index, uint64_t wh);

  uint64_t at(uint32_t meter_index, uint32_t slot_j) const;
  bool has(uint32_t meter_index, uint32_t slot_j) const;
  uint32_t row_length(uint32_t meter_index) const;

  const std::string& region() const { return region_; }
  uint32_t meter_count() const { return n_; }
  uint32_t slot_count() const { return t_; }
  uint64_t v_max() const { return v_max_; }
  MeterId meter_id(uint32_t meter_index) const;

 private:
  void check_meter(uint32_t meter_index) const;

  std::string region_;
  uint32_t n_;
  uint32_t t_;
  uint64_t v_max_;
  std::vector<std::vector<uint64_t>> rows_;
};

// Fleet total for one slot.  Requires every meter to have a value there.
uint64_t slot_aggregate(const ConsumptionMatrix& m, uint32_t slot_j);

// Billing total for one meter.  Requires the row to span the full period.
BillingRecord billing_total(const ConsumptionMatrix& m, uint32_t meter_index,
                            uint32_t period);

// CSV exchange format: header "meter,slot,wh", one row per cell, meters
// and slots ascending.  Import accepts rows in any order but insists each
// meter's slots form a contiguous prefix 1..len.
void write_csv(const ConsumptionMatrix& m, std::ostream& out);
ConsumptionMatrix read_csv(std::istream& in, const std::string& region,
                           uint32_t t, uint64_t v_max);

}  // namespace gridagg
