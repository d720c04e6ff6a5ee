#include "gridagg/model.hpp"

#include "json_guard.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace gridagg {

nlohmann::json meter_to_json(const MeterId& meter) {
  return {{"region", meter.region}, {"index", meter.index}};
}

MeterId meter_from_json(const nlohmann::json& j) {
  return decode_json("meter id", [&] {
    return MeterId{j.at("region").get<std::string>(), j.at("index").get<uint32_t>()};
  });
}

MeasurementValue validate_measurement(uint64_t wh, uint64_t v_max) {
  if (v_max == 0) fail(Errc::InvalidArgument, "v_max must be positive");
  if (wh > v_max) {
    fail(Errc::OutOfRange,
         "reading " + std::to_string(wh) + " Wh exceeds v_max " + std::to_string(v_max));
  }
  return MeasurementValue{wh};
}

uint64_t checked_add(uint64_t a, uint64_t b) {
  if (a > std::numeric_limits<uint64_t>::max() - b) {
    fail(Errc::Overflow, "u64 sum overflow");
  }
  return a + b;
}

nlohmann::json AggregateRecord::to_json() const {
  return {{"slot", slot.j},
          {"duration_s", slot.duration_s},
          {"sum_wh", sum_wh},
          {"contributing", contributing},
          {"substituted", substituted},
          {"flagged", flagged}};
}

AggregateRecord AggregateRecord::from_json(const nlohmann::json& j) {
  return decode_json("aggregate record", [&] {
    AggregateRecord r;
    r.slot.j = j.at("slot").get<uint32_t>();
    r.slot.duration_s = j.at("duration_s").get<uint32_t>();
    r.sum_wh = j.at("sum_wh").get<uint64_t>();
    r.contributing = j.at("contributing").get<uint32_t>();
    r.substituted = j.at("substituted").get<uint32_t>();
    r.flagged = j.at("flagged").get<bool>();
    return r;
  });
}

nlohmann::json BillingRecord::to_json() const {
  return {{"meter", {{"region", meter.region}, {"index", meter.index}}},
          {"period", period},
          {"total_wh", total_wh}};
}

BillingRecord BillingRecord::from_json(const nlohmann::json& j) {
  return decode_json("billing record", [&] {
    BillingRecord r;
    r.meter.region = j.at("meter").at("region").get<std::string>();
    r.meter.index = j.at("meter").at("index").get<uint32_t>();
    r.period = j.at("period").get<uint32_t>();
    r.total_wh = j.at("total_wh").get<uint64_t>();
    return r;
  });
}

ConsumptionMatrix::ConsumptionMatrix(std::string region, uint32_t n, uint32_t t,
                                     uint64_t v_max)
    : region_(std::move(region)), n_(n), t_(t), v_max_(v_max), rows_(n) {
  if (n_ == 0) fail(Errc::InvalidArgument, "matrix needs at least one meter");
  if (t_ == 0) fail(Errc::InvalidArgument, "matrix needs at least one slot");
  if (v_max_ == 0) fail(Errc::InvalidArgument, "v_max must be positive");
}

void ConsumptionMatrix::check_meter(uint32_t meter_index) const {
  if (meter_index == 0 || meter_index > n_) {
    fail(Errc::InvalidArgument,
         "meter index " + std::to_string(meter_index) + " outside 1.." + std::to_string(n_));
  }
}

void ConsumptionMatrix::append(uint32_t meter_index, uint64_t wh) {
  check_meter(meter_index);
  auto& row = rows_[meter_index - 1];
  if (row.size() >= t_) {
    fail(Errc::InvalidArgument,
         "meter " + std::to_string(meter_index) + " already has " + std::to_string(t_) +
             " readings");
  }
  row.push_back(validate_measurement(wh, v_max_).wh);
}

uint64_t ConsumptionMatrix::at(uint32_t meter_index, uint32_t slot_j) const {
  check_meter(meter_index);
  const auto& row = rows_[meter_index - 1];
  if (slot_j == 0 || slot_j > row.size()) {
    fail(Errc::MissingValue, "meter " + std::to_string(meter_index) + " has no value at slot " +
                                 std::to_string(slot_j));
  }
  return row[slot_j - 1];
}

bool ConsumptionMatrix::has(uint32_t meter_index, uint32_t slot_j) const {
  check_meter(meter_index);
  return slot_j >= 1 && slot_j <= rows_[meter_index - 1].size();
}

uint32_t ConsumptionMatrix::row_length(uint32_t meter_index) const {
  check_meter(meter_index);
  return static_cast<uint32_t>(rows_[meter_index - 1].size());
}

MeterId ConsumptionMatrix::meter_id(uint32_t meter_index) const {
  check_meter(meter_index);
  return MeterId{region_, meter_index};
}

uint64_t slot_aggregate(const ConsumptionMatrix& m, uint32_t slot_j) {
  uint64_t sum = 0;
  for (uint32_t i = 1; i <= m.meter_count(); ++i) {
    sum = checked_add(sum, m.at(i, slot_j));
  }
  return sum;
}

BillingRecord billing_total(const ConsumptionMatrix& m, uint32_t meter_index,
                            uint32_t period) {
  if (m.row_length(meter_index) != m.slot_count()) {
    fail(Errc::IncompleteRow,
         "meter " + std::to_string(meter_index) + " has " +
             std::to_string(m.row_length(meter_index)) + " of " +
             std::to_string(m.slot_count()) + " readings");
  }
  uint64_t total = 0;
  for (uint32_t j = 1; j <= m.slot_count(); ++j) {
    total = checked_add(total, m.at(meter_index, j));
  }
  return BillingRecord{m.meter_id(meter_index), period, total};
}

void write_csv(const ConsumptionMatrix& m, std::ostream& out) {
  out << "meter,slot,wh\n";
  for (uint32_t i = 1; i <= m.meter_count(); ++i) {
    for (uint32_t j = 1; j <= m.row_length(i); ++j) {
      out << i << ',' << j << ',' << m.at(i, j) << '\n';
    }
  }
}

namespace {

uint64_t parse_u64_field(const std::string& field, size_t line_no, const char* name) {
  if (field.empty()) {
    fail(Errc::ParseError, "line " + std::to_string(line_no) + ": empty " + name);
  }
  uint64_t value = 0;
  for (char c : field) {
    if (c < '0' || c > '9') {
      fail(Errc::ParseError,
           "line " + std::to_string(line_no) + ": non-numeric " + name + " '" + field + "'");
    }
    uint64_t digit = static_cast<uint64_t>(c - '0');
    if (value > (std::numeric_limits<uint64_t>::max() - digit) / 10) {
      fail(Errc::ParseError, "line " + std::to_string(line_no) + ": " + name + " out of range");
    }
    value = value * 10 + digit;
  }
  return value;
}

}  // namespace

ConsumptionMatrix read_csv(std::istream& in, const std::string& region, uint32_t t,
                           uint64_t v_max) {
  std::string line;
  if (!std::getline(in, line)) fail(Errc::ParseError, "empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "meter,slot,wh") fail(Errc::ParseError, "expected header 'meter,slot,wh'");

  // Collect cells first; the matrix is built once we know n and can check
  // that each meter's slots form a contiguous prefix.
  std::map<uint32_t, std::map<uint32_t, uint64_t>> cells;
  uint32_t max_meter = 0;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string f_meter, f_slot, f_wh, extra;
    if (!std::getline(row, f_meter, ',') || !std::getline(row, f_slot, ',') ||
        !std::getline(row, f_wh, ',')) {
      fail(Errc::ParseError, "line " + std::to_string(line_no) + ": expected 3 fields");
    }
    if (std::getline(row, extra, ',')) {
      fail(Errc::ParseError, "line " + std::to_string(line_no) + ": too many fields");
    }
    uint64_t meter = parse_u64_field(f_meter, line_no, "meter");
    uint64_t slot = parse_u64_field(f_slot, line_no, "slot");
    uint64_t wh = parse_u64_field(f_wh, line_no, "wh");
    if (meter == 0 || meter > std::numeric_limits<uint32_t>::max()) {
      fail(Errc::ParseError, "line " + std::to_string(line_no) + ": bad meter index");
    }
    if (slot == 0 || slot > t) {
      fail(Errc::OutOfRange,
           "line " + std::to_string(line_no) + ": slot " + std::to_string(slot) +
               " outside 1.." + std::to_string(t));
    }
    auto [it, inserted] = cells[static_cast<uint32_t>(meter)].emplace(
        static_cast<uint32_t>(slot), wh);
    if (!inserted) {
      fail(Errc::ParseError, "line " + std::to_string(line_no) + ": duplicate cell");
    }
    max_meter = std::max(max_meter, static_cast<uint32_t>(meter));
  }
  if (max_meter == 0) fail(Errc::ParseError, "CSV has no data rows");

  ConsumptionMatrix m(region, max_meter, t, v_max);
  for (uint32_t i = 1; i <= max_meter; ++i) {
    auto it = cells.find(i);
    if (it == cells.end()) continue;  // a meter may have no readings yet
    uint32_t expect = 1;
    for (const auto& [slot, wh] : it->second) {
      if (slot != expect) {
        fail(Errc::IncompleteRow, "meter " + std::to_string(i) + " is missing slot " +
                                      std::to_string(expect));
      }
      m.append(i, wh);
      ++expect;
    }
  }
  return m;
}

}  // namespace gridagg
