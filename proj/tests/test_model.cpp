#include <cstdint>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "gridagg/model.hpp"
#include "gridagg/rng.hpp"
#include "test_util.hpp"

using namespace gridagg;

TEST_CASE("meter ids order by region then index and print canonically") {
  MeterId a{"east", 2};
  MeterId b{"west", 1};
  MeterId c{"west", 2};
  CHECK(a < b);
  CHECK(b < c);
  CHECK(c.to_string() == "meter/west/2");

  nlohmann::json j = meter_to_json(c);
  CHECK(meter_from_json(j) == c);
}

TEST_CASE("measurement validation enforces the ceiling") {
  CHECK(validate_measurement(0, 5000).wh == 0);
  CHECK(validate_measurement(5000, 5000).wh == 5000);
  check_throws_errc(Errc::OutOfRange, [] { validate_measurement(5001, 5000); });
}

TEST_CASE("checked_add refuses to wrap") {
  CHECK(checked_add(3, 4) == 7);
  CHECK(checked_add(UINT64_MAX - 1, 1) == UINT64_MAX);
  check_throws_errc(Errc::Overflow, [] { checked_add(UINT64_MAX, 1); });
}

TEST_CASE("aggregate and billing records round trip through JSON") {
  AggregateRecord agg;
  agg.slot = TimeSlot{7, 900};
  agg.sum_wh = 123456;
  agg.contributing = 48;
  agg.substituted = 2;
  agg.flagged = false;
  CHECK(AggregateRecord::from_json(agg.to_json()) == agg);

  AggregateRecord flagged;
  flagged.slot = TimeSlot{8, 900};
  flagged.flagged = true;
  CHECK(AggregateRecord::from_json(flagged.to_json()) == flagged);

  BillingRecord bill{MeterId{"west", 3}, 1, 987654};
  CHECK(BillingRecord::from_json(bill.to_json()) == bill);
}

TEST_CASE("consumption matrix rows grow append-only") {
  ConsumptionMatrix m("west", 2, 3, 1000);
  CHECK(m.meter_count() == 2);
  CHECK(m.slot_count() == 3);
  CHECK_FALSE(m.has(1, 1));
  CHECK(m.row_length(1) == 0);

  m.append(1, 10);
  m.append(1, 20);
  m.append(2, 5);
  CHECK(m.at(1, 1) == 10);
  CHECK(m.at(1, 2) == 20);
  CHECK(m.at(2, 1) == 5);
  CHECK(m.row_length(1) == 2);
  CHECK(m.has(1, 2));
  CHECK_FALSE(m.has(1, 3));
  CHECK(m.meter_id(2) == MeterId{"west", 2});

  check_throws_errc(Errc::MissingValue, [&] { m.at(1, 3); });
  check_throws_errc(Errc::InvalidArgument, [&] { m.at(0, 1); });
  check_throws_errc(Errc::InvalidArgument, [&] { m.at(3, 1); });
  check_throws_errc(Errc::OutOfRange, [&] { m.append(2, 1001); });

  m.append(1, 30);
  check_throws_errc(Errc::InvalidArgument, [&] { m.append(1, 40); });  // row full
}

TEST_CASE("slot aggregate requires a value from every meter") {
  ConsumptionMatrix m("west", 3, 2, 1000);
  m.append(1, 10);
  m.append(2, 20);
  check_throws_errc(Errc::MissingValue, [&] { slot_aggregate(m, 1); });
  m.append(3, 30);
  CHECK(slot_aggregate(m, 1) == 60);
}

TEST_CASE("billing total requires a complete row") {
  ConsumptionMatrix m("west", 1, 3, 1000);
  m.append(1, 1);
  m.append(1, 2);
  check_throws_errc(Errc::IncompleteRow, [&] { billing_total(m, 1, 1); });
  m.append(1, 4);
  BillingRecord bill = billing_total(m, 1, 1);
  CHECK(bill.meter == MeterId{"west", 1});
  CHECK(bill.period == 1);
  CHECK(bill.total_wh == 7);
}

TEST_CASE("csv export uses the fixed header and row order") {
  ConsumptionMatrix m("west", 2, 2, 1000);
  m.append(1, 10);
  m.append(1, 20);
  m.append(2, 30);
  m.append(2, 40);
  std::ostringstream out;
  write_csv(m, out);
  CHECK(out.str() == "meter,slot,wh\n1,1,10\n1,2,20\n2,1,30\n2,2,40\n");
}

TEST_CASE("csv import round trips and accepts shuffled rows") {
  std::istringstream in("meter,slot,wh\n2,2,40\n1,1,10\n2,1,30\n1,2,20\n");
  ConsumptionMatrix m = read_csv(in, "west", 2, 1000);
  CHECK(m.meter_count() == 2);
  CHECK(m.at(1, 1) == 10);
  CHECK(m.at(1, 2) == 20);
  CHECK(m.at(2, 1) == 30);
  CHECK(m.at(2, 2) == 40);

  std::ostringstream out;
  write_csv(m, out);
  CHECK(out.str() == "meter,slot,wh\n1,1,10\n1,2,20\n2,1,30\n2,2,40\n");
}

TEST_CASE("csv import rejects malformed input") {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_csv(in, "west", 2, 1000);
  };
  check_throws_errc(Errc::ParseError, [&] { parse("meter;slot;wh\n"); });
  check_throws_errc(Errc::ParseError, [&] { parse("meter,slot,wh\n1,1\n"); });
  check_throws_errc(Errc::ParseError, [&] { parse("meter,slot,wh\n1,one,5\n"); });
  // Slot 2 present without slot 1: not a contiguous prefix.
  check_throws_errc(Errc::IncompleteRow, [&] { parse("meter,slot,wh\n1,2,10\n"); });
  // Duplicate cell.
  check_throws_errc(Errc::ParseError, [&] { parse("meter,slot,wh\n1,1,10\n1,1,11\n"); });
}

TEST_CASE("slot aggregate equals a reverse-order second summation") {
  ConsumptionMatrix m("west", 500, 1, 5000);
  Rng rng(20240501);
  std::vector<uint64_t> values;
  for (uint32_t i = 1; i <= 500; ++i) {
    uint64_t wh = rng.below(5001);
    values.push_back(wh);
    m.append(i, wh);
  }

  uint64_t reversed = 0;
  for (auto it = values.rbegin(); it != values.rend(); ++it) reversed += *it;
  CHECK(slot_aggregate(m, 1) == reversed);
}

TEST_CASE("billing total equals a pairwise-tree fold") {
  constexpr uint32_t t = 2880;
  ConsumptionMatrix m("west", 1, t, 5000);
  Rng rng(20240502);
  std::vector<uint64_t> layer;
  for (uint32_t j = 0; j < t; ++j) {
    uint64_t wh = rng.below(5001);
    layer.push_back(wh);
    m.append(1, wh);
  }

  // Fold pairwise instead of left to right: an ordering or accumulator bug
  // in the running total would disagree with this tree-shaped second opinion.
  while (layer.size() > 1) {
    std::vector<uint64_t> next;
    for (size_t k = 0; k + 1 < layer.size(); k += 2) {
      next.push_back(layer[k] + layer[k + 1]);
    }
    if (layer.size() % 2 == 1) next.push_back(layer.back());
    layer = std::move(next);
  }

  BillingRecord bill = billing_total(m, 1, 1);
  CHECK(bill.meter == MeterId{"west", 1});
  CHECK(bill.period == 1);
  CHECK(bill.total_wh == layer[0]);
}
