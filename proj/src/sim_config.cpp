#include <fstream>
#include <ostream>
#include <sstream>

#include "gridagg/errors.hpp"
#include "gridagg/kernels.hpp"
#include "gridagg/sim.hpp"
#include "json_guard.hpp"

namespace gridagg {

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Plain: return "plain";
    case Backend::Enclave: return "enclave";
    case Backend::Homomorphic: return "homomorphic";
  }
  return "?";
}

Backend backend_from_name(std::string_view name) {
  if (name == "plain") return Backend::Plain;
  if (name == "enclave") return Backend::Enclave;
  if (name == "homomorphic" || name == "hom") return Backend::Homomorphic;
  fail(Errc::ParseError, "unknown backend '" + std::string(name) + "'");
}

std::string measurements_topic(const std::string& region) {
  return "region/" + region + "/measurements";
}

std::string attestation_topic(const std::string& region) {
  return "region/" + region + "/attestation";
}

std::string hom_topic(const std::string& region) {
  return "region/" + region + "/hom";
}

std::string hom_feed_topic(const std::string& region) {
  return "region/" + region + "/hom-feed";
}

hom::GroupParams GroupSpec::resolve(const Rng& root) const {
  if (pqg_hex.has_value()) {
    return hom::GroupParams::checked(hom::mpz_from_hex((*pqg_hex)[0]),
                                     hom::mpz_from_hex((*pqg_hex)[1]),
                                     hom::mpz_from_hex((*pqg_hex)[2]));
  }
  if (bits.has_value()) {
    Rng rng = root.fork("group-setup");
    return hom::setup_group(*bits, rng);
  }
  if (preset == "bench512") return hom::bench_group_512();
  if (preset == "std2048") return hom::standard_group_2048();
  fail(Errc::ParseError, "unknown group preset '" + preset + "'");
}

nlohmann::json GroupSpec::to_json() const {
  if (pqg_hex.has_value()) {
    return {{"p", (*pqg_hex)[0]}, {"q", (*pqg_hex)[1]}, {"g", (*pqg_hex)[2]}};
  }
  if (bits.has_value()) return {{"bits", *bits}};
  return {{"preset", preset}};
}

GroupSpec GroupSpec::from_json(const nlohmann::json& j) {
  return decode_json("GroupSpec", [&] {
    GroupSpec spec;
    if (j.contains("p") || j.contains("q") || j.contains("g")) {
      spec.preset.clear();
      spec.pqg_hex = {{j.at("p").get<std::string>(), j.at("q").get<std::string>(),
                       j.at("g").get<std::string>()}};
      return spec;
    }
    if (j.contains("bits")) {
      spec.preset.clear();
      spec.bits = j.at("bits").get<unsigned>();
      return spec;
    }
    spec.preset = j.at("preset").get<std::string>();
    return spec;
  });
}

FaultPlan FleetConfig::fault_plan() const {
  return FaultPlan(faults, meters, slots_per_period);
}

namespace {

Rational rational_from_json(const nlohmann::json& j, const char* field) {
  const nlohmann::json& pair = j.at(field);
  if (!pair.is_array() || pair.size() != 2) {
    fail(Errc::ParseError, std::string(field) + " must be [num, den]");
  }
  return Rational{pair[0].get<uint64_t>(), pair[1].get<uint64_t>()};
}

}  // namespace

nlohmann::json FleetConfig::to_json() const {
  nlohmann::json j;
  j["region"] = region;
  j["meters"] = meters;
  j["slots_per_period"] = slots_per_period;
  j["slot_duration_s"] = slot_duration_s;
  j["v_max_wh"] = v_max_wh;
  j["seed"] = seed;
  j["profile"] = {{"base_wh", profile.base_wh},
                  {"jitter_wh", profile.jitter_wh},
                  {"spike_prob", {profile.spike_prob.num, profile.spike_prob.den}},
                  {"spike_wh", profile.spike_wh}};
  nlohmann::json fault_list = nlohmann::json::array();
  for (const Outage& o : faults) {
    fault_list.push_back(
        {{"meter", o.meter_index}, {"from_slot", o.from_slot}, {"to_slot", o.to_slot}});
  }
  j["faults"] = std::move(fault_list);
  j["policy"] = {{"window", policy.window},
                 {"max_failed_fraction",
                  {policy.max_failed_fraction.num, policy.max_failed_fraction.den}}};
  j["group"] = group.to_json();
  j["parallel"] = parallel;
  j["quote_verification"] = quote_verification == QuoteVerification::Self ? "self" : "service";
  return j;
}

FleetConfig FleetConfig::from_json(const nlohmann::json& j) {
  return decode_json("FleetConfig", [&] {
    FleetConfig cfg;
    cfg.region = j.at("region").get<std::string>();
    cfg.meters = j.at("meters").get<uint32_t>();
    if (cfg.region.empty()) fail(Errc::ParseError, "region must be non-empty");
    if (cfg.meters == 0) fail(Errc::ParseError, "fleet needs at least one meter");
    if (j.contains("slots_per_period")) {
      cfg.slots_per_period = j.at("slots_per_period").get<uint32_t>();
    }
    if (j.contains("slot_duration_s")) cfg.slot_duration_s = j.at("slot_duration_s").get<uint32_t>();
    if (j.contains("v_max_wh")) cfg.v_max_wh = j.at("v_max_wh").get<uint64_t>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
    if (cfg.slots_per_period == 0) fail(Errc::ParseError, "slots_per_period must be positive");
    if (cfg.slot_duration_s == 0) fail(Errc::ParseError, "slot_duration_s must be positive");
    if (cfg.v_max_wh == 0) fail(Errc::ParseError, "v_max_wh must be positive");
    if (j.contains("profile")) {
      const nlohmann::json& p = j.at("profile");
      if (p.contains("base_wh")) cfg.profile.base_wh = p.at("base_wh").get<uint64_t>();
      if (p.contains("jitter_wh")) cfg.profile.jitter_wh = p.at("jitter_wh").get<uint64_t>();
      if (p.contains("spike_prob")) cfg.profile.spike_prob = rational_from_json(p, "spike_prob");
      if (p.contains("spike_wh")) cfg.profile.spike_wh = p.at("spike_wh").get<uint64_t>();
    }
    if (j.contains("faults")) {
      for (const nlohmann::json& f : j.at("faults")) {
        cfg.faults.push_back(Outage{f.at("meter").get<uint32_t>(),
                                    f.at("from_slot").get<uint32_t>(),
                                    f.at("to_slot").get<uint32_t>()});
      }
    }
    if (j.contains("policy")) {
      const nlohmann::json& p = j.at("policy");
      if (p.contains("window")) cfg.policy.window = p.at("window").get<uint32_t>();
      if (p.contains("max_failed_fraction")) {
        cfg.policy.max_failed_fraction = rational_from_json(p, "max_failed_fraction");
      }
    }
    if (j.contains("group")) cfg.group = GroupSpec::from_json(j.at("group"));
    if (j.contains("parallel")) cfg.parallel = j.at("parallel").get<bool>();
    if (j.contains("quote_verification")) {
      std::string mode = j.at("quote_verification").get<std::string>();
      if (mode == "self") {
        cfg.quote_verification = QuoteVerification::Self;
      } else if (mode == "service") {
        cfg.quote_verification = QuoteVerification::Service;
      } else {
        fail(Errc::ParseError, "quote_verification must be 'self' or 'service'");
      }
    }
    cfg.fault_plan();  // validates the outage list against the fleet shape
    return cfg;
  });
}

FleetConfig FleetConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) fail(Errc::ParseError, "config is not valid JSON: " + path.string());
  return from_json(j);
}

nlohmann::json SlotResult::to_json() const {
  return {{"slot", slot},
          {"sum_wh", sum_wh},
          {"contributing", contributing},
          {"substituted", substituted},
          {"flagged", flagged},
          {"aborted", aborted},
          {"abort_reason", abort_reason},
          {"latency_ms", latency_ms}};
}

nlohmann::json BackendRun::to_json() const {
  nlohmann::json slot_list = nlohmann::json::array();
  for (const SlotResult& s : slots) slot_list.push_back(s.to_json());
  nlohmann::json billing_list = nlohmann::json::array();
  for (const BillingRecord& b : billing) billing_list.push_back(b.to_json());
  return {{"backend", backend_name(backend)},
          {"slots", std::move(slot_list)},
          {"billing", std::move(billing_list)},
          {"wall_ms", wall_ms}};
}

nlohmann::json AuditReport::to_json() const {
  return {{"clean", clean},
          {"aggregate_records", aggregate_records},
          {"billing_records", billing_records},
          {"violations", violations}};
}

bool RunReport::ok() const {
  if (!mismatches.empty()) return false;
  for (const BackendRun& run : backends) {
    for (const SlotResult& s : run.slots) {
      if (s.aborted) return false;
    }
  }
  return true;
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json backend_list = nlohmann::json::array();
  for (const BackendRun& run : backends) backend_list.push_back(run.to_json());
  nlohmann::json j;
  j["run"] = {{"config", fleet.to_json()},
              {"slots_run", slots_run},
              {"seed", seed},
              {"parallel", parallel},
              {"threads", threads},
              {"rng", rng_algorithm}};
  j["backends"] = std::move(backend_list);
  j["mismatches"] = mismatches;
  if (audit.has_value()) j["audit"] = audit->to_json();
  if (enclave_footprint_bytes.has_value()) {
    j["enclave_footprint_per_meter_bytes"] = *enclave_footprint_bytes;
  }
  j["ok"] = ok();
  return j;
}

nlohmann::json BenchRow::to_json() const {
  return {{"backend", backend_name(backend)},
          {"n", n},
          {"mean_ms", mean_ms},
          {"ci95_ms", ci95_ms},
          {"runs", runs}};
}

void write_bench_csv(std::ostream& out, std::span<const BenchRow> rows) {
  out << "backend,n,mean_ms,ci95_ms\n";
  for (const BenchRow& row : rows) {
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(3);
    line << backend_name(row.backend) << ',' << row.n << ',' << row.mean_ms << ','
         << row.ci95_ms;
    out << line.str() << '\n';
  }
}

}  // namespace gridagg
