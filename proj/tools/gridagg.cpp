#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gridagg/errors.hpp"
#include "gridagg/sim.hpp"

namespace {

using namespace gridagg;

std::vector<Backend> backends_from_arg(const std::string& arg) {
  if (arg == "all") {
    return {Backend::Plain, Backend::Enclave, Backend::Homomorphic};
  }
  return {backend_from_name(arg)};
}

void print_run_summary(const RunReport& report) {
  for (const BackendRun& run : report.backends) {
    uint32_t released = 0;
    uint32_t flagged = 0;
    uint32_t aborted = 0;
    for (const SlotResult& s : run.slots) {
      if (s.aborted) {
        ++aborted;
      } else if (s.flagged) {
        ++flagged;
      } else {
        ++released;
      }
    }
    std::cout << backend_name(run.backend) << ": " << run.slots.size() << " slots ("
              << released << " released, " << flagged << " flagged, " << aborted
              << " aborted), " << run.billing.size() << " billing records, wall "
              << run.wall_ms << " ms\n";
    for (const SlotResult& s : run.slots) {
      if (s.aborted) {
        std::cout << "  slot " << s.slot << " aborted: " << s.abort_reason << "\n";
      }
    }
  }
  if (report.audit.has_value()) {
    std::cout << "audit: " << (report.audit->clean ? "clean" : "VIOLATIONS") << " ("
              << report.audit->aggregate_records << " aggregate, "
              << report.audit->billing_records << " billing records on the utility topic)\n";
  }
  if (report.enclave_footprint_bytes.has_value()) {
    std::cout << "enclave footprint: " << *report.enclave_footprint_bytes
              << " bytes per meter\n";
  }
  if (report.mismatches.empty()) {
    std::cout << "mismatches: none\n";
  } else {
    std::cout << "mismatches:\n";
    for (const std::string& m : report.mismatches) std::cout << "  " << m << "\n";
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot write " + path);
  out << text;
  if (!out) fail(Errc::IoError, "short write to " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving smart-meter aggregation: simulator and benchmarks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string backend_arg = "all";
  std::string out_path;
  std::optional<uint64_t> seed;

  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "Run the fleet through the selected backends");
  uint32_t slots = 0;
  simulate_cmd->add_option("--config", config_path, "fleet config JSON")->required();
  simulate_cmd->add_option("--backend", backend_arg,
                           "plain, enclave, homomorphic, or all");
  simulate_cmd->add_option("--slots", slots, "slots to run (default: the whole period)");
  simulate_cmd->add_option("--seed", seed, "override the config seed");
  simulate_cmd->add_option("--out", out_path, "write the full run report JSON here");

  CLI::App* bench_cmd =
      app.add_subcommand("bench", "Per-round latency comparison across fleet sizes");
  std::vector<uint32_t> sizes{10, 50, 100, 200};
  uint32_t runs = 10;
  bench_cmd->add_option("--config", config_path, "fleet config JSON")->required();
  bench_cmd->add_option("--backend", backend_arg, "plain, enclave, homomorphic, or all");
  bench_cmd->add_option("--sizes", sizes, "fleet sizes to sweep")->delimiter(',');
  bench_cmd->add_option("--runs", runs, "measured rounds per point");
  bench_cmd->add_option("--seed", seed, "override the config seed");
  bench_cmd->add_option("--out", out_path, "write the CSV here instead of stdout");

  CLI::App* keygen_cmd =
      app.add_subcommand("keygen", "Write the key material a run would derive");
  std::string key_dir = "keys";
  keygen_cmd->add_option("--config", config_path, "fleet config JSON")->required();
  keygen_cmd->add_option("--out", key_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    FleetConfig fleet = FleetConfig::load(config_path);
    if (seed.has_value()) fleet.seed = *seed;

    if (simulate_cmd->parsed()) {
      RunConfig config;
      config.fleet = fleet;
      config.backends = backends_from_arg(backend_arg);
      if (slots != 0) config.slots = slots;
      RunReport report = simulate(config);
      if (!out_path.empty()) {
        write_text_file(out_path, report.to_json().dump(2) + "\n");
        std::cout << "report written to " << out_path << "\n";
      }
      print_run_summary(report);
      return report.ok() ? 0 : 1;
    }

    if (bench_cmd->parsed()) {
      std::vector<Backend> backends = backends_from_arg(backend_arg);
      std::vector<BenchRow> rows = bench(fleet, backends, sizes, runs);
      if (out_path.empty()) {
        write_bench_csv(std::cout, rows);
      } else {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) fail(Errc::IoError, "cannot write " + out_path);
        write_bench_csv(out, rows);
        std::cout << "benchmark written to " << out_path << "\n";
      }
      return 0;
    }

    keygen(fleet, key_dir);
    std::cout << "key material for " << fleet.meters << " meters written to " << key_dir
              << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
