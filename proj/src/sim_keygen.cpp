#include <cstdio>
#include <fstream>
#include <utility>
#include <vector>

#include "gridagg/attest.hpp"
#include "gridagg/errors.hpp"
#include "gridagg/sim.hpp"

namespace gridagg {

namespace {

Key256 seed32(const Rng& root, const std::string& label) {
  Key256 seed{};
  root.fork(label).fill(seed);
  return seed;
}

void write_fields(const std::filesystem::path& path,
                  const std::vector<std::pair<std::string, std::string>>& fields) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());
  for (const auto& [key, value] : fields) {
    out << key << " = " << value << '\n';
  }
  if (!out) fail(Errc::IoError, "short write to " + path.string());
}

void write_signing_key(const std::filesystem::path& path, const SigningKey& key) {
  write_fields(path, {{"seed", to_hex(key.seed)}, {"public", to_hex(key.public_key)}});
}

}  // namespace

void keygen(const FleetConfig& fleet, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(Errc::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  Rng root(fleet.seed);
  SigningKey utility_key = SigningKey::from_seed(seed32(root, "utility-key"));
  SigningKey authority_key = SigningKey::from_seed(seed32(root, "authority-key"));
  UtilityProvisioning utility(utility_key);
  hom::GroupParams group = fleet.group.resolve(root);

  write_signing_key(out_dir / "utility.key", utility_key);
  write_signing_key(out_dir / "authority.key", authority_key);
  write_fields(out_dir / "group.params", {{"p", hom::mpz_to_hex(group.p)},
                                          {"q", hom::mpz_to_hex(group.q)},
                                          {"g", hom::mpz_to_hex(group.g)}});

  for (uint32_t i = 1; i <= fleet.meters; ++i) {
    MeterId meter{fleet.region, i};
    SigningKey meter_key =
        SigningKey::from_seed(seed32(root, "meter-key/" + std::to_string(i)));
    Credential credential = utility.issue(meter, meter_key.public_key);
    Rng key_rng = root.fork("hom-key/" + std::to_string(i));
    hom::ProducerKeys producer = hom::gen_producer_keys(group, credential, key_rng);

    char name[32];
    std::snprintf(name, sizeof name, "meter_%04u.key", i);
    write_fields(out_dir / name, {{"meter", meter.to_string()},
                                  {"signing_seed", to_hex(meter_key.seed)},
                                  {"verify_key", to_hex(meter_key.public_key)},
                                  {"credential_sig", to_hex(credential.signature)},
                                  {"hom_x", hom::mpz_to_hex(producer.x)},
                                  {"hom_y", hom::mpz_to_hex(producer.y)}});
  }
}

}  // namespace gridagg
