#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gridagg/channel.hpp"
#include "gridagg/fleet.hpp"
#include "gridagg/hom.hpp"
#include "gridagg/model.hpp"

// The per-meter work of a simulation step — trace generation, AEAD
// sealing, homomorphic encryption, partial decryption — is embarrassingly
// parallel: each meter touches only its own state and its own RNG
// substream.  Each kernel here exists twice: a serial reference
// implementation, and an OpenMP variant that must produce bit-identical
// output (tests compare them element by element).  The *_auto dispatchers
// pick the OpenMP path when it is compiled in and asked for.
namespace gridagg::kernels {

bool openmp_enabled();
int thread_count();

// Trace generation for meters 1..n.
std::vector<std::vector<MeasurementValue>> generate_traces_serial(
    const LoadProfile& profile, const std::string& region, uint32_t n, uint32_t t,
    uint64_t v_max, const Rng& fleet_rng);
std::vector<std::vector<MeasurementValue>> generate_traces_parallel(
    const LoadProfile& profile, const std::string& region, uint32_t n, uint32_t t,
    uint64_t v_max, const Rng& fleet_rng);
std::vector<std::vector<MeasurementValue>> generate_traces_auto(
    const LoadProfile& profile, const std::string& region, uint32_t n, uint32_t t,
    uint64_t v_max, const Rng& fleet_rng, bool parallel);

// AEAD sealing of one slot's readings.  Each job carries the meter's own
// session and nonce counter; jobs must not alias.
struct SealJob {
  MeterId meter;
  MeasurementValue value;
  const SessionKeys* keys = nullptr;
  NonceCounter* nonces = nullptr;
};

std::vector<EncryptedMeasurement> seal_slot_serial(std::span<SealJob> jobs, TimeSlot slot);
std::vector<EncryptedMeasurement> seal_slot_parallel(std::span<SealJob> jobs, TimeSlot slot);
std::vector<EncryptedMeasurement> seal_slot_auto(std::span<SealJob> jobs, TimeSlot slot,
                                                 bool parallel);

// Homomorphic encryption of one slot's readings across producers.
std::vector<hom::HomCiphertext> hom_encrypt_slot_serial(
    std::span<hom::HomProducer* const> producers, std::span<const uint64_t> values,
    uint32_t slot_j);
std::vector<hom::HomCiphertext> hom_encrypt_slot_parallel(
    std::span<hom::HomProducer* const> producers, std::span<const uint64_t> values,
    uint32_t slot_j);
std::vector<hom::HomCiphertext> hom_encrypt_slot_auto(
    std::span<hom::HomProducer* const> producers, std::span<const uint64_t> values,
    uint32_t slot_j, bool parallel);

// Partial decryptions of one round's combined ciphertext.
std::vector<hom::PartialDecryption> hom_partial_slot_serial(
    std::span<hom::HomProducer* const> producers, const hom::HomCiphertext& combined,
    uint32_t slot_j);
std::vector<hom::PartialDecryption> hom_partial_slot_parallel(
    std::span<hom::HomProducer* const> producers, const hom::HomCiphertext& combined,
    uint32_t slot_j);
std::vector<hom::PartialDecryption> hom_partial_slot_auto(
    std::span<hom::HomProducer* const> producers, const hom::HomCiphertext& combined,
    uint32_t slot_j, bool parallel);

}  // namespace gridagg::kernels
