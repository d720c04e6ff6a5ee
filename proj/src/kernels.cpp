#include "gridagg/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <exception>

#include "gridagg/errors.hpp"

namespace gridagg::kernels {

bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

// OpenMP loop that traps worker exceptions and rethrows the first one on
// the calling thread (an exception escaping a parallel region would
// terminate the process).
template <typename Body>
void parallel_for(int64_t count, Body&& body) {
  std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical
      if (err == nullptr) err = std::current_exception();
    }
  }
  if (err != nullptr) std::rethrow_exception(err);
}

EncryptedMeasurement seal_one(SealJob& job, TimeSlot slot) {
  if (job.keys == nullptr || job.nonces == nullptr) {
    fail(Errc::InvalidArgument, "seal job without session material");
  }
  return seal_measurement(job.meter, job.value, slot, *job.keys, *job.nonces);
}

}  // namespace

std::vector<std::vector<MeasurementValue>> generate_traces_serial(
    const LoadProfile& profile, const std::string& region, uint32_t n, uint32_t t,
    uint64_t v_max, const Rng& fleet_rng) {
  std::vector<std::vector<MeasurementValue>> traces(n);
  for (uint32_t i = 1; i <= n; ++i) {
    traces[i - 1] = generate_trace(profile, MeterId{region, i}, t, v_max, fleet_rng);
  }
  return traces;
}

std::vector<std::vector<MeasurementValue>> generate_traces_parallel(
    const LoadProfile& profile, const std::string& region, uint32_t n, uint32_t t,
    uint64_t v_max, const Rng& fleet_rng) {
  std::vector<std::vector<MeasurementValue>> traces(n);
  parallel_for(n, [&](int64_t i) {
    traces[i] = generate_trace(profile, MeterId{region, static_cast<uint32_t>(i + 1)}, t,
                               v_max, fleet_rng);
  });
  return traces;
}

std::vector<std::vector<MeasurementValue>> generate_traces_auto(
    const LoadProfile& profile, const std::string& region, uint32_t n, uint32_t t,
    uint64_t v_max, const Rng& fleet_rng, bool parallel) {
  if (parallel && openmp_enabled()) {
    return generate_traces_parallel(profile, region, n, t, v_max, fleet_rng);
  }
  return generate_traces_serial(profile, region, n, t, v_max, fleet_rng);
}

std::vector<EncryptedMeasurement> seal_slot_serial(std::span<SealJob> jobs, TimeSlot slot) {
  std::vector<EncryptedMeasurement> out(jobs.size());
  for (size_t i = 0; i < jobs.size(); ++i) out[i] = seal_one(jobs[i], slot);
  return out;
}

std::vector<EncryptedMeasurement> seal_slot_parallel(std::span<SealJob> jobs, TimeSlot slot) {
  std::vector<EncryptedMeasurement> out(jobs.size());
  parallel_for(static_cast<int64_t>(jobs.size()),
               [&](int64_t i) { out[i] = seal_one(jobs[i], slot); });
  return out;
}

std::vector<EncryptedMeasurement> seal_slot_auto(std::span<SealJob> jobs, TimeSlot slot,
                                                 bool parallel) {
  if (parallel && openmp_enabled()) return seal_slot_parallel(jobs, slot);
  return seal_slot_serial(jobs, slot);
}

std::vector<hom::HomCiphertext> hom_encrypt_slot_serial(
    std::span<hom::HomProducer* const> producers, std::span<const uint64_t> values,
    uint32_t slot_j) {
  if (producers.size() != values.size()) {
    fail(Errc::InvalidArgument, "one value per producer required");
  }
  std::vector<hom::HomCiphertext> out(producers.size());
  for (size_t i = 0; i < producers.size(); ++i) {
    out[i] = producers[i]->encrypt_for_slot(slot_j, values[i]);
  }
  return out;
}

std::vector<hom::HomCiphertext> hom_encrypt_slot_parallel(
    std::span<hom::HomProducer* const> producers, std::span<const uint64_t> values,
    uint32_t slot_j) {
  if (producers.size() != values.size()) {
    fail(Errc::InvalidArgument, "one value per producer required");
  }
  std::vector<hom::HomCiphertext> out(producers.size());
  parallel_for(static_cast<int64_t>(producers.size()),
               [&](int64_t i) { out[i] = producers[i]->encrypt_for_slot(slot_j, values[i]); });
  return out;
}

std::vector<hom::HomCiphertext> hom_encrypt_slot_auto(
    std::span<hom::HomProducer* const> producers, std::span<const uint64_t> values,
    uint32_t slot_j, bool parallel) {
  if (parallel && openmp_enabled()) {
    return hom_encrypt_slot_parallel(producers, values, slot_j);
  }
  return hom_encrypt_slot_serial(producers, values, slot_j);
}

std::vector<hom::PartialDecryption> hom_partial_slot_serial(
    std::span<hom::HomProducer* const> producers, const hom::HomCiphertext& combined,
    uint32_t slot_j) {
  std::vector<hom::PartialDecryption> out(producers.size());
  for (size_t i = 0; i < producers.size(); ++i) {
    out[i] = producers[i]->partial_for_slot(slot_j, combined);
  }
  return out;
}

std::vector<hom::PartialDecryption> hom_partial_slot_parallel(
    std::span<hom::HomProducer* const> producers, const hom::HomCiphertext& combined,
    uint32_t slot_j) {
  std::vector<hom::PartialDecryption> out(producers.size());
  parallel_for(static_cast<int64_t>(producers.size()),
               [&](int64_t i) { out[i] = producers[i]->partial_for_slot(slot_j, combined); });
  return out;
}

std::vector<hom::PartialDecryption> hom_partial_slot_auto(
    std::span<hom::HomProducer* const> producers, const hom::HomCiphertext& combined,
    uint32_t slot_j, bool parallel) {
  if (parallel && openmp_enabled()) {
    return hom_partial_slot_parallel(producers, combined, slot_j);
  }
  return hom_partial_slot_serial(producers, combined, slot_j);
}

}  // namespace gridagg::kernels
