#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "gridagg/bytes.hpp"

namespace gridagg {

// Deterministic random source.  All simulation randomness flows through
// this type so that a run is reproducible from its seed alone, on any
// platform.  Two rules keep that true:
//
//  * bounded draws use explicit rejection sampling (std::uniform_int_distribution
//    is not specified bit-for-bit across standard libraries), and
//  * independent consumers get their own substream via fork(), keyed by a
//    label, so interleaving or parallelising consumers never changes the
//    values any one of them sees.
class Rng {
 public:
  static constexpr std::string_view kAlgorithmId = "mt19937_64+splitmix64-fork/v1";

  explicit Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, bound) via rejection sampling.  bound must be nonzero.
  uint64_t below(uint64_t bound);

  void fill(std::span<uint8_t> out);
  Bytes bytes(size_t n);

  // Child stream derived from this stream's seed and the label.  The
  // derivation ignores how much the parent has already drawn, so a fork
  // with a given label is stable no matter when it happens.
  Rng fork(std::string_view label) const;

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

// SplitMix64 step; used to mix seeds for substreams.
uint64_t splitmix64(uint64_t& state);

// FNV-1a over a label, for turning fork labels into seed material.
uint64_t fnv1a64(std::string_view text);

}  // namespace gridagg
