#include "gridagg/rng.hpp"

#include "gridagg/errors.hpp"

namespace gridagg {

uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

uint64_t fnv1a64(std::string_view text) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (char c : text) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t Rng::below(uint64_t bound) {
  if (bound == 0) fail(Errc::InvalidArgument, "zero bound");
  // Reject draws from the final partial block so every residue is
  // equally likely.
  uint64_t limit = ~uint64_t{0} - ~uint64_t{0} % bound;
  for (;;) {
    uint64_t v = engine_();
    if (v < limit) return v % bound;
  }
}

void Rng::fill(std::span<uint8_t> out) {
  size_t i = 0;
  while (i < out.size()) {
    uint64_t v = engine_();
    for (int k = 0; k < 8 && i < out.size(); ++k, ++i) {
      out[i] = static_cast<uint8_t>(v >> (8 * k));
    }
  }
}

Bytes Rng::bytes(size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

Rng Rng::fork(std::string_view label) const {
  // Child seed is a SplitMix64 mix of the parent seed and the label hash,
  // so distinct labels give unrelated streams and the same label always
  // gives the same stream.
  uint64_t state = seed_ ^ fnv1a64(label);
  return Rng(splitmix64(state));
}

}  // namespace gridagg
