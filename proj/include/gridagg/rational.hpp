#pragma once

#include <cstdint>

#include "gridagg/errors.hpp"

namespace gridagg {

// Exact nonnegative fraction, used for policy thresholds and probabilities
// so that boundary comparisons never depend on floating-point rounding.
struct Rational {
  uint64_t num = 0;
  uint64_t den = 1;

  constexpr Rational() = default;
  Rational(uint64_t n, uint64_t d) : num(n), den(d) {
    if (den == 0) fail(Errc::InvalidArgument, "rational with zero denominator");
  }

  // True iff a/b > num/den, computed exactly in 128-bit intermediates.
  bool exceeded_by(uint64_t a, uint64_t b) const {
    if (b == 0) fail(Errc::InvalidArgument, "ratio with zero denominator");
    using u128 = unsigned __int128;
    return u128(a) * den > u128(num) * b;
  }

  double as_double() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rational&, const Rational&) = default;
};

}  // namespace gridagg
