#include "gridagg/stats.hpp"

#include <array>
#include <cmath>

#include "gridagg/errors.hpp"

namespace gridagg {

double student_t_95(size_t df) {
  // Two-sided 95% critical values for df = 1..30.
  static constexpr std::array<double, 30> kTable{
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (df == 0) fail(Errc::InvalidArgument, "zero degrees of freedom");
  if (df <= kTable.size()) return kTable[df - 1];
  return 1.960;
}

Summary summarize(std::span<const double> samples) {
  if (samples.empty()) fail(Errc::InvalidArgument, "no samples");
  Summary s;
  s.count = samples.size();
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count == 1) return s;
  double sq = 0.0;
  for (double v : samples) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(s.count - 1));
  s.ci95_half = student_t_95(s.count - 1) * s.stddev /
                std::sqrt(static_cast<double>(s.count));
  return s;
}

}  // namespace gridagg
