#pragma once

#include <cstddef>
#include <span>

namespace gridagg {

// Sample summary for benchmark timings.
struct Summary {
  double mean = 0.0;
  double stddev = 0.0;     // sample standard deviation (n-1)
  double ci95_half = 0.0;  // half-width of the 95% confidence interval
  size_t count = 0;
};

Summary summarize(std::span<const double> samples);

// Two-sided 95% Student-t critical value for the given degrees of freedom
// (normal approximation beyond the tabulated range).
double student_t_95(size_t df);

}  // namespace gridagg
