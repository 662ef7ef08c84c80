#include <cstddef>

#include "specinterp/kernels.hpp"

namespace si::kernels::scalar {

void smoothed_row(std::span<const double> counts, double alpha, double denom, std::span<double> out) {
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = (counts[i] + alpha) / denom;
}

void scale(std::span<double> values, double factor) {
  for (double& v : values) v *= factor;
}

double lane_sum(std::span<const double> values) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  const std::size_t n = values.size();
  const std::size_t blocks = n / 4 * 4;
  for (std::size_t i = 0; i < blocks; i += 4) {
    acc[0] += values[i];
    acc[1] += values[i + 1];
    acc[2] += values[i + 2];
    acc[3] += values[i + 3];
  }
  double total = (acc[0] + acc[1]) + (acc[2] + acc[3]);
  for (std::size_t i = blocks; i < n; ++i) total += values[i];
  return total;
}

}  // namespace si::kernels::scalar
