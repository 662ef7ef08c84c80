#if defined(__aarch64__)
#include <arm_neon.h>

#include <cstddef>

#include "specinterp/kernels.hpp"

namespace si::kernels::neon {

void smoothed_row(std::span<const double> counts, double alpha, double denom, std::span<double> out) {
  const std::size_t n = counts.size();
  const std::size_t blocks = n / 2 * 2;
  const float64x2_t va = vdupq_n_f64(alpha);
  const float64x2_t vd = vdupq_n_f64(denom);
  for (std::size_t i = 0; i < blocks; i += 2) {
    float64x2_t c = vld1q_f64(counts.data() + i);
    vst1q_f64(out.data() + i, vdivq_f64(vaddq_f64(c, va), vd));
  }
  for (std::size_t i = blocks; i < n; ++i) out[i] = (counts[i] + alpha) / denom;
}

void scale(std::span<double> values, double factor) {
  const std::size_t n = values.size();
  const std::size_t blocks = n / 2 * 2;
  const float64x2_t vf = vdupq_n_f64(factor);
  for (std::size_t i = 0; i < blocks; i += 2) {
    vst1q_f64(values.data() + i, vmulq_f64(vld1q_f64(values.data() + i), vf));
  }
  for (std::size_t i = blocks; i < n; ++i) values[i] *= factor;
}

// Two 2-lane accumulators give the same four interleaved lanes as the
// scalar reference.
double lane_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  const std::size_t blocks = n / 4 * 4;
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  for (std::size_t i = 0; i < blocks; i += 4) {
    lo = vaddq_f64(lo, vld1q_f64(values.data() + i));
    hi = vaddq_f64(hi, vld1q_f64(values.data() + i + 2));
  }
  double total = (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) + (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
  for (std::size_t i = blocks; i < n; ++i) total += values[i];
  return total;
}

}  // namespace si::kernels::neon
#endif
