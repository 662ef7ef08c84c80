// Compiled with -mavx2 only; callers must check kernels::supported() first.
#include <immintrin.h>

#include <cstddef>

#include "specinterp/kernels.hpp"

namespace si::kernels::avx2 {

void smoothed_row(std::span<const double> counts, double alpha, double denom, std::span<double> out) {
  const std::size_t n = counts.size();
  const std::size_t blocks = n / 4 * 4;
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vd = _mm256_set1_pd(denom);
  for (std::size_t i = 0; i < blocks; i += 4) {
    __m256d c = _mm256_loadu_pd(counts.data() + i);
    _mm256_storeu_pd(out.data() + i, _mm256_div_pd(_mm256_add_pd(c, va), vd));
  }
  for (std::size_t i = blocks; i < n; ++i) out[i] = (counts[i] + alpha) / denom;
}

void scale(std::span<double> values, double factor) {
  const std::size_t n = values.size();
  const std::size_t blocks = n / 4 * 4;
  const __m256d vf = _mm256_set1_pd(factor);
  for (std::size_t i = 0; i < blocks; i += 4) {
    __m256d v = _mm256_loadu_pd(values.data() + i);
    _mm256_storeu_pd(values.data() + i, _mm256_mul_pd(v, vf));
  }
  for (std::size_t i = blocks; i < n; ++i) values[i] *= factor;
}

double lane_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  const std::size_t blocks = n / 4 * 4;
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < blocks; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(values.data() + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (std::size_t i = blocks; i < n; ++i) total += values[i];
  return total;
}

}  // namespace si::kernels::avx2
