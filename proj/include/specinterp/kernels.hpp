#pragma once

#include <span>
#include <string_view>

// Dense per-vocabulary arithmetic used by the n-gram model. Every backend
// performs the same IEEE operations in the same order, so results are
// bit-identical across backends (checked by tests/test_kernels.cpp).

namespace si::kernels {

enum class Backend { Scalar, Avx2, Neon };

std::string_view name(Backend b);

bool supported(Backend b);

/// Backend chosen at startup: the widest supported one, unless the
/// SPECINTERP_KERNELS environment variable names another ("scalar", ...).
Backend active_backend();

/// Throws std::invalid_argument if `b` is not supported on this machine.
void set_backend(Backend b);

// out[i] = (counts[i] + alpha) / denom. `out` must be at least as long as `counts`.
void smoothed_row(std::span<const double> counts, double alpha, double denom, std::span<double> out);

// values[i] *= factor
void scale(std::span<double> values, double factor);

// Sum with four interleaved accumulators, reduced as (l0 + l1) + (l2 + l3),
// then the tail (size % 4) added left to right.
double lane_sum(std::span<const double> values);

namespace scalar {
void smoothed_row(std::span<const double> counts, double alpha, double denom, std::span<double> out);
void scale(std::span<double> values, double factor);
double lane_sum(std::span<const double> values);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void smoothed_row(std::span<const double> counts, double alpha, double denom, std::span<double> out);
void scale(std::span<double> values, double factor);
double lane_sum(std::span<const double> values);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
void smoothed_row(std::span<const double> counts, double alpha, double denom, std::span<double> out);
void scale(std::span<double> values, double factor);
double lane_sum(std::span<const double> values);
}  // namespace neon
#endif

}  // namespace si::kernels
