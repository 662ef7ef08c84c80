#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "specinterp/kernels.hpp"

namespace si::kernels {

namespace {

struct Table {
  Backend backend;
  void (*smoothed_row)(std::span<const double>, double, double, std::span<double>);
  void (*scale)(std::span<double>, double);
  double (*lane_sum)(std::span<const double>);
};

constexpr Table kScalar{Backend::Scalar, &scalar::smoothed_row, &scalar::scale, &scalar::lane_sum};
#if defined(__x86_64__) || defined(_M_X64)
constexpr Table kAvx2{Backend::Avx2, &avx2::smoothed_row, &avx2::scale, &avx2::lane_sum};
#endif
#if defined(__aarch64__)
constexpr Table kNeon{Backend::Neon, &neon::smoothed_row, &neon::scale, &neon::lane_sum};
#endif

const Table* table_for(Backend b) {
  switch (b) {
    case Backend::Scalar: return &kScalar;
    case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return &kAvx2;
#else
      return nullptr;
#endif
    case Backend::Neon:
#if defined(__aarch64__)
      return &kNeon;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const Table* initial_table() {
  if (const char* env = std::getenv("SPECINTERP_KERNELS")) {
    const std::string want(env);
    for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
      if (want == name(b) && supported(b)) return table_for(b);
    }
  }
  if (supported(Backend::Avx2)) return table_for(Backend::Avx2);
  if (supported(Backend::Neon)) return table_for(Backend::Neon);
  return &kScalar;
}

std::atomic<const Table*>& active() {
  static std::atomic<const Table*> t{initial_table()};
  return t;
}

}  // namespace

std::string_view name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

bool supported(Backend b) {
  switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() { return active().load()->backend; }

void set_backend(Backend b) {
  if (!supported(b)) throw std::invalid_argument("kernel backend not supported: " + std::string(name(b)));
  active().store(table_for(b));
}

void smoothed_row(std::span<const double> counts, double alpha, double denom, std::span<double> out) {
  active().load()->smoothed_row(counts, alpha, denom, out);
}

void scale(std::span<double> values, double factor) { active().load()->scale(values, factor); }

double lane_sum(std::span<const double> values) { return active().load()->lane_sum(values); }

}  // namespace si::kernels
