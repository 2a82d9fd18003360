#include <cstdlib>
#include <string>

#include "lgsq/errors.hpp"
#include "lgsq/simd.hpp"

namespace lgsq::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("LGSQ_SIMD")) {
    const std::string choice(env);
    if (choice == "scalar") return Backend::scalar;
    if (choice == "avx2" && cpu_has_avx2()) return Backend::avx2;
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

Backend& current() {
  static Backend backend = initial_backend();
  return backend;
}

}  // namespace

std::string_view backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

bool backend_available(Backend b) { return b == Backend::scalar || cpu_has_avx2(); }

Backend active_backend() { return current(); }

void set_backend(Backend b) {
  if (!backend_available(b)) {
    throw InvalidParameter("SIMD backend " + std::string(backend_name(b)) + " is not available");
  }
  current() = b;
}

cplx gauss_tensor_sum(const QuadForm& q, std::span<const double> xs, std::span<const double> wx,
                      std::span<const double> ys, std::span<const double> wy) {
#if defined(__x86_64__) || defined(_M_X64)
  if (current() == Backend::avx2) return gauss_tensor_sum_avx2(q, xs, wx, ys, wy);
#endif
  return gauss_tensor_sum_scalar(q, xs, wx, ys, wy);
}

}  // namespace lgsq::simd
