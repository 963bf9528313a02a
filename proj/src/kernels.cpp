#include "pgts/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace pgts::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("PGTS_BACKEND")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::Avx2;
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

Backend g_backend = initial_backend();

}  // namespace

Backend active() { return g_backend; }

void force(Backend b) {
  if (b == Backend::Avx2 && !cpu_has_avx2()) b = Backend::Scalar;
  g_backend = b;
}

bool avx2_supported() { return cpu_has_avx2(); }

const char* name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

#if defined(__x86_64__) || defined(_M_X64)
#define PGTS_DISPATCH(fn, ...)                  \
  if (g_backend == Backend::Avx2) {             \
    detail::fn##_avx2(__VA_ARGS__);             \
  } else {                                      \
    detail::fn##_scalar(__VA_ARGS__);           \
  }
#else
#define PGTS_DISPATCH(fn, ...) detail::fn##_scalar(__VA_ARGS__);
#endif

void fill_u64(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
              std::size_t n, std::uint64_t* out) {
  PGTS_DISPATCH(fill_u64, seed, stream, pos, n, out)
}

void fill_uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
                    std::size_t n, double* out) {
  PGTS_DISPATCH(fill_uniform01, seed, stream, pos, n, out)
}

void fill_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
                 std::size_t n, double* out) {
  PGTS_DISPATCH(fill_normal, seed, stream, pos, n, out)
}

void reshape_arms(std::size_t n, const double* lambda_m, const double* lambda_sigma,
                  const double* v_decay, const double* sum, const double* count,
                  double* mean, double* var) {
  PGTS_DISPATCH(reshape_arms, n, lambda_m, lambda_sigma, v_decay, sum, count, mean, var)
}

void shift_scale(std::size_t n, const double* mean, const double* var,
                 const double* z, double* out) {
  PGTS_DISPATCH(shift_scale, n, mean, var, z, out)
}

void score_arms(std::size_t n, const double* theta, const double* mean,
                const double* var, const double* sum, const double* count,
                const double* lambda_m, const double* lambda_sigma, double log_decay,
                double* s_m, double* s_v, double* s_sig, double* s_gam) {
  PGTS_DISPATCH(score_arms, n, theta, mean, var, sum, count, lambda_m, lambda_sigma,
                log_decay, s_m, s_v, s_sig, s_gam)
}

#undef PGTS_DISPATCH

}  // namespace pgts::kernels
