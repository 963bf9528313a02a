#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops: counter-based random number generation,
// normal quantiles, and the per-arm sampling-distribution math. Every
// kernel has a scalar reference implementation and (on x86-64) an AVX2
// variant selected at runtime. The two variants are bit-identical: both
// use single-rounding fma and correctly rounded sqrt/div only, so the
// choice of backend never changes a simulation result.

namespace pgts::kernels {

enum class Backend { Scalar, Avx2 };

// Runtime-selected backend. Honors PGTS_BACKEND=scalar|avx2 in the
// environment, otherwise picks AVX2 when the CPU supports AVX2+FMA.
Backend active();
void force(Backend b);
bool avx2_supported();
const char* name(Backend b);

// --- counter-based generation ------------------------------------------
//
// Value #i of stream (seed, stream) is a pure function of (seed, stream, i);
// fill_* write n consecutive values starting at index pos. Uniforms lie in
// the open interval (0, 1); normals are standard-normal via the inverse CDF.

void fill_u64(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
              std::size_t n, std::uint64_t* out);
void fill_uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
                    std::size_t n, double* out);
void fill_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
                 std::size_t n, double* out);

// Inverse standard-normal CDF (Wichura's AS 241 rational approximation,
// absolute error below 1e-9 over [1e-300, 1 - 1e-16]). Returns -inf/+inf
// at p = 0 / p = 1.
double normal_quantile(double p);

// --- per-arm sampling-distribution math ----------------------------------
//
// All arrays have length n and may not alias.
//   denom   = 1 + lambda_sigma * count
//   mean    = (lambda_m + lambda_sigma * sum) / denom
//   var     = v_decay / denom            (v_decay = lambda_v * decay^gamma)
void reshape_arms(std::size_t n, const double* lambda_m,
                  const double* lambda_sigma, const double* v_decay,
                  const double* sum, const double* count,
                  double* mean, double* var);

// out = mean + sqrt(var) * z
void shift_scale(std::size_t n, const double* mean, const double* var,
                 const double* z, double* out);

// Gradient of the log sampling density at theta with respect to the
// unconstrained meta-parameter coordinates, one entry per arm and block.
void score_arms(std::size_t n, const double* theta, const double* mean,
                const double* var, const double* sum, const double* count,
                const double* lambda_m, const double* lambda_sigma,
                double log_decay,
                double* s_m, double* s_v, double* s_sig, double* s_gam);

// Backend-specific entry points, exposed so the equivalence tests can run
// both variants side by side regardless of the active() selection.
namespace detail {

void fill_u64_scalar(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
                     std::size_t n, std::uint64_t* out);
void fill_uniform01_scalar(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
                           std::size_t n, double* out);
void fill_normal_scalar(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
                        std::size_t n, double* out);
void reshape_arms_scalar(std::size_t n, const double* lambda_m,
                         const double* lambda_sigma, const double* v_decay,
                         const double* sum, const double* count,
                         double* mean, double* var);
void shift_scale_scalar(std::size_t n, const double* mean, const double* var,
                        const double* z, double* out);
void score_arms_scalar(std::size_t n, const double* theta, const double* mean,
                       const double* var, const double* sum, const double* count,
                       const double* lambda_m, const double* lambda_sigma,
                       double log_decay,
                       double* s_m, double* s_v, double* s_sig, double* s_gam);

#if defined(__x86_64__) || defined(_M_X64)
void fill_u64_avx2(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
                   std::size_t n, std::uint64_t* out);
void fill_uniform01_avx2(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
                         std::size_t n, double* out);
void fill_normal_avx2(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
                      std::size_t n, double* out);
void reshape_arms_avx2(std::size_t n, const double* lambda_m,
                       const double* lambda_sigma, const double* v_decay,
                       const double* sum, const double* count,
                       double* mean, double* var);
void shift_scale_avx2(std::size_t n, const double* mean, const double* var,
                      const double* z, double* out);
void score_arms_avx2(std::size_t n, const double* theta, const double* mean,
                     const double* var, const double* sum, const double* count,
                     const double* lambda_m, const double* lambda_sigma,
                     double log_decay,
                     double* s_m, double* s_v, double* s_sig, double* s_gam);
#endif

// Single u64 from the counter scheme; shared by both backends.
std::uint64_t draw_u64(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

// Maps a raw u64 onto the open unit interval (52-bit resolution); both
// fill_uniform01 variants use exactly this mapping.
double u64_to_unit(std::uint64_t x);

}  // namespace detail

}  // namespace pgts::kernels
