#include "pgts/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstring>

// AVX2+FMA kernel variants. Each mirrors the scalar reference operation
// for operation: fmadd/fnmadd/fmsub where the scalar uses std::fma,
// plus correctly rounded div/sqrt, so results match bit for bit. The
// normal quantile handles the 15% of lanes that fall in the CDF tails
// by re-running the scalar code on just those lanes.

namespace pgts::kernels::detail {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

// Four Philox4x32-10 blocks at once. Counter words are held one-per-64-bit
// lane (zero-extended u32), which lines up with _mm256_mul_epu32.
struct Blocks4 {
  __m256i lo;  // c0 | c1<<32 for blocks b..b+3
  __m256i hi;  // c2 | c3<<32
};

inline Blocks4 philox_blocks4(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t first_block) {
  const __m256i mask32 = _mm256_set1_epi64x(0xFFFFFFFFll);
  __m256i c0 = _mm256_and_si256(
      _mm256_add_epi64(_mm256_set1_epi64x(static_cast<long long>(first_block)),
                       _mm256_set_epi64x(3, 2, 1, 0)),
      mask32);
  // Block indices may straddle a 2^32 boundary within the group of four,
  // so the counter high words are formed per lane.
  alignas(32) std::uint64_t hiw[4];
  for (int j = 0; j < 4; ++j) {
    hiw[j] = ((first_block + static_cast<std::uint64_t>(j)) >> 32) & 0xFFFFFFFFull;
  }
  __m256i c1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(hiw));
  __m256i c2 = _mm256_set1_epi64x(static_cast<long long>(stream & 0xFFFFFFFFull));
  __m256i c3 = _mm256_set1_epi64x(static_cast<long long>(stream >> 32));
  __m256i k0 = _mm256_set1_epi64x(static_cast<long long>(seed & 0xFFFFFFFFull));
  __m256i k1 = _mm256_set1_epi64x(static_cast<long long>(seed >> 32));
  const __m256i m0 = _mm256_set1_epi64x(kPhiloxM0);
  const __m256i m1 = _mm256_set1_epi64x(kPhiloxM1);
  const __m256i w0 = _mm256_set1_epi64x(kPhiloxW0);
  const __m256i w1 = _mm256_set1_epi64x(kPhiloxW1);

  for (int round = 0; round < 10; ++round) {
    const __m256i p0 = _mm256_mul_epu32(m0, c0);
    const __m256i p1 = _mm256_mul_epu32(m1, c2);
    const __m256i hi0 = _mm256_srli_epi64(p0, 32);
    const __m256i lo0 = _mm256_and_si256(p0, mask32);
    const __m256i hi1 = _mm256_srli_epi64(p1, 32);
    const __m256i lo1 = _mm256_and_si256(p1, mask32);
    const __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0);
    const __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1);
    c0 = n0;
    c1 = lo1;
    c2 = n2;
    c3 = lo0;
    k0 = _mm256_and_si256(_mm256_add_epi64(k0, w0), mask32);
    k1 = _mm256_and_si256(_mm256_add_epi64(k1, w1), mask32);
  }
  Blocks4 out;
  out.lo = _mm256_or_si256(c0, _mm256_slli_epi64(c1, 32));
  out.hi = _mm256_or_si256(c2, _mm256_slli_epi64(c3, 32));
  return out;
}

// Interleave (lo0..lo3),(hi0..hi3) into block order lo0,hi0,lo1,hi1,...
inline void store_blocks4(const Blocks4& b, std::uint64_t* out) {
  const __m256i u_lo = _mm256_unpacklo_epi64(b.lo, b.hi);  // lo0 hi0 lo2 hi2
  const __m256i u_hi = _mm256_unpackhi_epi64(b.lo, b.hi);  // lo1 hi1 lo3 hi3
  const __m256i first = _mm256_permute2x128_si256(u_lo, u_hi, 0x20);
  const __m256i second = _mm256_permute2x128_si256(u_lo, u_hi, 0x31);
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(out), first);
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + 4), second);
}

// Same coefficients as the scalar PPND16 central branch.
constexpr double kCentralA[8] = {
    3.3871328727963666080e+00, 1.3314166789178437745e+02,
    1.9715909503065514427e+03, 1.3731693765509461125e+04,
    4.5921953931549871457e+04, 6.7265770927008700853e+04,
    3.3430575583588128105e+04, 2.5090809287301226727e+03};
constexpr double kCentralB[8] = {
    1.0,                       4.2313330701600911252e+01,
    6.8718700749205790830e+02, 5.3941960214247511077e+03,
    2.1213794301586595867e+04, 3.9307895800092710610e+04,
    2.8729085735721942674e+04, 5.2264952788528545610e+03};

inline __m256d horner8(const double (&c)[8], __m256d r) {
  __m256d acc = _mm256_set1_pd(c[7]);
  acc = _mm256_fmadd_pd(acc, r, _mm256_set1_pd(c[6]));
  acc = _mm256_fmadd_pd(acc, r, _mm256_set1_pd(c[5]));
  acc = _mm256_fmadd_pd(acc, r, _mm256_set1_pd(c[4]));
  acc = _mm256_fmadd_pd(acc, r, _mm256_set1_pd(c[3]));
  acc = _mm256_fmadd_pd(acc, r, _mm256_set1_pd(c[2]));
  acc = _mm256_fmadd_pd(acc, r, _mm256_set1_pd(c[1]));
  acc = _mm256_fmadd_pd(acc, r, _mm256_set1_pd(c[0]));
  return acc;
}

// u64 -> (0,1) double, identical to the scalar u64_to_unit mapping.
inline __m256d unit_from_u64(__m256i x) {
  const __m256i shifted = _mm256_srli_epi64(x, 12);
  const __m256i biased = _mm256_or_si256(shifted, _mm256_set1_epi64x(0x4330000000000000ll));
  const __m256d integral = _mm256_sub_pd(_mm256_castsi256_pd(biased), _mm256_set1_pd(0x1p52));
  return _mm256_mul_pd(_mm256_add_pd(integral, _mm256_set1_pd(0.5)), _mm256_set1_pd(0x1p-52));
}

// Central-branch quantile for four uniforms; tail lanes are patched with
// the scalar routine afterwards.
inline __m256d quantile4(__m256d u, int* tail_mask) {
  const __m256d q = _mm256_sub_pd(u, _mm256_set1_pd(0.5));
  const __m256d absq = _mm256_andnot_pd(_mm256_set1_pd(-0.0), q);
  const __m256d tail = _mm256_cmp_pd(absq, _mm256_set1_pd(0.425), _CMP_GT_OQ);
  *tail_mask = _mm256_movemask_pd(tail);
  const __m256d r = _mm256_fnmadd_pd(q, q, _mm256_set1_pd(0.180625));
  const __m256d num = _mm256_mul_pd(q, horner8(kCentralA, r));
  return _mm256_div_pd(num, horner8(kCentralB, r));
}

}  // namespace

void fill_u64_avx2(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
                   std::size_t n, std::uint64_t* out) {
  std::uint64_t i = pos;
  std::size_t written = 0;
  if (n > 0 && (i & 1)) {
    out[written++] = draw_u64(seed, stream, i++);
  }
  while (n - written >= 8) {
    store_blocks4(philox_blocks4(seed, stream, i >> 1), out + written);
    written += 8;
    i += 8;
  }
  if (written < n) {
    fill_u64_scalar(seed, stream, i, n - written, out + written);
  }
}

void fill_uniform01_avx2(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
                         std::size_t n, double* out) {
  std::uint64_t i = pos;
  std::size_t written = 0;
  if (n > 0 && (i & 1)) {
    out[written++] = u64_to_unit(draw_u64(seed, stream, i++));
  }
  while (n - written >= 8) {
    const Blocks4 b = philox_blocks4(seed, stream, i >> 1);
    alignas(32) std::uint64_t raw[8];
    store_blocks4(b, raw);
    _mm256_storeu_pd(out + written,
                     unit_from_u64(_mm256_load_si256(reinterpret_cast<const __m256i*>(raw))));
    _mm256_storeu_pd(out + written + 4,
                     unit_from_u64(_mm256_load_si256(reinterpret_cast<const __m256i*>(raw + 4))));
    written += 8;
    i += 8;
  }
  if (written < n) {
    fill_uniform01_scalar(seed, stream, i, n - written, out + written);
  }
}

void fill_normal_avx2(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
                      std::size_t n, double* out) {
  std::uint64_t i = pos;
  std::size_t written = 0;
  if (n > 0 && (i & 1)) {
    fill_normal_scalar(seed, stream, i, 1, out + written);
    ++written;
    ++i;
  }
  while (n - written >= 8) {
    const Blocks4 b = philox_blocks4(seed, stream, i >> 1);
    alignas(32) std::uint64_t raw[8];
    store_blocks4(b, raw);
    for (int half = 0; half < 2; ++half) {
      const __m256d u =
          unit_from_u64(_mm256_load_si256(reinterpret_cast<const __m256i*>(raw + 4 * half)));
      int tails = 0;
      const __m256d central = quantile4(u, &tails);
      _mm256_storeu_pd(out + written + 4 * half, central);
      if (tails) {
        alignas(32) double uu[4];
        _mm256_store_pd(uu, u);
        for (int lane = 0; lane < 4; ++lane) {
          if (tails & (1 << lane)) {
            out[written + 4 * half + lane] = normal_quantile(uu[lane]);
          }
        }
      }
    }
    written += 8;
    i += 8;
  }
  if (written < n) {
    fill_normal_scalar(seed, stream, i, n - written, out + written);
  }
}

void reshape_arms_avx2(std::size_t n, const double* lambda_m,
                       const double* lambda_sigma, const double* v_decay,
                       const double* sum, const double* count,
                       double* mean, double* var) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t a = 0;
  for (; a + 4 <= n; a += 4) {
    const __m256d ls = _mm256_loadu_pd(lambda_sigma + a);
    const __m256d denom = _mm256_fmadd_pd(ls, _mm256_loadu_pd(count + a), one);
    const __m256d num = _mm256_fmadd_pd(ls, _mm256_loadu_pd(sum + a),
                                        _mm256_loadu_pd(lambda_m + a));
    _mm256_storeu_pd(mean + a, _mm256_div_pd(num, denom));
    _mm256_storeu_pd(var + a, _mm256_div_pd(_mm256_loadu_pd(v_decay + a), denom));
  }
  if (a < n) {
    reshape_arms_scalar(n - a, lambda_m + a, lambda_sigma + a, v_decay + a,
                        sum + a, count + a, mean + a, var + a);
  }
}

void shift_scale_avx2(std::size_t n, const double* mean, const double* var,
                      const double* z, double* out) {
  std::size_t a = 0;
  for (; a + 4 <= n; a += 4) {
    const __m256d sd = _mm256_sqrt_pd(_mm256_loadu_pd(var + a));
    _mm256_storeu_pd(out + a,
                     _mm256_fmadd_pd(sd, _mm256_loadu_pd(z + a), _mm256_loadu_pd(mean + a)));
  }
  if (a < n) {
    shift_scale_scalar(n - a, mean + a, var + a, z + a, out + a);
  }
}

void score_arms_avx2(std::size_t n, const double* theta, const double* mean,
                     const double* var, const double* sum, const double* count,
                     const double* lambda_m, const double* lambda_sigma,
                     double log_decay,
                     double* s_m, double* s_v, double* s_sig, double* s_gam) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d logd = _mm256_set1_pd(log_decay);
  std::size_t a = 0;
  for (; a + 4 <= n; a += 4) {
    const __m256d ls = _mm256_loadu_pd(lambda_sigma + a);
    const __m256d cnt = _mm256_loadu_pd(count + a);
    const __m256d vr = _mm256_loadu_pd(var + a);
    const __m256d denom = _mm256_fmadd_pd(ls, cnt, one);
    const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(theta + a), _mm256_loadu_pd(mean + a));
    const __m256d g_mean = _mm256_div_pd(diff, vr);
    const __m256d g_var_var =
        _mm256_div_pd(_mm256_fmsub_pd(diff, diff, vr), _mm256_mul_pd(two, vr));
    _mm256_storeu_pd(s_m + a, _mm256_div_pd(g_mean, denom));
    _mm256_storeu_pd(s_v + a, g_var_var);
    const __m256d mean_shift =
        _mm256_fnmadd_pd(_mm256_loadu_pd(lambda_m + a), cnt, _mm256_loadu_pd(sum + a));
    const __m256d left =
        _mm256_div_pd(_mm256_mul_pd(g_mean, mean_shift), _mm256_mul_pd(denom, denom));
    const __m256d right = _mm256_div_pd(_mm256_mul_pd(g_var_var, cnt), denom);
    _mm256_storeu_pd(s_sig + a, _mm256_mul_pd(ls, _mm256_sub_pd(left, right)));
    _mm256_storeu_pd(s_gam + a, _mm256_mul_pd(g_var_var, logd));
  }
  if (a < n) {
    score_arms_scalar(n - a, theta + a, mean + a, var + a, sum + a, count + a,
                      lambda_m + a, lambda_sigma + a, log_decay,
                      s_m + a, s_v + a, s_sig + a, s_gam + a);
  }
}

}  // namespace pgts::kernels::detail

#endif  // x86-64
