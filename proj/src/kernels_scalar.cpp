#include "pgts/kernels.hpp"

#include <cmath>
#include <limits>

// Scalar reference kernels. The AVX2 variants in kernels_avx2.cpp must
// reproduce these bit for bit; keep every floating-point operation here
// a single rounding step (explicit std::fma, one div, one sqrt) so that
// is possible.

namespace pgts::kernels::detail {

namespace {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as
// 1, 2, 3"). One block maps a 128-bit counter and 64-bit key to 128
// output bits; we spend two counter words on the block index and two on
// the stream id.
constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

struct Block {
  std::uint64_t lo;
  std::uint64_t hi;
};

inline Block philox_block(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t block_index) {
  std::uint32_t c0 = static_cast<std::uint32_t>(block_index);
  std::uint32_t c1 = static_cast<std::uint32_t>(block_index >> 32);
  std::uint32_t c2 = static_cast<std::uint32_t>(stream);
  std::uint32_t c3 = static_cast<std::uint32_t>(stream >> 32);
  std::uint32_t k0 = static_cast<std::uint32_t>(seed);
  std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);

  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c2;
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t n0 = hi1 ^ c1 ^ k0;
    const std::uint32_t n1 = lo1;
    const std::uint32_t n2 = hi0 ^ c3 ^ k1;
    const std::uint32_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  return Block{static_cast<std::uint64_t>(c0) | (static_cast<std::uint64_t>(c1) << 32),
               static_cast<std::uint64_t>(c2) | (static_cast<std::uint64_t>(c3) << 32)};
}

// AS 241 (Wichura 1988), PPND16 coefficient set.
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
constexpr double kMidC[8] = {
    1.42343711074968357734e+00, 4.63033784615654529590e+00,
    5.76949722146069140550e+00, 3.64784832476320460504e+00,
    1.27045825245236838258e+00, 2.41780725177450611770e-01,
    2.27238449892691845833e-02, 7.74545014278341407640e-04};
constexpr double kMidD[8] = {
    1.0,                        2.05319162663775882187e+00,
    1.67638483018380384940e+00, 6.89767334985100004550e-01,
    1.48103976427480074590e-01, 1.51986665636164571966e-02,
    5.47593808499534494600e-04, 1.05075007164441684324e-09};
constexpr double kFarE[8] = {
    6.65790464350110377720e+00, 5.46378491116411436990e+00,
    1.78482653991729133580e+00, 2.96560571828504891230e-01,
    2.65321895265761230930e-02, 1.24266094738807843860e-03,
    2.71155556874348757815e-05, 2.01033439929228813265e-07};
constexpr double kFarF[8] = {
    1.0,                        5.99832206555887937690e-01,
    1.36929880922735805310e-01, 1.48753612908506148525e-02,
    7.86869131145613259100e-04, 1.84631831751005468180e-05,
    1.42151175831644588870e-07, 2.04426310338993978564e-15};

inline double horner8(const double (&c)[8], double r) {
  double acc = c[7];
  acc = std::fma(acc, r, c[6]);
  acc = std::fma(acc, r, c[5]);
  acc = std::fma(acc, r, c[4]);
  acc = std::fma(acc, r, c[3]);
  acc = std::fma(acc, r, c[2]);
  acc = std::fma(acc, r, c[1]);
  acc = std::fma(acc, r, c[0]);
  return acc;
}

inline double quantile_central(double q) {
  const double r = std::fma(-q, q, 0.180625);
  return (q * horner8(kCentralA, r)) / horner8(kCentralB, r);
}

inline double quantile_tail(double p, double q) {
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = horner8(kMidC, r) / horner8(kMidD, r);
  } else {
    r -= 5.0;
    value = horner8(kFarE, r) / horner8(kFarF, r);
  }
  return q < 0.0 ? -value : value;
}

}  // namespace

std::uint64_t draw_u64(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const Block b = philox_block(seed, stream, index >> 1);
  return (index & 1) ? b.hi : b.lo;
}

double u64_to_unit(std::uint64_t x) {
  // (k + 0.5) * 2^-52 with k < 2^52: both steps are exact, and the result
  // stays strictly inside (0, 1).
  return (static_cast<double>(x >> 12) + 0.5) * 0x1p-52;
}

void fill_u64_scalar(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
                     std::size_t n, std::uint64_t* out) {
  std::uint64_t i = pos;
  std::size_t written = 0;
  if (n > 0 && (i & 1)) {
    out[written++] = draw_u64(seed, stream, i++);
  }
  while (n - written >= 2) {
    const Block b = philox_block(seed, stream, i >> 1);
    out[written] = b.lo;
    out[written + 1] = b.hi;
    written += 2;
    i += 2;
  }
  if (written < n) {
    out[written] = draw_u64(seed, stream, i);
  }
}

void fill_uniform01_scalar(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
                           std::size_t n, double* out) {
  for (std::size_t j = 0; j < n;) {
    std::uint64_t raw[64];
    const std::size_t chunk = n - j < 64 ? n - j : 64;
    fill_u64_scalar(seed, stream, pos + j, chunk, raw);
    for (std::size_t k = 0; k < chunk; ++k) out[j + k] = u64_to_unit(raw[k]);
    j += chunk;
  }
}

void fill_normal_scalar(std::uint64_t seed, std::uint64_t stream, std::uint64_t pos,
                        std::size_t n, double* out) {
  fill_uniform01_scalar(seed, stream, pos, n, out);
  for (std::size_t j = 0; j < n; ++j) {
    const double q = out[j] - 0.5;
    out[j] = (std::fabs(q) <= 0.425) ? quantile_central(q) : quantile_tail(out[j], q);
  }
}

void reshape_arms_scalar(std::size_t n, const double* lambda_m,
                         const double* lambda_sigma, const double* v_decay,
                         const double* sum, const double* count,
                         double* mean, double* var) {
  for (std::size_t a = 0; a < n; ++a) {
    const double denom = std::fma(lambda_sigma[a], count[a], 1.0);
    mean[a] = std::fma(lambda_sigma[a], sum[a], lambda_m[a]) / denom;
    var[a] = v_decay[a] / denom;
  }
}

void shift_scale_scalar(std::size_t n, const double* mean, const double* var,
                        const double* z, double* out) {
  for (std::size_t a = 0; a < n; ++a) {
    out[a] = std::fma(std::sqrt(var[a]), z[a], mean[a]);
  }
}

void score_arms_scalar(std::size_t n, const double* theta, const double* mean,
                       const double* var, const double* sum, const double* count,
                       const double* lambda_m, const double* lambda_sigma,
                       double log_decay,
                       double* s_m, double* s_v, double* s_sig, double* s_gam) {
  for (std::size_t a = 0; a < n; ++a) {
    const double denom = std::fma(lambda_sigma[a], count[a], 1.0);
    const double diff = theta[a] - mean[a];
    const double g_mean = diff / var[a];
    // d logp / d var = (diff^2 - var) / (2 var^2), then times var for the
    // log-reparameterized coordinate.
    const double g_var_var = std::fma(diff, diff, -var[a]) / (2.0 * var[a]);
    s_m[a] = g_mean / denom;
    s_v[a] = g_var_var;
    const double mean_shift = std::fma(-lambda_m[a], count[a], sum[a]);
    s_sig[a] = lambda_sigma[a] *
               (g_mean * mean_shift / (denom * denom) -
                g_var_var * count[a] / denom);
    s_gam[a] = g_var_var * log_decay;
  }
}

}  // namespace pgts::kernels::detail

namespace pgts::kernels {

double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) return detail::quantile_central(q);
  return detail::quantile_tail(p, q);
}

}  // namespace pgts::kernels
