// AVX2+FMA variants of the hot kernels, four doubles per lane group.
// exp/log use the classic Cephes rational approximations (~1 ulp over the
// ranges used here); equivalence against the scalar backend is enforced by
// tests/test_kernels.cpp.

#include "kernels_internal.hpp"

#if defined(QPCRFBI_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "qpcrfbi/mathutil.hpp"

namespace qpcrfbi::kernels {
namespace {

inline __m256d mm_set1(double v) { return _mm256_set1_pd(v); }

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

// exp(x) for x in roughly [-709, 709]; inputs outside are clamped, which is
// the saturation the callers want.
inline __m256d exp_pd(__m256d x) {
  const __m256d hi_clamp = mm_set1(709.0);
  const __m256d lo_clamp = mm_set1(-708.0);  // keeps 2^n in the normal range
  x = _mm256_min_pd(_mm256_max_pd(x, lo_clamp), hi_clamp);

  const __m256d log2e = mm_set1(1.4426950408889634073599);
  __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d ln2_hi = mm_set1(6.93145751953125e-1);
  const __m256d ln2_lo = mm_set1(1.42860682030941723212e-6);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  __m256d r2 = _mm256_mul_pd(r, r);
  __m256d p = mm_set1(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, r2, mm_set1(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, r2, mm_set1(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = mm_set1(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, r2, mm_set1(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, r2, mm_set1(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, r2, mm_set1(2.00000000000000000005e0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(e, mm_set1(2.0), mm_set1(1.0));

  // scale by 2^n through the exponent bits
  __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  __m256i bias = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
  __m256d pow2n = _mm256_castsi256_pd(_mm256_slli_epi64(bias, 52));
  return _mm256_mul_pd(e, pow2n);
}

// log(x) for finite positive normal x.
inline __m256d log_pd(__m256d x) {
  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i half_bits = _mm256_set1_epi64x(0x3FE0000000000000LL);

  __m256i ix = _mm256_castpd_si256(x);
  __m256i exp_bits = _mm256_srli_epi64(ix, 52);
  exp_bits = _mm256_and_si256(exp_bits, _mm256_set1_epi64x(0x7FF));
  __m256i e64 = _mm256_sub_epi64(exp_bits, _mm256_set1_epi64x(1022));
  // int64 lanes -> double lanes; exponents are tiny so going through int32 is exact
  __m256d e = _mm256_cvtepi32_pd(_mm256_castsi256_si128(
      _mm256_permutevar8x32_epi32(e64, _mm256_setr_epi32(0, 2, 4, 6, 0, 0, 0, 0))));

  __m256d m = _mm256_castsi256_pd(
      _mm256_or_si256(_mm256_and_si256(ix, mant_mask), half_bits));  // [0.5, 1)

  const __m256d sqrth = mm_set1(0.70710678118654752440);
  __m256d below = _mm256_cmp_pd(m, sqrth, _CMP_LT_OQ);
  // t = 2m - 1 where m < sqrt(1/2), else m - 1; e drops by 1 in the first case
  __m256d t = _mm256_sub_pd(
      _mm256_blendv_pd(m, _mm256_add_pd(m, m), below), mm_set1(1.0));
  e = _mm256_sub_pd(e, _mm256_and_pd(below, mm_set1(1.0)));

  __m256d z = _mm256_mul_pd(t, t);
  __m256d p = mm_set1(1.01875663804580931796e-4);
  p = _mm256_fmadd_pd(p, t, mm_set1(4.97494994976747001425e-1));
  p = _mm256_fmadd_pd(p, t, mm_set1(4.70579119878881725854e0));
  p = _mm256_fmadd_pd(p, t, mm_set1(1.44989225341610930846e1));
  p = _mm256_fmadd_pd(p, t, mm_set1(1.79368678507819816313e1));
  p = _mm256_fmadd_pd(p, t, mm_set1(7.70838733755885391666e0));
  __m256d q = _mm256_add_pd(t, mm_set1(1.12873587189167450590e1));
  q = _mm256_fmadd_pd(q, t, mm_set1(4.52279145837532221105e1));
  q = _mm256_fmadd_pd(q, t, mm_set1(8.29875266912776603211e1));
  q = _mm256_fmadd_pd(q, t, mm_set1(7.11544750618563894466e1));
  q = _mm256_fmadd_pd(q, t, mm_set1(2.31251620126765340583e1));

  __m256d y = _mm256_mul_pd(_mm256_mul_pd(t, z), _mm256_div_pd(p, q));
  y = _mm256_fnmadd_pd(e, mm_set1(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(mm_set1(0.5), z, y);
  __m256d res = _mm256_add_pd(t, y);
  return _mm256_fmadd_pd(e, mm_set1(0.693359375), res);
}

// log(1 + u) for u in [0, 1]; exact-differencing correction keeps full
// precision for tiny u.
inline __m256d log1p_pd(__m256d u) {
  const __m256d one = mm_set1(1.0);
  __m256d z = _mm256_add_pd(one, u);
  __m256d corr = _mm256_div_pd(_mm256_sub_pd(_mm256_sub_pd(z, one), u), z);
  return _mm256_sub_pd(log_pd(z), corr);
}

// log(1 + exp(x)) over the full double range.
inline __m256d softplus_pd(__m256d x) {
  const __m256d sign_mask = mm_set1(-0.0);
  __m256d absx = _mm256_andnot_pd(sign_mask, x);
  __m256d e = exp_pd(_mm256_xor_pd(absx, sign_mask));
  __m256d l = log1p_pd(e);
  return _mm256_add_pd(_mm256_max_pd(x, _mm256_setzero_pd()), l);
}

double bernoulli_loglik_avx2(const double* mu, const double* zsign, std::size_t n,
                             double b0, double b1) {
  const __m256d b0v = mm_set1(b0);
  const __m256d b1v = mm_set1(b1);
  const __m256d sign_mask = mm_set1(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d m = _mm256_loadu_pd(mu + j);
    __m256d t = _mm256_fmadd_pd(b1v, m, b0v);
    __m256d s = _mm256_loadu_pd(zsign + j);
    __m256d x = _mm256_xor_pd(_mm256_mul_pd(s, t), sign_mask);
    acc = _mm256_add_pd(acc, softplus_pd(x));
  }
  double total = hsum(acc);
  for (; j < n; ++j) {
    double t = b0 + b1 * mu[j];
    total += softplus(-zsign[j] * t);
  }
  return -total;
}

double ssq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double total = hsum(acc);
  for (; j < n; ++j) {
    double d = a[j] - b[j];
    total += d * d;
  }
  return total;
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + j));
  double total = hsum(acc);
  for (; j < n; ++j) total += x[j];
  return total;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc);
  }
  double total = hsum(acc);
  for (; j < n; ++j) total += a[j] * b[j];
  return total;
}

void logistic_probs_avx2(const double* mu, std::size_t n, double b0, double b1,
                         double* out) {
  const __m256d b0v = mm_set1(b0);
  const __m256d b1v = mm_set1(b1);
  const __m256d one = mm_set1(1.0);
  const __m256d sign_mask = mm_set1(-0.0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d t = _mm256_fmadd_pd(b1v, _mm256_loadu_pd(mu + j), b0v);
    __m256d e = exp_pd(_mm256_xor_pd(t, sign_mask));
    _mm256_storeu_pd(out + j, _mm256_div_pd(one, _mm256_add_pd(one, e)));
  }
  for (; j < n; ++j) out[j] = sigmoid(b0 + b1 * mu[j]);
}

}  // namespace

const Backend& avx2_backend() {
  static const Backend backend{
      "avx2",    bernoulli_loglik_avx2, ssq_diff_avx2,
      sum_avx2,  dot_avx2,              logistic_probs_avx2,
  };
  return backend;
}

}  // namespace qpcrfbi::kernels

#endif  // QPCRFBI_HAVE_AVX2
