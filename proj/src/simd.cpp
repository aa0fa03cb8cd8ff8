#include "batchkb/simd.hpp"

#include <cassert>
#include <cstdlib>

#include "batchkb/errors.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define BATCHKB_X86 1
#include <immintrin.h>
#endif
#if defined(__aarch64__)
#define BATCHKB_NEON 1
#include <arm_neon.h>
#endif

namespace batchkb::simd {

// ----------------------------- scalar reference -----------------------------

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void mat_vec_rows_scalar(const double* A, std::size_t rows, std::size_t cols,
                         std::size_t stride, const double* x, double* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot_scalar(A + r * stride, x, cols);
}

void append_column_scalar(const double* kcol, const double* w, double inv_diag,
                          double* col, std::size_t stride, double* var,
                          std::size_t n) {
  for (std::size_t r = 0; r < n; ++r) {
    const double t = (kcol[r] - w[r]) * inv_diag;
    col[r * stride] = t;
    var[r] -= t * t;
  }
}

std::size_t argmax_scalar(const double* v, std::size_t n) {
  assert(n >= 1);
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

const Ops kScalar{"scalar", dot_scalar, mat_vec_rows_scalar,
                  append_column_scalar, argmax_scalar};

// --------------------------------- AVX2 -------------------------------------

#ifdef BATCHKB_X86

__attribute__((target("avx2,fma"))) double dot_avx2(const double* a,
                                                    const double* b,
                                                    std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  const __m128d lo = _mm256_castpd256_pd128(acc0);
  const __m128d hi = _mm256_extractf128_pd(acc0, 1);
  const __m128d s2 = _mm_add_pd(lo, hi);
  double s = _mm_cvtsd_f64(_mm_add_sd(s2, _mm_unpackhi_pd(s2, s2)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

__attribute__((target("avx2,fma"))) void mat_vec_rows_avx2(
    const double* A, std::size_t rows, std::size_t cols, std::size_t stride,
    const double* x, double* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot_avx2(A + r * stride, x, cols);
}

__attribute__((target("avx2,fma"))) void append_column_avx2(
    const double* kcol, const double* w, double inv_diag, double* col,
    std::size_t stride, double* var, std::size_t n) {
  const __m256d vinv = _mm256_set1_pd(inv_diag);
  std::size_t r = 0;
  alignas(32) double lane[4];
  for (; r + 4 <= n; r += 4) {
    const __m256d t =
        _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(kcol + r), _mm256_loadu_pd(w + r)), vinv);
    _mm256_store_pd(lane, t);
    col[(r + 0) * stride] = lane[0];
    col[(r + 1) * stride] = lane[1];
    col[(r + 2) * stride] = lane[2];
    col[(r + 3) * stride] = lane[3];
    const __m256d v = _mm256_loadu_pd(var + r);
    _mm256_storeu_pd(var + r, _mm256_fnmadd_pd(t, t, v));
  }
  for (; r < n; ++r) {
    const double t = (kcol[r] - w[r]) * inv_diag;
    col[r * stride] = t;
    var[r] -= t * t;
  }
}

// Two passes: vector max, then first index holding it. Matches the scalar
// tie-break exactly.
__attribute__((target("avx2"))) std::size_t argmax_avx2(const double* v,
                                                        std::size_t n) {
  assert(n >= 1);
  if (n < 8) return argmax_scalar(v, n);
  __m256d m = _mm256_loadu_pd(v);
  std::size_t i = 4;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, _mm256_loadu_pd(v + i));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, m);
  double best = lane[0];
  for (int k = 1; k < 4; ++k)
    if (lane[k] > best) best = lane[k];
  for (; i < n; ++i)
    if (v[i] > best) best = v[i];
  for (std::size_t k = 0;; ++k)
    if (v[k] == best) return k;
}

const Ops kAvx2{"avx2", dot_avx2, mat_vec_rows_avx2, append_column_avx2,
                argmax_avx2};

bool avx2_usable() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

#endif  // BATCHKB_X86

// --------------------------------- NEON -------------------------------------

#ifdef BATCHKB_NEON

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  for (; i + 2 <= n; i += 2) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void mat_vec_rows_neon(const double* A, std::size_t rows, std::size_t cols,
                       std::size_t stride, const double* x, double* out) {
  for (std::size_t r = 0; r < rows; ++r) out[r] = dot_neon(A + r * stride, x, cols);
}

void append_column_neon(const double* kcol, const double* w, double inv_diag,
                        double* col, std::size_t stride, double* var,
                        std::size_t n) {
  const float64x2_t vinv = vdupq_n_f64(inv_diag);
  std::size_t r = 0;
  for (; r + 2 <= n; r += 2) {
    const float64x2_t t = vmulq_f64(vsubq_f64(vld1q_f64(kcol + r), vld1q_f64(w + r)), vinv);
    col[(r + 0) * stride] = vgetq_lane_f64(t, 0);
    col[(r + 1) * stride] = vgetq_lane_f64(t, 1);
    vst1q_f64(var + r, vfmsq_f64(vld1q_f64(var + r), t, t));
  }
  for (; r < n; ++r) {
    const double t = (kcol[r] - w[r]) * inv_diag;
    col[r * stride] = t;
    var[r] -= t * t;
  }
}

std::size_t argmax_neon(const double* v, std::size_t n) {
  assert(n >= 1);
  if (n < 4) return argmax_scalar(v, n);
  float64x2_t m = vld1q_f64(v);
  std::size_t i = 2;
  for (; i + 2 <= n; i += 2) m = vmaxq_f64(m, vld1q_f64(v + i));
  double best = vmaxvq_f64(m);
  for (; i < n; ++i)
    if (v[i] > best) best = v[i];
  for (std::size_t k = 0;; ++k)
    if (v[k] == best) return k;
}

const Ops kNeon{"neon", dot_neon, mat_vec_rows_neon, append_column_neon,
                argmax_neon};

#endif  // BATCHKB_NEON

const Ops* select_backend() {
  if (const char* env = std::getenv("BATCHKB_SIMD")) {
    const std::string want(env);
    for (const Ops* ops : usable_ops())
      if (want == ops->name) return ops;
    throw ConfigError("BATCHKB_SIMD=" + want + " is not usable on this machine");
  }
#ifdef BATCHKB_X86
  if (avx2_usable()) return &kAvx2;
#endif
#ifdef BATCHKB_NEON
  return &kNeon;
#endif
  return &kScalar;
}

}  // namespace

const Ops& scalar_ops() { return kScalar; }

std::vector<const Ops*> usable_ops() {
  std::vector<const Ops*> out{&kScalar};
#ifdef BATCHKB_X86
  if (avx2_usable()) out.push_back(&kAvx2);
#endif
#ifdef BATCHKB_NEON
  out.push_back(&kNeon);
#endif
  return out;
}

const Ops& active_ops() {
  static const Ops* chosen = select_backend();
  return *chosen;
}

}  // namespace batchkb::simd
