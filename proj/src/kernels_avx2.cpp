#include "slottta/kernels.hpp"

#ifdef SLOTTTA_BUILD_AVX2

#include <immintrin.h>

#include <cmath>
#include <cstring>

// AVX2/FMA variants. Pointwise kernels round each element exactly like the
// scalar reference (mul+add, no fused contraction) so they are bit-identical;
// GEMM and reductions use FMA with 8-lane partial sums and are compared with
// tolerances.
namespace slottta::kern {
namespace {

inline float hsum8(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
  lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
  return _mm_cvtss_f32(lo);
}

inline double hsum4(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  lo = _mm_add_sd(lo, _mm_unpackhi_pd(lo, lo));
  return _mm_cvtsd_f64(lo);
}

// ---- GEMM f32: 4 rows x 32 columns register tile over the k loop.

void gemm_f32(const float* a, const float* b, float* c, int m, int k, int n, bool acc) {
  const int nb = n / 32 * 32;
  int i = 0;
  for (; i + 4 <= m; i += 4) {
    const float* a0 = a + static_cast<size_t>(i) * k;
    const float* a1 = a0 + k;
    const float* a2 = a1 + k;
    const float* a3 = a2 + k;
    float* c0 = c + static_cast<size_t>(i) * n;
    float* c1 = c0 + n;
    float* c2 = c1 + n;
    float* c3 = c2 + n;
    for (int j = 0; j < nb; j += 32) {
      __m256 r00, r01, r02, r03, r10, r11, r12, r13;
      __m256 r20, r21, r22, r23, r30, r31, r32, r33;
      if (acc) {
        r00 = _mm256_loadu_ps(c0 + j); r01 = _mm256_loadu_ps(c0 + j + 8); r02 = _mm256_loadu_ps(c0 + j + 16); r03 = _mm256_loadu_ps(c0 + j + 24);
        r10 = _mm256_loadu_ps(c1 + j); r11 = _mm256_loadu_ps(c1 + j + 8); r12 = _mm256_loadu_ps(c1 + j + 16); r13 = _mm256_loadu_ps(c1 + j + 24);
        r20 = _mm256_loadu_ps(c2 + j); r21 = _mm256_loadu_ps(c2 + j + 8); r22 = _mm256_loadu_ps(c2 + j + 16); r23 = _mm256_loadu_ps(c2 + j + 24);
        r30 = _mm256_loadu_ps(c3 + j); r31 = _mm256_loadu_ps(c3 + j + 8); r32 = _mm256_loadu_ps(c3 + j + 16); r33 = _mm256_loadu_ps(c3 + j + 24);
      } else {
        r00 = r01 = r02 = r03 = _mm256_setzero_ps();
        r10 = r11 = r12 = r13 = _mm256_setzero_ps();
        r20 = r21 = r22 = r23 = _mm256_setzero_ps();
        r30 = r31 = r32 = r33 = _mm256_setzero_ps();
      }
      for (int p = 0; p < k; ++p) {
        const float* brow = b + static_cast<size_t>(p) * n + j;
        const __m256 b0 = _mm256_loadu_ps(brow);
        const __m256 b1 = _mm256_loadu_ps(brow + 8);
        const __m256 b2 = _mm256_loadu_ps(brow + 16);
        const __m256 b3 = _mm256_loadu_ps(brow + 24);
        const __m256 v0 = _mm256_broadcast_ss(a0 + p);
        r00 = _mm256_fmadd_ps(v0, b0, r00); r01 = _mm256_fmadd_ps(v0, b1, r01);
        r02 = _mm256_fmadd_ps(v0, b2, r02); r03 = _mm256_fmadd_ps(v0, b3, r03);
        const __m256 v1 = _mm256_broadcast_ss(a1 + p);
        r10 = _mm256_fmadd_ps(v1, b0, r10); r11 = _mm256_fmadd_ps(v1, b1, r11);
        r12 = _mm256_fmadd_ps(v1, b2, r12); r13 = _mm256_fmadd_ps(v1, b3, r13);
        const __m256 v2 = _mm256_broadcast_ss(a2 + p);
        r20 = _mm256_fmadd_ps(v2, b0, r20); r21 = _mm256_fmadd_ps(v2, b1, r21);
        r22 = _mm256_fmadd_ps(v2, b2, r22); r23 = _mm256_fmadd_ps(v2, b3, r23);
        const __m256 v3 = _mm256_broadcast_ss(a3 + p);
        r30 = _mm256_fmadd_ps(v3, b0, r30); r31 = _mm256_fmadd_ps(v3, b1, r31);
        r32 = _mm256_fmadd_ps(v3, b2, r32); r33 = _mm256_fmadd_ps(v3, b3, r33);
      }
      _mm256_storeu_ps(c0 + j, r00); _mm256_storeu_ps(c0 + j + 8, r01); _mm256_storeu_ps(c0 + j + 16, r02); _mm256_storeu_ps(c0 + j + 24, r03);
      _mm256_storeu_ps(c1 + j, r10); _mm256_storeu_ps(c1 + j + 8, r11); _mm256_storeu_ps(c1 + j + 16, r12); _mm256_storeu_ps(c1 + j + 24, r13);
      _mm256_storeu_ps(c2 + j, r20); _mm256_storeu_ps(c2 + j + 8, r21); _mm256_storeu_ps(c2 + j + 16, r22); _mm256_storeu_ps(c2 + j + 24, r23);
      _mm256_storeu_ps(c3 + j, r30); _mm256_storeu_ps(c3 + j + 8, r31); _mm256_storeu_ps(c3 + j + 16, r32); _mm256_storeu_ps(c3 + j + 24, r33);
    }
    // column tail: 8-wide then scalar
    for (int j = nb; j < n; j += 8) {
      if (j + 8 <= n) {
        __m256 r0 = acc ? _mm256_loadu_ps(c0 + j) : _mm256_setzero_ps();
        __m256 r1 = acc ? _mm256_loadu_ps(c1 + j) : _mm256_setzero_ps();
        __m256 r2 = acc ? _mm256_loadu_ps(c2 + j) : _mm256_setzero_ps();
        __m256 r3 = acc ? _mm256_loadu_ps(c3 + j) : _mm256_setzero_ps();
        for (int p = 0; p < k; ++p) {
          const __m256 bv = _mm256_loadu_ps(b + static_cast<size_t>(p) * n + j);
          r0 = _mm256_fmadd_ps(_mm256_broadcast_ss(a0 + p), bv, r0);
          r1 = _mm256_fmadd_ps(_mm256_broadcast_ss(a1 + p), bv, r1);
          r2 = _mm256_fmadd_ps(_mm256_broadcast_ss(a2 + p), bv, r2);
          r3 = _mm256_fmadd_ps(_mm256_broadcast_ss(a3 + p), bv, r3);
        }
        _mm256_storeu_ps(c0 + j, r0);
        _mm256_storeu_ps(c1 + j, r1);
        _mm256_storeu_ps(c2 + j, r2);
        _mm256_storeu_ps(c3 + j, r3);
      } else {
        for (int jj = j; jj < n; ++jj) {
          float s0 = acc ? c0[jj] : 0.f, s1 = acc ? c1[jj] : 0.f;
          float s2 = acc ? c2[jj] : 0.f, s3 = acc ? c3[jj] : 0.f;
          for (int p = 0; p < k; ++p) {
            const float bv = b[static_cast<size_t>(p) * n + jj];
            s0 += a0[p] * bv; s1 += a1[p] * bv; s2 += a2[p] * bv; s3 += a3[p] * bv;
          }
          c0[jj] = s0; c1[jj] = s1; c2[jj] = s2; c3[jj] = s3;
        }
        break;
      }
    }
  }
  // row tail
  for (; i < m; ++i) {
    const float* arow = a + static_cast<size_t>(i) * k;
    float* crow = c + static_cast<size_t>(i) * n;
    if (!acc) std::memset(crow, 0, sizeof(float) * n);
    for (int p = 0; p < k; ++p) {
      const __m256 av = _mm256_broadcast_ss(arow + p);
      const float* brow = b + static_cast<size_t>(p) * n;
      int j = 0;
      for (; j + 8 <= n; j += 8)
        _mm256_storeu_ps(crow + j, _mm256_fmadd_ps(av, _mm256_loadu_ps(brow + j), _mm256_loadu_ps(crow + j)));
      for (; j < n; ++j) crow[j] += arow[p] * brow[j];
    }
  }
}

void gemm_f64(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    double* crow = c + static_cast<size_t>(i) * n;
    if (!acc) std::memset(crow, 0, sizeof(double) * n);
    for (int p = 0; p < k; ++p) {
      const __m256d av = _mm256_broadcast_sd(arow + p);
      const double* brow = b + static_cast<size_t>(p) * n;
      int j = 0;
      for (; j + 4 <= n; j += 4)
        _mm256_storeu_pd(crow + j, _mm256_fmadd_pd(av, _mm256_loadu_pd(brow + j), _mm256_loadu_pd(crow + j)));
      for (; j < n; ++j) crow[j] += arow[p] * brow[j];
    }
  }
}

void gemm_nt_f32(const float* a, const float* b, float* c, int m, int k, int n, bool acc) {
  for (int i = 0; i < m; ++i) {
    const float* arow = a + static_cast<size_t>(i) * k;
    float* crow = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const float* brow = b + static_cast<size_t>(j) * k;
      __m256 acc0 = _mm256_setzero_ps();
      __m256 acc1 = _mm256_setzero_ps();
      int p = 0;
      for (; p + 16 <= k; p += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(arow + p), _mm256_loadu_ps(brow + p), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(arow + p + 8), _mm256_loadu_ps(brow + p + 8), acc1);
      }
      for (; p + 8 <= k; p += 8)
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(arow + p), _mm256_loadu_ps(brow + p), acc0);
      float s = hsum8(_mm256_add_ps(acc0, acc1));
      for (; p < k; ++p) s += arow[p] * brow[p];
      crow[j] = acc ? crow[j] + s : s;
    }
  }
}

void gemm_nt_f64(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    double* crow = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* brow = b + static_cast<size_t>(j) * k;
      __m256d accv = _mm256_setzero_pd();
      int p = 0;
      for (; p + 4 <= k; p += 4)
        accv = _mm256_fmadd_pd(_mm256_loadu_pd(arow + p), _mm256_loadu_pd(brow + p), accv);
      double s = hsum4(accv);
      for (; p < k; ++p) s += arow[p] * brow[p];
      crow[j] = acc ? crow[j] + s : s;
    }
  }
}

// ---- pointwise (kept fma-free to stay bit-identical with scalar)

void add_f32(const float* a, const float* b, float* r, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(r + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) r[i] = a[i] + b[i];
}
void sub_f32(const float* a, const float* b, float* r, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(r + i, _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) r[i] = a[i] - b[i];
}
void mul_f32(const float* a, const float* b, float* r, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(r + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) r[i] = a[i] * b[i];
}
void div_f32(const float* a, const float* b, float* r, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(r + i, _mm256_div_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) r[i] = a[i] / b[i];
}
void add_f64(const double* a, const double* b, double* r, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(r + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) r[i] = a[i] + b[i];
}
void sub_f64(const double* a, const double* b, double* r, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(r + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) r[i] = a[i] - b[i];
}
void mul_f64(const double* a, const double* b, double* r, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(r + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) r[i] = a[i] * b[i];
}
void div_f64(const double* a, const double* b, double* r, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(r + i, _mm256_div_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) r[i] = a[i] / b[i];
}

void axpy_f32(float alpha, const float* x, float* y, size_t n) {
  const __m256 av = _mm256_set1_ps(alpha);
  size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), _mm256_mul_ps(av, _mm256_loadu_ps(x + i))));
  for (; i < n; ++i) y[i] += alpha * x[i];
}
void axpy_f64(double alpha, const double* x, double* y, size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(av, _mm256_loadu_pd(x + i))));
  for (; i < n; ++i) y[i] += alpha * x[i];
}
void scale_f32(const float* x, float s, float* r, size_t n) {
  const __m256 sv = _mm256_set1_ps(s);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(r + i, _mm256_mul_ps(sv, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) r[i] = x[i] * s;
}
void scale_f64(const double* x, double s, double* r, size_t n) {
  const __m256d sv = _mm256_set1_pd(s);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(r + i, _mm256_mul_pd(sv, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) r[i] = x[i] * s;
}

// ---- reductions

float dot_f32(const float* a, const float* b, size_t n) {
  __m256 acc0 = _mm256_setzero_ps(), acc1 = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8) acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  float s = hsum8(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}
double dot_f64(const double* a, const double* b, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum4(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}
float sum_f32(const float* a, size_t n) {
  __m256 acc = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(a + i));
  float s = hsum8(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}
double sum_f64(const double* a, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  double s = hsum4(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}
float sumsq_f32(const float* a, size_t n) {
  __m256 acc = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(a + i);
    acc = _mm256_fmadd_ps(v, v, acc);
  }
  float s = hsum8(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}
double sumsq_f64(const double* a, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum4(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}
float sqdiff_sum_f32(const float* a, const float* b, size_t n) {
  __m256 acc = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 d = _mm256_sub_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
    acc = _mm256_fmadd_ps(d, d, acc);
  }
  float s = hsum8(acc);
  for (; i < n; ++i) {
    const float d = a[i] - b[i];
    s += d * d;
  }
  return s;
}
double sqdiff_sum_f64(const double* a, const double* b, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum4(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// ---- relu

void relu_f32(const float* x, float* r, size_t n) {
  const __m256 z = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(r + i, _mm256_max_ps(z, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) r[i] = x[i] > 0.f ? x[i] : 0.f;
}
void relu_f64(const double* x, double* r, size_t n) {
  const __m256d z = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(r + i, _mm256_max_pd(z, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) r[i] = x[i] > 0. ? x[i] : 0.;
}
void relu_bwd_f32(const float* x, const float* dy, float* dx, size_t n) {
  const __m256 z = _mm256_setzero_ps();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), z, _CMP_GT_OQ);
    const __m256 g = _mm256_and_ps(mask, _mm256_loadu_ps(dy + i));
    _mm256_storeu_ps(dx + i, _mm256_add_ps(_mm256_loadu_ps(dx + i), g));
  }
  for (; i < n; ++i)
    if (x[i] > 0.f) dx[i] += dy[i];
}
void relu_bwd_f64(const double* x, const double* dy, double* dx, size_t n) {
  const __m256d z = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), z, _CMP_GT_OQ);
    const __m256d g = _mm256_and_pd(mask, _mm256_loadu_pd(dy + i));
    _mm256_storeu_pd(dx + i, _mm256_add_pd(_mm256_loadu_pd(dx + i), g));
  }
  for (; i < n; ++i)
    if (x[i] > 0.) dx[i] += dy[i];
}

// ---- adam (mul+add form, matches scalar rounding)

void adam_f32(float* p, const float* g, float* m, float* v, size_t n,
              float lr, float b1, float b2, float eps, float c1, float c2) {
  const __m256 b1v = _mm256_set1_ps(b1), ob1 = _mm256_set1_ps(1.f - b1);
  const __m256 b2v = _mm256_set1_ps(b2), ob2 = _mm256_set1_ps(1.f - b2);
  const __m256 lrv = _mm256_set1_ps(lr), epsv = _mm256_set1_ps(eps);
  const __m256 c1v = _mm256_set1_ps(c1), c2v = _mm256_set1_ps(c2);
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 gv = _mm256_loadu_ps(g + i);
    __m256 mv = _mm256_loadu_ps(m + i);
    __m256 vv = _mm256_loadu_ps(v + i);
    mv = _mm256_add_ps(_mm256_mul_ps(b1v, mv), _mm256_mul_ps(ob1, gv));
    vv = _mm256_add_ps(_mm256_mul_ps(b2v, vv), _mm256_mul_ps(ob2, _mm256_mul_ps(gv, gv)));
    _mm256_storeu_ps(m + i, mv);
    _mm256_storeu_ps(v + i, vv);
    const __m256 mh = _mm256_mul_ps(mv, c1v);
    const __m256 vh = _mm256_mul_ps(vv, c2v);
    const __m256 den = _mm256_add_ps(_mm256_sqrt_ps(vh), epsv);
    const __m256 step = _mm256_div_ps(_mm256_mul_ps(lrv, mh), den);
    _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), step));
  }
  for (; i < n; ++i) {
    m[i] = b1 * m[i] + (1.f - b1) * g[i];
    v[i] = b2 * v[i] + (1.f - b2) * (g[i] * g[i]);
    p[i] -= lr * (m[i] * c1) / (std::sqrt(v[i] * c2) + eps);
  }
}
void adam_f64(double* p, const double* g, double* m, double* v, size_t n,
              double lr, double b1, double b2, double eps, double c1, double c2) {
  for (size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1. - b1) * g[i];
    v[i] = b2 * v[i] + (1. - b2) * (g[i] * g[i]);
    p[i] -= lr * (m[i] * c1) / (std::sqrt(v[i] * c2) + eps);
  }
}

}  // namespace

const Table* avx2_table() {
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return nullptr;
  static const Table t = {
      "avx2",
      &gemm_f32, &gemm_f64,
      &gemm_nt_f32, &gemm_nt_f64,
      &add_f32, &sub_f32, &mul_f32, &div_f32,
      &add_f64, &sub_f64, &mul_f64, &div_f64,
      &axpy_f32, &axpy_f64,
      &scale_f32, &scale_f64,
      &dot_f32, &dot_f64,
      &sum_f32, &sum_f64,
      &sumsq_f32, &sumsq_f64,
      &sqdiff_sum_f32, &sqdiff_sum_f64,
      &relu_f32, &relu_f64,
      &relu_bwd_f32, &relu_bwd_f64,
      &adam_f32, &adam_f64,
  };
  return &t;
}

}  // namespace slottta::kern

#else

namespace slottta::kern {
const Table* avx2_table() { return nullptr; }
}  // namespace slottta::kern

#endif
