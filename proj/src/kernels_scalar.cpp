#include "slottta/kernels.hpp"

#include <cmath>
#include <cstring>

// Reference kernels. Plain loops, no manual vectorization; accumulation order
// is fixed so results are reproducible and serve as the equivalence baseline
// for the SIMD variants.
namespace slottta::kern {
namespace {

template <typename T>
void gemm_impl(const T* a, const T* b, T* c, int m, int k, int n, bool acc) {
  for (int i = 0; i < m; ++i) {
    T* crow = c + static_cast<size_t>(i) * n;
    if (!acc) std::memset(crow, 0, sizeof(T) * n);
    const T* arow = a + static_cast<size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void gemm_nt_impl(const T* a, const T* b, T* c, int m, int k, int n, bool acc) {
  for (int i = 0; i < m; ++i) {
    const T* arow = a + static_cast<size_t>(i) * k;
    T* crow = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const T* brow = b + static_cast<size_t>(j) * k;
      T s = 0;
      for (int p = 0; p < k; ++p) s += arow[p] * brow[p];
      crow[j] = acc ? crow[j] + s : s;
    }
  }
}

template <typename T> void add_impl(const T* a, const T* b, T* r, size_t n) { for (size_t i = 0; i < n; ++i) r[i] = a[i] + b[i]; }
template <typename T> void sub_impl(const T* a, const T* b, T* r, size_t n) { for (size_t i = 0; i < n; ++i) r[i] = a[i] - b[i]; }
template <typename T> void mul_impl(const T* a, const T* b, T* r, size_t n) { for (size_t i = 0; i < n; ++i) r[i] = a[i] * b[i]; }
template <typename T> void div_impl(const T* a, const T* b, T* r, size_t n) { for (size_t i = 0; i < n; ++i) r[i] = a[i] / b[i]; }
template <typename T> void axpy_impl(T alpha, const T* x, T* y, size_t n) { for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i]; }
template <typename T> void scale_impl(const T* x, T s, T* r, size_t n) { for (size_t i = 0; i < n; ++i) r[i] = x[i] * s; }

template <typename T> T dot_impl(const T* a, const T* b, size_t n) {
  T s = 0;
  for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}
template <typename T> T sum_impl(const T* a, size_t n) {
  T s = 0;
  for (size_t i = 0; i < n; ++i) s += a[i];
  return s;
}
template <typename T> T sumsq_impl(const T* a, size_t n) {
  T s = 0;
  for (size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}
template <typename T> T sqdiff_sum_impl(const T* a, const T* b, size_t n) {
  T s = 0;
  for (size_t i = 0; i < n; ++i) {
    const T d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

template <typename T> void relu_impl(const T* x, T* r, size_t n) { for (size_t i = 0; i < n; ++i) r[i] = x[i] > T(0) ? x[i] : T(0); }
template <typename T> void relu_bwd_impl(const T* x, const T* dy, T* dx, size_t n) {
  for (size_t i = 0; i < n; ++i)
    if (x[i] > T(0)) dx[i] += dy[i];
}

template <typename T>
void adam_impl(T* p, const T* g, T* m, T* v, size_t n, T lr, T b1, T b2, T eps, T c1, T c2) {
  for (size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (T(1) - b1) * g[i];
    v[i] = b2 * v[i] + (T(1) - b2) * (g[i] * g[i]);
    const T mh = m[i] * c1;
    const T vh = v[i] * c2;
    p[i] -= lr * mh / (std::sqrt(vh) + eps);
  }
}

}  // namespace

const Table& scalar_table() {
  static const Table t = {
      "scalar",
      &gemm_impl<float>, &gemm_impl<double>,
      &gemm_nt_impl<float>, &gemm_nt_impl<double>,
      &add_impl<float>, &sub_impl<float>, &mul_impl<float>, &div_impl<float>,
      &add_impl<double>, &sub_impl<double>, &mul_impl<double>, &div_impl<double>,
      &axpy_impl<float>, &axpy_impl<double>,
      &scale_impl<float>, &scale_impl<double>,
      &dot_impl<float>, &dot_impl<double>,
      &sum_impl<float>, &sum_impl<double>,
      &sumsq_impl<float>, &sumsq_impl<double>,
      &sqdiff_sum_impl<float>, &sqdiff_sum_impl<double>,
      &relu_impl<float>, &relu_impl<double>,
      &relu_bwd_impl<float>, &relu_bwd_impl<double>,
      &adam_impl<float>, &adam_impl<double>,
  };
  return t;
}

}  // namespace slottta::kern
