#pragma once

#include <cstddef>

// Data-parallel inner loops. Every entry point has a scalar reference
// implementation and (on x86-64) an AVX2/FMA variant; the dispatcher picks
// one at process start. Pointwise ops are bit-identical across backends;
// reductions and GEMM reassociate and are equivalence-tested with tolerances.
namespace slottta::kern {

struct Table {
  const char* name;

  // C[m x n] (+)= A[m x k] * B[k x n], row-major.
  void (*gemm_f32)(const float* a, const float* b, float* c, int m, int k, int n, bool acc);
  void (*gemm_f64)(const double* a, const double* b, double* c, int m, int k, int n, bool acc);
  // C[m x n] (+)= A[m x k] * B[n x k]^T  (rows of B are the contraction vectors).
  void (*gemm_nt_f32)(const float* a, const float* b, float* c, int m, int k, int n, bool acc);
  void (*gemm_nt_f64)(const double* a, const double* b, double* c, int m, int k, int n, bool acc);

  void (*add_f32)(const float*, const float*, float*, size_t);
  void (*sub_f32)(const float*, const float*, float*, size_t);
  void (*mul_f32)(const float*, const float*, float*, size_t);
  void (*div_f32)(const float*, const float*, float*, size_t);
  void (*add_f64)(const double*, const double*, double*, size_t);
  void (*sub_f64)(const double*, const double*, double*, size_t);
  void (*mul_f64)(const double*, const double*, double*, size_t);
  void (*div_f64)(const double*, const double*, double*, size_t);

  // y += alpha * x
  void (*axpy_f32)(float alpha, const float* x, float* y, size_t);
  void (*axpy_f64)(double alpha, const double* x, double* y, size_t);
  void (*scale_f32)(const float*, float, float*, size_t);
  void (*scale_f64)(const double*, double, double*, size_t);

  float (*dot_f32)(const float*, const float*, size_t);
  double (*dot_f64)(const double*, const double*, size_t);
  float (*sum_f32)(const float*, size_t);
  double (*sum_f64)(const double*, size_t);
  float (*sumsq_f32)(const float*, size_t);
  double (*sumsq_f64)(const double*, size_t);
  float (*sqdiff_sum_f32)(const float*, const float*, size_t);
  double (*sqdiff_sum_f64)(const double*, const double*, size_t);

  void (*relu_f32)(const float*, float*, size_t);
  void (*relu_f64)(const double*, double*, size_t);
  // dx += dy where x > 0
  void (*relu_bwd_f32)(const float* x, const float* dy, float* dx, size_t);
  void (*relu_bwd_f64)(const double* x, const double* dy, double* dx, size_t);

  // Bias-corrected Adam update; c1 = 1/(1-b1^t), c2 = 1/(1-b2^t).
  void (*adam_f32)(float* p, const float* g, float* m, float* v, size_t n,
                   float lr, float b1, float b2, float eps, float c1, float c2);
  void (*adam_f64)(double* p, const double* g, double* m, double* v, size_t n,
                   double lr, double b1, double b2, double eps, double c1, double c2);
};

const Table& scalar_table();
const Table* avx2_table();  // nullptr when the CPU or build lacks AVX2+FMA

// Selected once per process: AVX2 when available, overridable with
// SLOTTTA_KERNELS=scalar|avx2.
const Table& active();

// Typed access for templated callers.
template <typename T>
struct Kern;

template <>
struct Kern<float> {
  static void gemm(const float* a, const float* b, float* c, int m, int k, int n, bool acc) { active().gemm_f32(a, b, c, m, k, n, acc); }
  static void gemm_nt(const float* a, const float* b, float* c, int m, int k, int n, bool acc) { active().gemm_nt_f32(a, b, c, m, k, n, acc); }
  static void add(const float* a, const float* b, float* r, size_t n) { active().add_f32(a, b, r, n); }
  static void sub(const float* a, const float* b, float* r, size_t n) { active().sub_f32(a, b, r, n); }
  static void mul(const float* a, const float* b, float* r, size_t n) { active().mul_f32(a, b, r, n); }
  static void div(const float* a, const float* b, float* r, size_t n) { active().div_f32(a, b, r, n); }
  static void axpy(float alpha, const float* x, float* y, size_t n) { active().axpy_f32(alpha, x, y, n); }
  static void scale(const float* x, float s, float* r, size_t n) { active().scale_f32(x, s, r, n); }
  static float dot(const float* a, const float* b, size_t n) { return active().dot_f32(a, b, n); }
  static float sum(const float* a, size_t n) { return active().sum_f32(a, n); }
  static float sumsq(const float* a, size_t n) { return active().sumsq_f32(a, n); }
  static float sqdiff_sum(const float* a, const float* b, size_t n) { return active().sqdiff_sum_f32(a, b, n); }
  static void relu(const float* x, float* r, size_t n) { active().relu_f32(x, r, n); }
  static void relu_bwd(const float* x, const float* dy, float* dx, size_t n) { active().relu_bwd_f32(x, dy, dx, n); }
  static void adam(float* p, const float* g, float* m, float* v, size_t n,
                   float lr, float b1, float b2, float eps, float c1, float c2) {
    active().adam_f32(p, g, m, v, n, lr, b1, b2, eps, c1, c2);
  }
};

template <>
struct Kern<double> {
  static void gemm(const double* a, const double* b, double* c, int m, int k, int n, bool acc) { active().gemm_f64(a, b, c, m, k, n, acc); }
  static void gemm_nt(const double* a, const double* b, double* c, int m, int k, int n, bool acc) { active().gemm_nt_f64(a, b, c, m, k, n, acc); }
  static void add(const double* a, const double* b, double* r, size_t n) { active().add_f64(a, b, r, n); }
  static void sub(const double* a, const double* b, double* r, size_t n) { active().sub_f64(a, b, r, n); }
  static void mul(const double* a, const double* b, double* r, size_t n) { active().mul_f64(a, b, r, n); }
  static void div(const double* a, const double* b, double* r, size_t n) { active().div_f64(a, b, r, n); }
  static void axpy(double alpha, const double* x, double* y, size_t n) { active().axpy_f64(alpha, x, y, n); }
  static void scale(const double* x, double s, double* r, size_t n) { active().scale_f64(x, s, r, n); }
  static double dot(const double* a, const double* b, size_t n) { return active().dot_f64(a, b, n); }
  static double sum(const double* a, size_t n) { return active().sum_f64(a, n); }
  static double sumsq(const double* a, size_t n) { return active().sumsq_f64(a, n); }
  static double sqdiff_sum(const double* a, const double* b, size_t n) { return active().sqdiff_sum_f64(a, b, n); }
  static void relu(const double* x, double* r, size_t n) { active().relu_f64(x, r, n); }
  static void relu_bwd(const double* x, const double* dy, double* dx, size_t n) { active().relu_bwd_f64(x, dy, dx, n); }
  static void adam(double* p, const double* g, double* m, double* v, size_t n,
                   double lr, double b1, double b2, double eps, double c1, double c2) {
    active().adam_f64(p, g, m, v, n, lr, b1, b2, eps, c1, c2);
  }
};

}  // namespace slottta::kern
