#include "randef/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace randef::kernels::neon {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + k), vld1q_f64(b + k));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + k + 2), vld1q_f64(b + k + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) vst1q_f64(y + k, vfmaq_f64(vld1q_f64(y + k), va, vld1q_f64(x + k)));
  for (; k < n; ++k) y[k] += alpha * x[k];
}

void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x,
          const double* bias, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double acc = dot(w + r * cols, x, cols);
    y[r] = bias ? acc + bias[r] : acc;
  }
}

void gemvTransposed(const double* w, std::size_t rows, std::size_t cols, const double* v,
                    double* y) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (v[r] != 0.0) axpy(v[r], w + r * cols, y, cols);
  }
}

void rankOneUpdate(double* w, std::size_t rows, std::size_t cols, double alpha, const double* u,
                   const double* v) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double s = alpha * u[r];
    if (s != 0.0) axpy(s, v, w + r * cols, cols);
  }
}

double squaredDistance(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + k), vld1q_f64(b + k));
    acc = vfmaq_f64(acc, d, d);
  }
  double sum = vaddvq_f64(acc);
  for (; k < n; ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return sum;
}

constexpr KernelTable kTable{dot, axpy, gemv, gemvTransposed, rankOneUpdate, squaredDistance};

}  // namespace

const KernelTable& table() noexcept { return kTable; }

}  // namespace randef::kernels::neon

#endif
