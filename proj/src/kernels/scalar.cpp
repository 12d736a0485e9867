#include "randef/kernels.hpp"

namespace randef::kernels::scalar {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) y[k] += alpha * x[k];
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
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

constexpr KernelTable kTable{dot, axpy, gemv, gemvTransposed, rankOneUpdate, squaredDistance};

}  // namespace

const KernelTable& table() noexcept { return kTable; }

}  // namespace randef::kernels::scalar
