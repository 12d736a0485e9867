#pragma once
// Dense double-precision kernels behind every forward pass, backward pass and
// noise injection. A scalar reference implementation is always compiled; AVX2
// (x86-64) and NEON (aarch64) variants are selected at runtime when the CPU
// supports them. RANDEF_KERNELS=scalar|avx2|neon in the environment forces a
// backend at first use.

#include <cstddef>
#include <span>
#include <string_view>

namespace randef::kernels {

enum class Backend { Scalar, Avx2, Neon };

std::string_view backendName(Backend b) noexcept;

/// Function table for one backend. Matrices are row-major, `rows x cols`.
struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = W x + bias   (bias may be null)
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x,
               const double* bias, double* y);
  // y = W^T v
  void (*gemvTransposed)(const double* w, std::size_t rows, std::size_t cols, const double* v,
                         double* y);
  // W += alpha * u v^T
  void (*rankOneUpdate)(double* w, std::size_t rows, std::size_t cols, double alpha,
                        const double* u, const double* v);
  // sum_k (a_k - b_k)^2
  double (*squaredDistance)(const double* a, const double* b, std::size_t n);
};

namespace scalar {
const KernelTable& table() noexcept;
}
#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
const KernelTable& table() noexcept;
}
#endif
#if defined(__aarch64__)
namespace neon {
const KernelTable& table() noexcept;
}
#endif

bool backendAvailable(Backend b) noexcept;
const KernelTable& tableFor(Backend b);

Backend activeBackend() noexcept;
/// Throws ConfigError when the backend is not available on this CPU.
void selectBackend(Backend b);

const KernelTable& active() noexcept;

// Span conveniences over the active backend.

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double squaredDistance(std::span<const double> a, std::span<const double> b);

}  // namespace randef::kernels
