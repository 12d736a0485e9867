#include <atomic>
#include <cstdlib>
#include <string>

#include "randef/errors.hpp"
#include "randef/kernels.hpp"

namespace randef::kernels {
namespace {

Backend bestAvailable() noexcept {
#if defined(__x86_64__) || defined(_M_X64)
  if (backendAvailable(Backend::Avx2)) return Backend::Avx2;
#endif
#if defined(__aarch64__)
  return Backend::Neon;
#endif
  return Backend::Scalar;
}

Backend initialBackend() noexcept {
  if (const char* forced = std::getenv("RANDEF_KERNELS")) {
    const std::string name(forced);
    if (name == "scalar") return Backend::Scalar;
    if (name == "avx2" && backendAvailable(Backend::Avx2)) return Backend::Avx2;
    if (name == "neon" && backendAvailable(Backend::Neon)) return Backend::Neon;
  }
  return bestAvailable();
}

struct State {
  std::atomic<Backend> backend{initialBackend()};
  std::atomic<const KernelTable*> table{&tableFor(backend.load())};
};

State& state() noexcept {
  static State s;
  return s;
}

}  // namespace

std::string_view backendName(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

bool backendAvailable(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& tableFor(Backend b) {
  switch (b) {
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::Avx2:
      if (backendAvailable(b)) return avx2::table();
      break;
#endif
#if defined(__aarch64__)
    case Backend::Neon:
      return neon::table();
#endif
    case Backend::Scalar:
      return scalar::table();
    default:
      break;
  }
  throw ConfigError("kernel backend '" + std::string(backendName(b)) + "' is not available");
}

Backend activeBackend() noexcept { return state().backend.load(std::memory_order_acquire); }

void selectBackend(Backend b) {
  const KernelTable& t = tableFor(b);
  state().table.store(&t, std::memory_order_release);
  state().backend.store(b, std::memory_order_release);
}

const KernelTable& active() noexcept { return *state().table.load(std::memory_order_acquire); }

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
  return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw ShapeError("axpy: length mismatch");
  active().axpy(alpha, x.data(), y.data(), x.size());
}

double squaredDistance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("squaredDistance: length mismatch");
  return active().squaredDistance(a.data(), b.data(), a.size());
}

}  // namespace randef::kernels
