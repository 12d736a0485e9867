#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "randef/errors.hpp"
#include "randef/kernels.hpp"

using namespace randef;
using kernels::Backend;

namespace {

// Reference loops written independently of the scalar backend.
double naiveDot(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += static_cast<long double>(a[k]) * b[k];
  return static_cast<double>(s);
}

std::vector<Backend> vectorBackends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::Avx2, Backend::Neon}) {
    if (kernels::backendAvailable(b)) out.push_back(b);
  }
  return out;
}

void requireClose(double got, double want, double scale) {
  CHECK(std::abs(got - want) <= 1e-12 * std::max(1.0, scale));
}

}  // namespace

TEST_CASE("scalar backend is always available and matches naive loops") {
  REQUIRE(kernels::backendAvailable(Backend::Scalar));
  const auto& t = kernels::tableFor(Backend::Scalar);
  std::mt19937_64 rng(1);
  for (std::size_t n : {0u, 1u, 3u, 17u, 64u}) {
    const auto a = testing::randomVector(rng, n);
    const auto b = testing::randomVector(rng, n);
    requireClose(t.dot(a.data(), b.data(), n), naiveDot(a, b), static_cast<double>(n));
  }
}

TEST_CASE("vector backends agree with the scalar reference") {
  const auto& ref = kernels::tableFor(Backend::Scalar);
  std::mt19937_64 rng(2);
  for (Backend backend : vectorBackends()) {
    CAPTURE(kernels::backendName(backend));
    const auto& t = kernels::tableFor(backend);
    for (std::size_t n = 0; n <= 67; ++n) {
      const auto a = testing::randomVector(rng, n);
      const auto b = testing::randomVector(rng, n);
      requireClose(t.dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n), n);
      requireClose(t.squaredDistance(a.data(), b.data(), n),
                   ref.squaredDistance(a.data(), b.data(), n), n);

      auto y1 = b, y2 = b;
      t.axpy(0.37, a.data(), y1.data(), n);
      ref.axpy(0.37, a.data(), y2.data(), n);
      for (std::size_t k = 0; k < n; ++k) requireClose(y1[k], y2[k], 1.0);
    }
    for (std::size_t rows : {1u, 5u, 10u}) {
      for (std::size_t cols : {1u, 7u, 16u, 33u}) {
        const auto w = testing::randomVector(rng, rows * cols);
        const auto x = testing::randomVector(rng, cols);
        const auto v = testing::randomVector(rng, rows);
        const auto bias = testing::randomVector(rng, rows);
        std::vector<double> g1(rows), g2(rows);
        t.gemv(w.data(), rows, cols, x.data(), bias.data(), g1.data());
        ref.gemv(w.data(), rows, cols, x.data(), bias.data(), g2.data());
        for (std::size_t r = 0; r < rows; ++r) requireClose(g1[r], g2[r], cols);
        t.gemv(w.data(), rows, cols, x.data(), nullptr, g1.data());
        ref.gemv(w.data(), rows, cols, x.data(), nullptr, g2.data());
        for (std::size_t r = 0; r < rows; ++r) requireClose(g1[r], g2[r], cols);

        std::vector<double> h1(cols), h2(cols);
        t.gemvTransposed(w.data(), rows, cols, v.data(), h1.data());
        ref.gemvTransposed(w.data(), rows, cols, v.data(), h2.data());
        for (std::size_t c = 0; c < cols; ++c) requireClose(h1[c], h2[c], rows);

        auto w1 = w, w2 = w;
        t.rankOneUpdate(w1.data(), rows, cols, -0.5, v.data(), x.data());
        ref.rankOneUpdate(w2.data(), rows, cols, -0.5, v.data(), x.data());
        for (std::size_t k = 0; k < w.size(); ++k) requireClose(w1[k], w2[k], 1.0);
      }
    }
  }
}

TEST_CASE("gemv matches a hand-rolled product") {
  const std::vector<double> w{1, 2, 3, 4, 5, 6};  // 2 x 3
  const std::vector<double> x{1, -1, 2};
  const std::vector<double> bias{0.5, -0.5};
  std::vector<double> y(2);
  kernels::active().gemv(w.data(), 2, 3, x.data(), bias.data(), y.data());
  CHECK(y[0] == 1 - 2 + 6 + 0.5);
  CHECK(y[1] == 4 - 5 + 12 - 0.5);
}

TEST_CASE("backend selection") {
  const Backend before = kernels::activeBackend();
  kernels::selectBackend(Backend::Scalar);
  CHECK(kernels::activeBackend() == Backend::Scalar);
  for (Backend b : {Backend::Avx2, Backend::Neon}) {
    if (!kernels::backendAvailable(b)) CHECK_THROWS_AS(kernels::selectBackend(b), ConfigError);
  }
  kernels::selectBackend(before);
  CHECK(kernels::activeBackend() == before);
}

TEST_CASE("span wrappers reject length mismatch") {
  const std::vector<double> a(3, 1.0), b(4, 1.0);
  std::vector<double> y(4, 0.0);
  CHECK_THROWS_AS(kernels::dot(a, b), ShapeError);
  CHECK_THROWS_AS(kernels::axpy(1.0, a, y), ShapeError);
  CHECK_THROWS_AS(kernels::squaredDistance(a, b), ShapeError);
  CHECK(kernels::dot(a, a) == 3.0);
}
