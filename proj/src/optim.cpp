#include "randef/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "randef/errors.hpp"
#include "randef/kernels.hpp"

namespace randef {
namespace {

struct Pair {
  Vector s;
  Vector y;
  double rho;
};

// Components that sit on an active bound and whose descent direction points
// outward are frozen.
void projectGradient(std::span<const double> x, std::span<const double> g,
                     const std::optional<Box>& box, std::span<double> pg) {
  for (std::size_t k = 0; k < x.size(); ++k) {
    pg[k] = g[k];
    if (!box) continue;
    if ((x[k] <= box->lower && g[k] > 0.0) || (x[k] >= box->upper && g[k] < 0.0)) pg[k] = 0.0;
  }
}

double infNorm(std::span<const double> v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

}  // namespace

LbfgsResult lbfgsMinimize(const Objective& objective, Vector x0, const std::optional<Box>& box,
                          const LbfgsOptions& options) {
  if (options.history == 0) throw ConfigError("L-BFGS history must be at least 1");
  if (options.maxIters == 0) throw ConfigError("L-BFGS iteration cap must be at least 1");
  const auto& k = kernels::active();
  const std::size_t n = x0.size();

  LbfgsResult result;
  result.x = std::move(x0);
  if (box) box->clamp(result.x);

  Vector g(n), pg(n), d(n), xNew(n), gNew(n), alpha(options.history);
  double f = objective(result.x, g);
  std::deque<Pair> memory;

  for (std::size_t it = 0; it < options.maxIters; ++it) {
    projectGradient(result.x, g, box, pg);
    if (infNorm(pg) <= options.gradTol) {
      result.converged = true;
      break;
    }

    // Two-loop recursion: d = -H pg.
    d = pg;
    for (std::size_t m = memory.size(); m-- > 0;) {
      alpha[m] = memory[m].rho * k.dot(memory[m].s.data(), d.data(), n);
      k.axpy(-alpha[m], memory[m].y.data(), d.data(), n);
    }
    if (!memory.empty()) {
      const Pair& last = memory.back();
      const double gamma =
          k.dot(last.s.data(), last.y.data(), n) / k.dot(last.y.data(), last.y.data(), n);
      for (double& v : d) v *= gamma;
    }
    for (std::size_t m = 0; m < memory.size(); ++m) {
      const double beta = memory[m].rho * k.dot(memory[m].y.data(), d.data(), n);
      k.axpy(alpha[m] - beta, memory[m].s.data(), d.data(), n);
    }
    for (double& v : d) v = -v;
    // Variables held at a bound by the gradient do not move.
    for (std::size_t c = 0; c < n; ++c) {
      if (pg[c] == 0.0 && g[c] != 0.0) d[c] = 0.0;
    }

    if (k.dot(d.data(), pg.data(), n) >= 0.0) {
      memory.clear();
      for (std::size_t c = 0; c < n; ++c) d[c] = -pg[c];
    }

    double step = memory.empty() ? std::min(1.0, 1.0 / std::max(infNorm(d), 1e-300)) : 1.0;
    bool accepted = false;
    double fNew = f;
    for (std::size_t ls = 0; ls < options.lineSearch.maxSteps; ++ls) {
      for (std::size_t c = 0; c < n; ++c) xNew[c] = result.x[c] + step * d[c];
      if (box) box->clamp(xNew);
      double decrease = 0.0;
      for (std::size_t c = 0; c < n; ++c) decrease += g[c] * (xNew[c] - result.x[c]);
      fNew = objective(xNew, gNew);
      if (std::isfinite(fNew) && fNew <= f + options.lineSearch.armijo * decrease) {
        accepted = true;
        break;
      }
      step *= options.lineSearch.shrink;
    }
    result.iterations = it + 1;
    if (!accepted) {
      if (memory.empty()) break;
      // Retry from steepest descent before giving up.
      memory.clear();
      continue;
    }

    Pair p{Vector(n), Vector(n), 0.0};
    for (std::size_t c = 0; c < n; ++c) {
      p.s[c] = xNew[c] - result.x[c];
      p.y[c] = gNew[c] - g[c];
    }
    const double sy = k.dot(p.s.data(), p.y.data(), n);
    if (sy > 1e-12 * std::sqrt(k.dot(p.s.data(), p.s.data(), n) * k.dot(p.y.data(), p.y.data(), n))) {
      p.rho = 1.0 / sy;
      memory.push_back(std::move(p));
      if (memory.size() > options.history) memory.pop_front();
    }

    const double previous = f;
    std::swap(result.x, xNew);
    std::swap(g, gNew);
    f = fNew;
    if (std::abs(previous - f) <= options.funcTol * std::max(1.0, std::abs(previous))) {
      result.converged = true;
      break;
    }
  }
  result.value = f;
  return result;
}

}  // namespace randef
