#include <algorithm>
#include <cmath>
#include <limits>

#include "detail.hpp"
#include "randef/errors.hpp"

namespace randef {
namespace {

// atanh argument is kept inside the open interval so box corners stay finite.
constexpr double kTanhLimit = 1.0 - 1e-6;

}  // namespace

Vector toTanhSpace(std::span<const double> x, const Box& bounds) {
  Vector w(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double unit = 2.0 * (x[k] - bounds.lower) / bounds.range() - 1.0;
    w[k] = std::atanh(std::clamp(unit, -kTanhLimit, kTanhLimit));
  }
  return w;
}

Vector fromTanhSpace(std::span<const double> w, const Box& bounds) {
  Vector x(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    x[k] = bounds.lower + bounds.range() * 0.5 * (std::tanh(w[k]) + 1.0);
  }
  return x;
}

// Carlini-Wagner L2 in tanh space with Adam and a binary search over the
// trade-off constant. Objective: |x' - x|^2 + c * max(Z_true - max_{k!=true} Z_k, -kappa).
AttackOutcome cwL2(const Network& net, std::span<const double> x, Label label,
                   const CwParams& params, const Box& bounds) {
  detail::requireCorrect(net, x, label);
  if (!(params.learningRate > 0.0) || !(params.initialConst > 0.0)) {
    throw DomainError("CW learning rate and constant must be positive");
  }
  const std::size_t n = x.size();
  const Vector w0 = toTanhSpace(x, bounds);
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  constexpr double kUpperInit = 1e10;

  double lowerC = 0.0;
  double upperC = kUpperInit;
  double c = params.initialConst;
  Vector bestAdv;
  double bestL2 = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;

  Vector w(n), m(n), v(n), xp(n), coeffs(net.classCount()), grad(n);
  for (std::size_t bs = 0; bs < params.binarySearchSteps; ++bs) {
    w = w0;
    std::fill(m.begin(), m.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    bool succeededHere = false;
    double previous = std::numeric_limits<double>::infinity();
    const std::size_t checkEvery = std::max<std::size_t>(1, params.steps / 10);

    for (std::size_t step = 0; step < params.steps; ++step) {
      for (std::size_t k = 0; k < n; ++k) {
        xp[k] = bounds.lower + bounds.range() * 0.5 * (std::tanh(w[k]) + 1.0);
      }
      const ForwardTrace tr = trace(net, xp);
      const Vector& z = tr.post.back();
      const Label other = runnerUp(z, label);
      const double margin = z[label] - z[other];
      double dist = 0.0;
      for (std::size_t k = 0; k < n; ++k) dist += (xp[k] - x[k]) * (xp[k] - x[k]);

      if (argmaxLowest(z) != label) {
        succeededHere = true;
        const double l2 = std::sqrt(dist);
        if (l2 < bestL2) {
          bestL2 = l2;
          bestAdv = xp;
        }
      }
      const double loss = dist + c * std::max(margin, -params.kappa);
      if (params.abortEarly && step % checkEvery == 0) {
        if (loss > previous * 0.9999) break;
        previous = loss;
      }

      // d loss / d x'
      std::fill(coeffs.begin(), coeffs.end(), 0.0);
      if (margin > -params.kappa) {
        coeffs[label] = c;
        coeffs[other] = -c;
      }
      const Vector marginGrad = backward(net, tr, coeffs, false).inputGrad;
      ++iterations;
      const double t = static_cast<double>(step + 1);
      const double corr1 = 1.0 - std::pow(kBeta1, t);
      const double corr2 = 1.0 - std::pow(kBeta2, t);
      for (std::size_t k = 0; k < n; ++k) {
        const double th = std::tanh(w[k]);
        const double dxdw = bounds.range() * 0.5 * (1.0 - th * th);
        grad[k] = (2.0 * (xp[k] - x[k]) + marginGrad[k]) * dxdw;
        m[k] = kBeta1 * m[k] + (1.0 - kBeta1) * grad[k];
        v[k] = kBeta2 * v[k] + (1.0 - kBeta2) * grad[k] * grad[k];
        w[k] -= params.learningRate * (m[k] / corr1) / (std::sqrt(v[k] / corr2) + kEps);
      }
    }

    if (succeededHere) {
      upperC = std::min(upperC, c);
      c = 0.5 * (lowerC + upperC);
    } else {
      lowerC = std::max(lowerC, c);
      c = upperC < kUpperInit ? 0.5 * (lowerC + upperC) : c * 10.0;
    }
  }
  return detail::finishOutcome(net, x, label, std::move(bestAdv), iterations, bounds);
}

}  // namespace randef
