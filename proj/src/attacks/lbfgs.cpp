#include <cmath>
#include <optional>

#include "detail.hpp"
#include "randef/errors.hpp"

namespace randef {

// Box-constrained L-BFGS attack. For a distance weight c the optimiser
// minimises c * |x' - x|^2 + CE(x', runner-up class). Large c keeps x' at x;
// the search brackets the largest c that still misclassifies (the
// least-distorted solution) and refines it by geometric bisection.
AttackOutcome lbfgsAttack(const Network& net, std::span<const double> x, Label label,
                          const LbfgsAttackParams& params, const Box& bounds) {
  detail::requireCorrect(net, x, label);
  if (!(params.initialConst > 0.0)) throw DomainError("L-BFGS constant must be positive");
  const Prediction start = forward(net, x);
  const Label target = runnerUp(start.logits, label);
  const Vector origin(x.begin(), x.end());

  std::optional<AttackOutcome> best;
  std::size_t iterations = 0;

  auto attempt = [&](double c) {
    const Objective objective = [&](std::span<const double> xp, std::span<double> grad) {
      LossGradient lg = lossAndGradients(net, xp, target, false);
      double dist = 0.0;
      for (std::size_t k = 0; k < xp.size(); ++k) {
        const double d = xp[k] - origin[k];
        dist += d * d;
        grad[k] = 2.0 * c * d + lg.grads.inputGrad[k];
      }
      return c * dist + lg.loss;
    };
    LbfgsResult r = lbfgsMinimize(objective, origin, bounds, params.optimizer);
    iterations += r.iterations;
    AttackOutcome o = detail::finishOutcome(net, x, label, std::move(r.x), r.iterations, bounds);
    if (o.success && (!best || o.l2 < best->l2)) best = o;
    return o.success;
  };

  double c = params.initialConst;
  std::optional<double> cSuccess;
  std::optional<double> cFailure;
  if (attempt(c)) {
    cSuccess = c;
    for (std::size_t s = 0; s < params.searchSteps; ++s) {
      c *= 10.0;
      if (attempt(c)) {
        cSuccess = c;
      } else {
        cFailure = c;
        break;
      }
    }
  } else {
    cFailure = c;
    for (std::size_t s = 0; s < params.searchSteps; ++s) {
      c /= 10.0;
      if (attempt(c)) {
        cSuccess = c;
        break;
      }
      cFailure = c;
    }
  }

  if (cSuccess && cFailure) {
    double lo = *cSuccess;
    double hi = *cFailure;
    for (std::size_t b = 0; b < params.bisectionSteps; ++b) {
      const double mid = std::sqrt(lo * hi);
      if (attempt(mid)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
  }

  if (!best) return detail::finishOutcome(net, x, label, {}, iterations, bounds);
  best->iterations = iterations;
  return *best;
}

}  // namespace randef
