#include <algorithm>
#include <cmath>

#include "detail.hpp"
#include "randef/errors.hpp"

namespace randef {
namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

AttackOutcome fgsm(const Network& net, std::span<const double> x, Label label, double epsilon,
                   const Box& bounds) {
  detail::requireCorrect(net, x, label);
  if (!(epsilon >= 0.0)) throw DomainError("FGSM epsilon must be non-negative");
  const Vector grad = lossAndGradients(net, x, label, false).grads.inputGrad;
  Vector candidate(x.begin(), x.end());
  for (std::size_t k = 0; k < candidate.size(); ++k) candidate[k] += epsilon * sign(grad[k]);
  bounds.clamp(candidate);
  return detail::finishOutcome(net, x, label, std::move(candidate), 1, bounds);
}

AttackOutcome bimLinf(const Network& net, std::span<const double> x, Label label, double epsilon,
                      double stepSize, std::size_t iters, const Box& bounds) {
  detail::requireCorrect(net, x, label);
  if (!(epsilon >= 0.0) || !(stepSize > 0.0)) throw DomainError("BIM needs epsilon >= 0, step > 0");
  if (iters == 0) throw DomainError("BIM needs at least one iteration");
  Vector current(x.begin(), x.end());
  std::size_t it = 0;
  while (it < iters) {
    const Vector grad = lossAndGradients(net, current, label, false).grads.inputGrad;
    for (std::size_t k = 0; k < current.size(); ++k) {
      const double stepped = current[k] + stepSize * sign(grad[k]);
      const double lo = std::max(bounds.lower, x[k] - epsilon);
      const double hi = std::min(bounds.upper, x[k] + epsilon);
      current[k] = std::clamp(stepped, lo, hi);
    }
    ++it;
    if (classify(net, current) != label) break;
  }
  return detail::finishOutcome(net, x, label, std::move(current), it, bounds);
}

}  // namespace randef
