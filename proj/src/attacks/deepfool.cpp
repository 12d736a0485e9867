#include <cmath>
#include <limits>

#include "detail.hpp"
#include "randef/errors.hpp"

namespace randef {

// Multi-class DeepFool: linearise every logit difference Z_k - Z_label at the
// current point, step to the nearest linearised boundary, and accumulate.
// The iterate is x + (1 + overshoot) * total perturbation, clipped to the box.
AttackOutcome deepfool(const Network& net, std::span<const double> x, Label label,
                       double overshoot, std::size_t maxIters, const Box& bounds) {
  detail::requireCorrect(net, x, label);
  if (!(overshoot >= 0.0)) throw DomainError("DeepFool overshoot must be non-negative");
  const std::size_t n = x.size();
  Vector total(n, 0.0);
  Vector current(x.begin(), x.end());
  Vector logits;
  std::size_t steps = 0;

  for (std::size_t it = 0; it < maxIters; ++it) {
    const Jacobian jac = inputJacobian(net, current, &logits);
    if (argmaxLowest(logits) != label) break;

    double bestRatio = std::numeric_limits<double>::infinity();
    Label best = label;
    double bestNormSq = 0.0;
    for (Label k = 0; k < jac.rows; ++k) {
      if (k == label) continue;
      double normSq = 0.0;
      const auto rk = jac.row(k);
      const auto rl = jac.row(label);
      for (std::size_t c = 0; c < n; ++c) {
        const double w = rk[c] - rl[c];
        normSq += w * w;
      }
      if (normSq == 0.0) continue;
      const double ratio = std::abs(logits[k] - logits[label]) / std::sqrt(normSq);
      if (ratio < bestRatio) {
        bestRatio = ratio;
        best = k;
        bestNormSq = normSq;
      }
    }
    if (best == label) break;  // locally flat: no boundary to step toward

    const double scale = std::abs(logits[best] - logits[label]) / bestNormSq;
    const auto rb = jac.row(best);
    const auto rl = jac.row(label);
    for (std::size_t c = 0; c < n; ++c) total[c] += scale * (rb[c] - rl[c]);
    for (std::size_t c = 0; c < n; ++c) current[c] = x[c] + (1.0 + overshoot) * total[c];
    bounds.clamp(current);
    ++steps;
  }
  if (steps == 0) return detail::finishOutcome(net, x, label, {}, 0, bounds);
  return detail::finishOutcome(net, x, label, std::move(current), steps, bounds);
}

}  // namespace randef
