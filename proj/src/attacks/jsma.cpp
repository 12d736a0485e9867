#include <algorithm>
#include <cmath>

#include "detail.hpp"
#include "randef/errors.hpp"

namespace randef {

SaliencyPair selectSaliencyPair(std::span<const double> targetGrad,
                                std::span<const double> othersGrad,
                                const std::vector<bool>& canIncrease,
                                const std::vector<bool>& canDecrease,
                                const std::vector<bool>& modified, std::size_t maxFeatures) {
  const std::size_t n = targetGrad.size();
  if (othersGrad.size() != n || canIncrease.size() != n || canDecrease.size() != n ||
      modified.size() != n) {
    throw ShapeError("saliency inputs disagree in length");
  }
  const auto used = static_cast<std::size_t>(std::count(modified.begin(), modified.end(), true));
  SaliencyPair best;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      const std::size_t added = (modified[p] ? 0 : 1) + (modified[q] ? 0 : 1);
      if (used + added > maxFeatures) continue;
      const double alpha = targetGrad[p] + targetGrad[q];
      const double beta = othersGrad[p] + othersGrad[q];
      for (int dir : {+1, -1}) {
        const auto& open = dir > 0 ? canIncrease : canDecrease;
        if (!open[p] || !open[q]) continue;
        if (!(dir * alpha > 0.0) || !(dir * beta < 0.0)) continue;
        const double score = std::abs(alpha) * std::abs(beta);
        if (!best.found || score > best.score) best = {p, q, dir, score, true};
      }
    }
  }
  return best;
}

// Untargeted JSMA: each step targets the runner-up class of the current
// prediction and moves the most salient feature pair by +-theta. Features
// stay eligible until they saturate at a bound; at most maxFeatures distinct
// coordinates are ever modified.
AttackOutcome jsma(const Network& net, std::span<const double> x, Label label, double theta,
                   std::size_t maxFeatures, const Box& bounds) {
  detail::requireCorrect(net, x, label);
  if (!(theta > 0.0)) throw DomainError("JSMA theta must be positive");
  const std::size_t n = x.size();
  if (maxFeatures == 0 || n < 2) return detail::finishOutcome(net, x, label, {}, 0, bounds);

  const auto stepsPerFeature = static_cast<std::size_t>(std::ceil(bounds.range() / theta));
  const std::size_t maxIters = std::max<std::size_t>(1, maxFeatures * stepsPerFeature);

  Vector current(x.begin(), x.end());
  std::vector<bool> modified(n, false), canIncrease(n), canDecrease(n);
  Vector logits, target(n), others(n);
  std::size_t it = 0;
  for (; it < maxIters; ++it) {
    const Jacobian jac = inputJacobian(net, current, &logits);
    if (argmaxLowest(logits) != label) break;
    const Label t = runnerUp(logits, label);
    std::fill(others.begin(), others.end(), 0.0);
    for (Label k = 0; k < jac.rows; ++k) {
      const auto row = jac.row(k);
      if (k == t) {
        std::copy(row.begin(), row.end(), target.begin());
      } else {
        for (std::size_t c = 0; c < n; ++c) others[c] += row[c];
      }
    }
    for (std::size_t c = 0; c < n; ++c) {
      canIncrease[c] = current[c] < bounds.upper;
      canDecrease[c] = current[c] > bounds.lower;
    }
    const SaliencyPair pick =
        selectSaliencyPair(target, others, canIncrease, canDecrease, modified, maxFeatures);
    if (!pick.found) break;
    for (std::size_t c : {pick.first, pick.second}) {
      current[c] = std::clamp(current[c] + pick.direction * theta, bounds.lower, bounds.upper);
      modified[c] = true;
    }
  }
  return detail::finishOutcome(net, x, label, std::move(current), it, bounds);
}

}  // namespace randef
