#pragma once

#include <span>

#include "randef/attacks.hpp"

namespace randef::detail {

/// ContractError unless net classifies x as label.
void requireCorrect(const Network& net, std::span<const double> x, Label label);

/// Fills success/distortion fields from a candidate point. The candidate is
/// kept only if it is misclassified and inside the box.
AttackOutcome finishOutcome(const Network& net, std::span<const double> x, Label label,
                            Vector candidate, std::size_t iterations, const Box& bounds);

double l2Distance(std::span<const double> a, std::span<const double> b);
double linfDistance(std::span<const double> a, std::span<const double> b);

}  // namespace randef::detail
