#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>

#include "randef/dataset.hpp"
#include "randef/types.hpp"

namespace randef {

struct LineSearchConfig {
  double armijo = 1e-4;   // sufficient-decrease constant
  double shrink = 0.5;    // backtracking factor
  std::size_t maxSteps = 30;
};

struct LbfgsOptions {
  std::size_t history = 10;
  std::size_t maxIters = 100;
  double gradTol = 1e-10;  // on the projected gradient, infinity norm
  double funcTol = 1e-12;  // relative decrease between iterations
  LineSearchConfig lineSearch{};
};

struct LbfgsResult {
  Vector x;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Writes the gradient at x into `grad` and returns the objective value.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

/// Limited-memory BFGS with the two-loop recursion. With a box, iterates are
/// kept feasible by projection: the search direction is built from the
/// projected gradient and each backtracking trial point is projected.
LbfgsResult lbfgsMinimize(const Objective& objective, Vector x0, const std::optional<Box>& box,
                          const LbfgsOptions& options);

}  // namespace randef
