#pragma once

#include <cstddef>
#include <vector>

namespace randef {

using Vector = std::vector<double>;

/// Zero-based class index in [0, classCount).
using Label = std::size_t;

struct Example {
  Vector input;
  Label label = 0;

  friend bool operator==(const Example&, const Example&) = default;
};

/// Ordered sequence of (input, label) pairs. Order is significant.
using LabeledSet = std::vector<Example>;

}  // namespace randef
