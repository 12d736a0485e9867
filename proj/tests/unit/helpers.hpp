#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "randef/nncore.hpp"
#include "randef/types.hpp"

namespace testing {

inline randef::Vector randomVector(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                   double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  randef::Vector v(n);
  for (double& x : v) x = u(rng);
  return v;
}

/// ReLU network with random biases so no unit starts exactly at zero.
inline randef::Network randomNetwork(std::mt19937_64& rng, std::vector<std::size_t> widths) {
  randef::Network net = randef::Network::initialized(widths, rng());
  std::normal_distribution<double> n(0.0, 0.1);
  net.transformParameters([&](double& w, randef::ParameterKind kind) {
    if (kind == randef::ParameterKind::Bias) w = n(rng);
  });
  return net;
}

/// One affine layer: logits = W x + b.
inline randef::Network affineNetwork(std::size_t inputs, std::vector<double> weights,
                                     std::vector<double> bias) {
  randef::Layer layer;
  layer.inputs = inputs;
  layer.outputs = bias.size();
  layer.weights = std::move(weights);
  layer.bias = std::move(bias);
  layer.activation = randef::Activation::Identity;
  return randef::Network({layer});
}

/// Small trained classifier on separable blobs, shared by several suites.
struct TrainedFixture {
  randef::Network net;
  randef::LabeledSet data;  // correctly classified inputs only
};

const TrainedFixture& trainedFixture();

}  // namespace testing
