#pragma once
// Central finite differences against the analytic cross-entropy gradients.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "randef/nncore.hpp"

namespace gradcheck {

struct Summary {
  std::size_t compared = 0;
  std::size_t failed = 0;
  std::size_t skippedAtKinks = 0;  // a +-h step changed the ReLU pattern
  double worstExcess = 0.0;        // max |a - fd| - tol, <= 0 when all pass
};

inline std::vector<bool> reluPattern(const randef::Network& net, std::span<const double> x) {
  std::vector<bool> p;
  const randef::ForwardTrace tr = randef::trace(net, x);
  for (std::size_t l = 0; l + 1 < tr.pre.size(); ++l) {
    for (double v : tr.pre[l]) p.push_back(v > 0.0);
  }
  return p;
}

inline void compare(Summary& s, double analytic, double numeric, double rel, double abs) {
  const double tol = abs + rel * std::max(std::abs(analytic), std::abs(numeric));
  const double excess = std::abs(analytic - numeric) - tol;
  ++s.compared;
  if (excess > 0.0) ++s.failed;
  s.worstExcess = std::max(s.worstExcess, excess);
}

/// Checks d CE / d input and d CE / d parameter for one (network, input, label).
inline void checkTriple(Summary& s, const randef::Network& net, const randef::Vector& x,
                        randef::Label label, double h = 1e-5, double rel = 1e-6,
                        double abs = 1e-8) {
  const randef::LossGradient lg = randef::lossAndGradients(net, x, label, true);
  const std::vector<bool> pattern = reluPattern(net, x);
  auto loss = [&](const randef::Network& n, const randef::Vector& v) {
    return randef::crossEntropy(randef::forward(n, v).logits, label);
  };

  for (std::size_t c = 0; c < x.size(); ++c) {
    randef::Vector up = x, down = x;
    up[c] += h;
    down[c] -= h;
    if (reluPattern(net, up) != pattern || reluPattern(net, down) != pattern) {
      ++s.skippedAtKinks;
      continue;
    }
    compare(s, lg.grads.inputGrad[c], (loss(net, up) - loss(net, down)) / (2 * h), rel, abs);
  }

  // Parameters in serialization order; the gradient bundle uses the same layout.
  std::vector<double> analytic;
  for (const auto& layer : lg.grads.layers) {
    analytic.insert(analytic.end(), layer.weights.begin(), layer.weights.end());
    analytic.insert(analytic.end(), layer.bias.begin(), layer.bias.end());
  }
  for (std::size_t p = 0; p < analytic.size(); ++p) {
    auto shifted = [&](double delta) {
      randef::Network n = net;
      std::size_t k = 0;
      n.transformParameters([&](double& w, randef::ParameterKind) {
        if (k++ == p) w += delta;
      });
      return n;
    };
    const randef::Network up = shifted(h), down = shifted(-h);
    if (reluPattern(up, x) != pattern || reluPattern(down, x) != pattern) {
      ++s.skippedAtKinks;
      continue;
    }
    compare(s, analytic[p], (loss(up, x) - loss(down, x)) / (2 * h), rel, abs);
  }
}

/// `triples` random networks, inputs and labels from `seed`.
inline Summary run(std::size_t triples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> width(3, 9), depth(1, 3), classes(2, 5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> n(0.0, 0.1);
  Summary s;
  for (std::size_t t = 0; t < triples; ++t) {
    std::vector<std::size_t> widths{width(rng)};
    const std::size_t hidden = depth(rng);
    for (std::size_t l = 0; l < hidden; ++l) widths.push_back(width(rng));
    widths.push_back(classes(rng));
    randef::Network net = randef::Network::initialized(widths, rng());
    net.transformParameters([&](double& w, randef::ParameterKind k) {
      if (k == randef::ParameterKind::Bias) w = n(rng);
    });
    randef::Vector x(widths.front());
    for (double& v : x) v = u(rng);
    const auto label = static_cast<randef::Label>(rng() % widths.back());
    checkTriple(s, net, x, label);
  }
  return s;
}

}  // namespace gradcheck
