#include "randef/defenses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "randef/errors.hpp"
#include "randef/kernels.hpp"

namespace randef {

std::string_view defenseName(DefenseKind k) noexcept {
  switch (k) {
    case DefenseKind::L1:
      return "L1";
    case DefenseKind::LStar:
      return "LSTAR";
    case DefenseKind::LPlus:
      return "LPLUS";
    case DefenseKind::Rpenn:
      return "RPENN";
  }
  return "UNKNOWN";
}

DefenseKind parseDefense(std::string_view name) {
  for (DefenseKind k : {DefenseKind::L1, DefenseKind::LStar, DefenseKind::LPlus, DefenseKind::Rpenn}) {
    if (defenseName(k) == name) return k;
  }
  throw ConfigError("unknown defense '" + std::string(name) + "'");
}

std::string_view combineName(Combine c) noexcept {
  return c == Combine::Majority ? "MAJORITY" : "AVERAGE";
}

Combine parseCombine(std::string_view name) {
  if (name == "MAJORITY") return Combine::Majority;
  if (name == "AVERAGE") return Combine::Average;
  throw ConfigError("unknown combine rule '" + std::string(name) + "'");
}

DefenseConfig DefenseConfig::l1(double sigma) {
  DefenseConfig c;
  c.kind = DefenseKind::L1;
  c.sigma = sigma;
  return c;
}

DefenseConfig DefenseConfig::lStar(double sigma) {
  DefenseConfig c = l1(sigma);
  c.kind = DefenseKind::LStar;
  return c;
}

DefenseConfig DefenseConfig::lPlus(double sigma) {
  DefenseConfig c = l1(sigma);
  c.kind = DefenseKind::LPlus;
  return c;
}

DefenseConfig DefenseConfig::rpenn(double lambda, std::size_t m, Combine combine) {
  DefenseConfig c;
  c.kind = DefenseKind::Rpenn;
  c.lambda = lambda;
  c.m = m;
  c.combine = combine;
  return c;
}

void DefenseConfig::validate() const {
  if (kind == DefenseKind::Rpenn) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("RPENN lambda must be > 0");
    if (m == 0 || m % 2 == 0) throw DomainError("RPENN ensemble size must be odd and >= 1");
    if (sigma != 0.0) throw DomainError("RPENN does not take sigma");
  } else {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be > 0");
    if (lambda != 0.0 || m != 0) throw DomainError(std::string(defenseName(kind)) +
                                                   " takes only sigma");
  }
}

Network perturbAbsolute(const Network& base, double sigma, Seed seed, bool biases) {
  Network net = base;
  Engine engine(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  net.transformParameters([&](double& w, ParameterKind kind) {
    if (kind == ParameterKind::Bias && !biases) return;
    w += sigma * noise(engine);
  });
  return net;
}

Network perturbRelative(const Network& base, double lambda, Seed seed, bool biases) {
  Network net = base;
  Engine engine(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  net.transformParameters([&](double& w, ParameterKind kind) {
    if (kind == ParameterKind::Bias && !biases) return;
    // Draw for every parameter so stream positions do not depend on values.
    const double z = noise(engine);
    w += lambda * w * z;
  });
  return net;
}

Label majorityVote(std::span<const Label> votes, std::size_t classCount) {
  if (votes.empty()) throw ContractError("majority vote over no votes");
  std::vector<std::size_t> counts(classCount, 0);
  for (Label v : votes) {
    if (v >= classCount) throw DomainError("vote for unknown class");
    ++counts[v];
  }
  return static_cast<Label>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

Installation::Installation(DefenseConfig config, std::shared_ptr<const Network> base, Seed seed)
    : config_(config),
      base_(std::move(base)),
      seed_(seed),
      inputStream_(deriveSeed(seed, "input")),
      inputNoise_(0.0, config.sigma > 0.0 ? config.sigma : 1.0) {
  if (!base_) throw ContractError("installation needs a base network");
  config_.validate();
  switch (config_.kind) {
    case DefenseKind::L1:
      break;
    case DefenseKind::LStar:
    case DefenseKind::LPlus:
      variations_.push_back(
          perturbAbsolute(*base_, config_.sigma, deriveSeed(seed, "weights"), config_.perturbBiases));
      break;
    case DefenseKind::Rpenn:
      variations_.reserve(config_.m);
      for (std::size_t v = 0; v < config_.m; ++v) {
        variations_.push_back(perturbRelative(*base_, config_.lambda,
                                              deriveSeed(seed, "variation", {v}),
                                              config_.perturbBiases));
      }
      votes_.resize(config_.m);
      break;
  }
}

Vector Installation::noisyInput(std::span<const double> x) {
  Vector out(x.begin(), x.end());
  if (config_.addsInputNoise()) {
    for (double& v : out) v += inputNoise_(inputStream_);
  }
  return out;
}

Prediction Installation::predict(std::span<const double> x) {
  if (x.size() != base_->inputDim()) throw ShapeError("input dimension mismatch");
  if (config_.kind != DefenseKind::Rpenn) {
    if (!config_.addsInputNoise()) return forward(single(), x);
    const Vector noisy = noisyInput(x);
    return forward(single(), noisy);
  }
  Prediction p;
  const std::size_t classes = base_->classCount();
  p.logits.assign(classes, 0.0);
  if (config_.combine == Combine::Majority) {
    for (std::size_t v = 0; v < variations_.size(); ++v) {
      votes_[v] = randef::classify(variations_[v], x);
      p.logits[votes_[v]] += 1.0;
    }
    p.label = majorityVote(votes_, classes);
  } else {
    Vector logits;
    for (const Network& net : variations_) {
      forwardLogits(net, x, logits);
      for (std::size_t k = 0; k < classes; ++k) p.logits[k] += logits[k];
    }
    for (double& z : p.logits) z /= static_cast<double>(variations_.size());
    p.label = argmaxLowest(p.logits);
  }
  return p;
}

Label Installation::classify(std::span<const double> x) {
  if (x.size() != base_->inputDim()) throw ShapeError("input dimension mismatch");
  switch (config_.kind) {
    case DefenseKind::LPlus:
      return randef::classify(single(), x);
    case DefenseKind::L1:
    case DefenseKind::LStar: {
      thread_local Vector noisy;
      noisy.assign(x.begin(), x.end());
      for (double& v : noisy) v += inputNoise_(inputStream_);
      return randef::classify(single(), noisy);
    }
    case DefenseKind::Rpenn:
      if (config_.combine == Combine::Majority) {
        for (std::size_t v = 0; v < variations_.size(); ++v) {
          votes_[v] = randef::classify(variations_[v], x);
        }
        return majorityVote(votes_, base_->classCount());
      }
      return predict(x).label;
  }
  return predict(x).label;
}

std::vector<Label> Installation::classifyAll(const LabeledSet& inputs) {
  std::vector<Label> out;
  out.reserve(inputs.size());
  if (config_.kind != DefenseKind::Rpenn) {
    for (const Example& e : inputs) out.push_back(classify(e.input));
    return out;
  }
  for (const Example& e : inputs) {
    if (e.input.size() != base_->inputDim()) throw ShapeError("input dimension mismatch");
  }
  const std::size_t classes = base_->classCount();
  // Vote counts or logit sums, one row per input; summation order over
  // variations matches predict().
  std::vector<double> acc(inputs.size() * classes, 0.0);
  Vector logits;
  for (const Network& net : variations_) {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      double* row = acc.data() + i * classes;
      if (config_.combine == Combine::Majority) {
        row[randef::classify(net, inputs[i].input)] += 1.0;
      } else {
        forwardLogits(net, inputs[i].input, logits);
        for (std::size_t k = 0; k < classes; ++k) row[k] += logits[k];
      }
    }
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::span<const double> row(acc.data() + i * classes, classes);
    if (config_.combine == Combine::Majority) {
      out.push_back(argmaxLowest(row));
    } else {
      Vector mean(row.begin(), row.end());
      for (double& z : mean) z /= static_cast<double>(variations_.size());
      out.push_back(argmaxLowest(mean));
    }
  }
  return out;
}

Installation defendL1(std::shared_ptr<const Network> base, double sigma, Seed seed) {
  return Installation(DefenseConfig::l1(sigma), std::move(base), seed);
}

Installation defendLStar(std::shared_ptr<const Network> base, double sigma, Seed seed) {
  return Installation(DefenseConfig::lStar(sigma), std::move(base), seed);
}

Installation defendLPlus(std::shared_ptr<const Network> base, double sigma, Seed seed) {
  return Installation(DefenseConfig::lPlus(sigma), std::move(base), seed);
}

Installation defendRpenn(std::shared_ptr<const Network> base, double lambda, std::size_t m,
                         Seed seed, Combine combine) {
  return Installation(DefenseConfig::rpenn(lambda, m, combine), std::move(base), seed);
}

}  // namespace randef
