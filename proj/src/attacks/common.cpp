#include <algorithm>
#include <cmath>
#include <string>

#include "detail.hpp"
#include "randef/errors.hpp"
#include "randef/kernels.hpp"
#include "randef/parallel.hpp"

namespace randef {

std::string_view methodName(AttackMethod m) noexcept {
  switch (m) {
    case AttackMethod::Fgsm:
      return "FGSM";
    case AttackMethod::BimLinf:
      return "BIM_LINF";
    case AttackMethod::DeepFool:
      return "DEEPFOOL";
    case AttackMethod::Jsma:
      return "JSMA";
    case AttackMethod::Lbfgs:
      return "LBFGS";
    case AttackMethod::CwL2:
      return "CW_L2";
  }
  return "UNKNOWN";
}

AttackMethod parseMethod(std::string_view name) {
  for (AttackMethod m : kAllAttackMethods) {
    if (methodName(m) == name) return m;
  }
  throw ConfigError("unknown attack method '" + std::string(name) + "'");
}

AttackConfig AttackConfig::defaults(AttackMethod method, const Box& bounds, std::size_t inputDim) {
  AttackConfig cfg;
  cfg.method = method;
  cfg.bounds = bounds;
  const double range = bounds.range();
  // 30 step sizes from 1% to 30% of the input range.
  for (int k = 1; k <= 30; ++k) cfg.fgsm.epsilons.push_back(0.01 * k * range);
  cfg.bim.epsilons = cfg.fgsm.epsilons;
  cfg.jsma.theta = 0.1 * range;
  cfg.jsma.maxFeatures = std::max<std::size_t>(2, inputDim / 10);
  return cfg;
}

void AttackConfig::validate() const {
  if (!(bounds.lower < bounds.upper)) throw ConfigError("attack bounds need lower < upper");
  auto positive = [](const std::vector<double>& v) {
    return !v.empty() && std::all_of(v.begin(), v.end(), [](double e) { return e > 0.0; });
  };
  switch (method) {
    case AttackMethod::Fgsm:
      if (!positive(fgsm.epsilons)) throw ConfigError("FGSM needs positive epsilons");
      break;
    case AttackMethod::BimLinf:
      if (!positive(bim.epsilons)) throw ConfigError("BIM needs positive epsilons");
      if (bim.iterations == 0) throw ConfigError("BIM iteration cap must be >= 1");
      if (!(bim.stepFraction > 0.0)) throw ConfigError("BIM step fraction must be positive");
      break;
    case AttackMethod::DeepFool:
      if (deepfool.maxIters == 0) throw ConfigError("DeepFool iteration cap must be >= 1");
      if (!(deepfool.overshoot >= 0.0)) throw ConfigError("DeepFool overshoot must be >= 0");
      break;
    case AttackMethod::Jsma:
      if (!(jsma.theta > 0.0)) throw ConfigError("JSMA theta must be positive");
      break;
    case AttackMethod::Lbfgs:
      if (lbfgs.optimizer.maxIters == 0 || lbfgs.optimizer.history == 0) {
        throw ConfigError("L-BFGS caps must be >= 1");
      }
      if (!(lbfgs.initialConst > 0.0)) throw ConfigError("L-BFGS constant must be positive");
      break;
    case AttackMethod::CwL2:
      if (cw.steps == 0 || cw.binarySearchSteps == 0) throw ConfigError("CW caps must be >= 1");
      if (!(cw.learningRate > 0.0) || !(cw.initialConst > 0.0)) {
        throw ConfigError("CW learning rate and constant must be positive");
      }
      break;
  }
}

Label runnerUp(std::span<const double> logits, Label exclude) {
  Label best = exclude == 0 ? 1 : 0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    if (k != exclude && logits[k] > logits[best]) best = k;
  }
  return best;
}

namespace detail {

void requireCorrect(const Network& net, std::span<const double> x, Label label) {
  if (label >= net.classCount()) throw DomainError("label out of range");
  if (classify(net, x) != label) {
    throw ContractError("attack precondition violated: benign input is not classified as its label");
  }
}

double l2Distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(kernels::squaredDistance(a, b));
}

double linfDistance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

AttackOutcome finishOutcome(const Network& net, std::span<const double> x, Label label,
                            Vector candidate, std::size_t iterations, const Box& bounds) {
  AttackOutcome out;
  out.iterations = iterations;
  if (!candidate.empty() && bounds.contains(candidate) && classify(net, candidate) != label) {
    out.success = true;
    out.l2 = l2Distance(candidate, x);
    out.linf = linfDistance(candidate, x);
    out.adversarial = std::move(candidate);
  }
  return out;
}

}  // namespace detail

AttackOutcome runAttack(const Network& net, std::span<const double> x, Label label,
                        const AttackConfig& cfg) {
  switch (cfg.method) {
    case AttackMethod::Fgsm: {
      AttackOutcome last;
      std::size_t tries = 0;
      for (double eps : cfg.fgsm.epsilons) {
        last = fgsm(net, x, label, eps, cfg.bounds);
        tries += last.iterations;
        if (last.success) break;
      }
      last.iterations = tries;
      return last;
    }
    case AttackMethod::BimLinf: {
      AttackOutcome last;
      std::size_t tries = 0;
      for (double eps : cfg.bim.epsilons) {
        last = bimLinf(net, x, label, eps, eps * cfg.bim.stepFraction, cfg.bim.iterations,
                       cfg.bounds);
        tries += last.iterations;
        if (last.success) break;
      }
      last.iterations = tries;
      return last;
    }
    case AttackMethod::DeepFool:
      return deepfool(net, x, label, cfg.deepfool.overshoot, cfg.deepfool.maxIters, cfg.bounds);
    case AttackMethod::Jsma:
      return jsma(net, x, label, cfg.jsma.theta, cfg.jsma.maxFeatures, cfg.bounds);
    case AttackMethod::Lbfgs:
      return lbfgsAttack(net, x, label, cfg.lbfgs, cfg.bounds);
    case AttackMethod::CwL2:
      return cwL2(net, x, label, cfg.cw, cfg.bounds);
  }
  throw ConfigError("unknown attack method");
}

std::size_t AdversarialSet::succeeded() const noexcept {
  return static_cast<std::size_t>(std::count_if(file.records.begin(), file.records.end(),
                                                [](const VectorRecord& r) { return r.success; }));
}

LabeledSet AdversarialSet::examples() const { return toLabeledSet(file); }

LabeledSet AdversarialSet::benignTwins(const LabeledSet& benign) const {
  LabeledSet out;
  for (const auto& r : file.records) {
    if (!r.success) continue;
    if (r.id >= benign.size()) throw DependencyError("adversarial record refers to unknown input id");
    if (benign[r.id].label != r.label) {
      throw DependencyError("adversarial record label disagrees with its benign twin");
    }
    out.push_back(benign[r.id]);
  }
  return out;
}

AdversarialSet generateAdversarialSet(const Network& net, const LabeledSet& data,
                                      const AttackConfig& cfg, std::size_t workers) {
  cfg.validate();
  AdversarialSet set;
  set.method = cfg.method;
  set.file.dim = net.inputDim();
  set.file.records.resize(data.size());
  const std::string method(methodName(cfg.method));
  parallelFor(data.size(), workers, [&](std::size_t i) {
    const Example& ex = data[i];
    AttackOutcome outcome = runAttack(net, ex.input, ex.label, cfg);
    VectorRecord& rec = set.file.records[i];
    rec.id = i;
    rec.method = method;
    rec.label = ex.label;
    // Independent soundness check.
    rec.success = outcome.success && outcome.adversarial.size() == ex.input.size() &&
                  cfg.bounds.contains(outcome.adversarial) &&
                  classify(net, outcome.adversarial) != ex.label;
    if (rec.success) {
      rec.l2 = detail::l2Distance(outcome.adversarial, ex.input);
      rec.linf = detail::linfDistance(outcome.adversarial, ex.input);
      rec.payload = std::move(outcome.adversarial);
    }
  });
  return set;
}

AdversarialSet adversarialSetFromFile(VectorFile file) {
  AdversarialSet set;
  if (file.records.empty()) throw DependencyError("adversarial file has no records");
  set.method = parseMethod(file.records.front().method);
  for (const auto& r : file.records) {
    if (r.method != file.records.front().method) {
      throw DependencyError("adversarial file mixes attack methods");
    }
  }
  set.file = std::move(file);
  return set;
}

}  // namespace randef
