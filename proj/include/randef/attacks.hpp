#pragma once
// The six white-box, untargeted adversarial-example generators. Every attack
// requires the benign input to be classified correctly (ContractError
// otherwise) and reports success only when the returned point is
// misclassified and lies inside the domain box.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "randef/dataset.hpp"
#include "randef/nncore.hpp"
#include "randef/optim.hpp"

namespace randef {

enum class AttackMethod { Fgsm, BimLinf, DeepFool, Jsma, Lbfgs, CwL2 };

inline constexpr std::array<AttackMethod, 6> kAllAttackMethods{
    AttackMethod::Fgsm, AttackMethod::BimLinf, AttackMethod::DeepFool,
    AttackMethod::Jsma, AttackMethod::Lbfgs,   AttackMethod::CwL2};

std::string_view methodName(AttackMethod m) noexcept;
/// Accepts the canonical names ("FGSM", "BIM_LINF", "DEEPFOOL", "JSMA", "LBFGS", "CW_L2").
AttackMethod parseMethod(std::string_view name);

struct AttackOutcome {
  bool success = false;
  Vector adversarial;  // empty unless success
  std::size_t iterations = 0;
  double l2 = 0.0;
  double linf = 0.0;
};

struct FgsmParams {
  /// Tried in order; the first misclassifying step size wins.
  std::vector<double> epsilons;
};

struct BimParams {
  std::vector<double> epsilons;
  std::size_t iterations = 10;
  double stepFraction = 0.25;  // step = epsilon * stepFraction
};

struct DeepFoolParams {
  double overshoot = 0.02;
  std::size_t maxIters = 50;
};

struct JsmaParams {
  double theta = 0.1;  // absolute change per selected feature per step
  std::size_t maxFeatures = 0;
};

struct LbfgsAttackParams {
  /// Weight of the squared-distance term; the bisection moves it.
  double initialConst = 1.0;
  /// Decade steps used to bracket the success/failure boundary in c.
  std::size_t searchSteps = 8;
  std::size_t bisectionSteps = 5;
  LbfgsOptions optimizer{10, 100, 1e-10, 1e-10, {}};
};

struct CwParams {
  std::size_t steps = 1000;
  double learningRate = 0.01;
  double initialConst = 1e-2;
  std::size_t binarySearchSteps = 5;
  double kappa = 0.0;
  bool abortEarly = true;
};

struct AttackConfig {
  AttackMethod method = AttackMethod::Fgsm;
  Box bounds{};
  FgsmParams fgsm;
  BimParams bim;
  DeepFoolParams deepfool;
  JsmaParams jsma;
  LbfgsAttackParams lbfgs;
  CwParams cw;

  /// Canonical defaults scaled to `bounds` and the input dimension.
  static AttackConfig defaults(AttackMethod method, const Box& bounds, std::size_t inputDim);
  /// Throws ConfigError when a cap is zero, a step is not positive or bounds are inverted.
  void validate() const;
};

// -------------------------------------------------------------- single attacks

AttackOutcome fgsm(const Network& net, std::span<const double> x, Label label, double epsilon,
                   const Box& bounds);

AttackOutcome bimLinf(const Network& net, std::span<const double> x, Label label, double epsilon,
                      double stepSize, std::size_t iters, const Box& bounds);

AttackOutcome deepfool(const Network& net, std::span<const double> x, Label label,
                       double overshoot, std::size_t maxIters, const Box& bounds);

AttackOutcome jsma(const Network& net, std::span<const double> x, Label label, double theta,
                   std::size_t maxFeatures, const Box& bounds);

AttackOutcome lbfgsAttack(const Network& net, std::span<const double> x, Label label,
                          const LbfgsAttackParams& params, const Box& bounds);

AttackOutcome cwL2(const Network& net, std::span<const double> x, Label label,
                   const CwParams& params, const Box& bounds);

/// Dispatches on cfg.method; FGSM and BIM walk their epsilon lists.
AttackOutcome runAttack(const Network& net, std::span<const double> x, Label label,
                        const AttackConfig& cfg);

// ------------------------------------------------------------- building blocks

/// CW change of variables: x = lower + range * (tanh(w) + 1) / 2.
Vector toTanhSpace(std::span<const double> x, const Box& bounds);
Vector fromTanhSpace(std::span<const double> w, const Box& bounds);

/// Highest-scoring class other than `exclude` (lowest index on ties).
Label runnerUp(std::span<const double> logits, Label exclude);

struct SaliencyPair {
  std::size_t first = 0;
  std::size_t second = 0;
  int direction = 0;  // +1 increase both features, -1 decrease both
  double score = 0.0;
  bool found = false;
};

/// Picks the feature pair maximising |alpha| * |beta| where alpha sums the
/// target-class gradient and beta the summed gradient of every other class
/// over the pair, subject to sign(alpha) = direction = -sign(beta).
/// `canIncrease` / `canDecrease` mark features not yet saturated in that
/// direction; a pair is admissible only if it keeps the number of modified
/// features within `maxFeatures`.
SaliencyPair selectSaliencyPair(std::span<const double> targetGrad,
                                std::span<const double> othersGrad,
                                const std::vector<bool>& canIncrease,
                                const std::vector<bool>& canDecrease,
                                const std::vector<bool>& modified, std::size_t maxFeatures);

// ------------------------------------------------------------- adversarial sets

struct AdversarialSet {
  AttackMethod method = AttackMethod::Fgsm;
  /// One record per benign input, id = index into the benign set. Failed
  /// generations keep success = false and an empty payload.
  VectorFile file;

  std::size_t attempted() const noexcept { return file.records.size(); }
  std::size_t succeeded() const noexcept;
  /// A_h(S): successful adversarial vectors with their benign ground truth.
  LabeledSet examples() const;
  /// Benign twins of the successful rows, in the same order.
  LabeledSet benignTwins(const LabeledSet& benign) const;
};

/// Attacks every input of `data` (all must be classified correctly).
/// Success is re-verified against the network and the box independently of
/// the attack's own bookkeeping. Output does not depend on `workers`.
AdversarialSet generateAdversarialSet(const Network& net, const LabeledSet& data,
                                      const AttackConfig& cfg, std::size_t workers = 1);

AdversarialSet adversarialSetFromFile(VectorFile file);

}  // namespace randef
