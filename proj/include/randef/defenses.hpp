#pragma once
// Randomized defenses. Each turns a trained network into a defended
// classifier with the same domain and codomain; the randomness of one
// installation is fixed by its seed.
//
//   L1     Gaussian noise N(0, sigma^2) added to every input coordinate,
//          drawn fresh for each query.
//   L+     Every parameter w replaced once by w + N(0, sigma^2) at install time.
//   L*     L+ weight noise plus L1 input noise with the same sigma. The two
//          noise streams are split from the seed exactly as L+ and L1 split
//          theirs, so L* = L1 o L+ under a shared seed.
//   RPENN  m variations, each parameter redrawn from N(w, (lambda * w)^2);
//          the ensemble votes (or averages logits).

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "randef/nncore.hpp"
#include "randef/rng.hpp"

namespace randef {

enum class DefenseKind { L1, LStar, LPlus, Rpenn };
enum class Combine { Majority, Average };

std::string_view defenseName(DefenseKind k) noexcept;
DefenseKind parseDefense(std::string_view name);
std::string_view combineName(Combine c) noexcept;
Combine parseCombine(std::string_view name);

struct DefenseConfig {
  DefenseKind kind = DefenseKind::L1;
  double sigma = 0.0;       // L1, L*, L+
  double lambda = 0.0;      // RPENN
  std::size_t m = 0;        // RPENN, odd
  Combine combine = Combine::Majority;
  bool perturbBiases = true;

  static DefenseConfig l1(double sigma);
  static DefenseConfig lStar(double sigma);
  static DefenseConfig lPlus(double sigma);
  static DefenseConfig rpenn(double lambda, std::size_t m, Combine combine = Combine::Majority);

  /// sigma for the additive defenses, lambda for RPENN.
  double noise() const noexcept { return kind == DefenseKind::Rpenn ? lambda : sigma; }
  bool addsInputNoise() const noexcept {
    return kind == DefenseKind::L1 || kind == DefenseKind::LStar;
  }
  /// DomainError unless exactly the parameters relevant to `kind` are set and valid.
  void validate() const;

  friend bool operator==(const DefenseConfig&, const DefenseConfig&) = default;
};

/// Copy of `base` with every parameter shifted by N(0, sigma^2).
Network perturbAbsolute(const Network& base, double sigma, Seed seed, bool biases = true);
/// Copy of `base` with every parameter w redrawn from N(w, (lambda * w)^2).
/// Zero parameters stay exactly zero.
Network perturbRelative(const Network& base, double lambda, Seed seed, bool biases = true);

/// Most frequent label; ties go to the lowest class index.
Label majorityVote(std::span<const Label> votes, std::size_t classCount);

/// One seeded realisation of a defended classifier. Weight noise is drawn
/// once at construction; the input-noise stream (L1, L*) advances with every
/// query, so queries to one installation must be serialised.
class Installation {
 public:
  Installation(DefenseConfig config, std::shared_ptr<const Network> base, Seed seed);

  const DefenseConfig& config() const noexcept { return config_; }
  const Network& base() const noexcept { return *base_; }
  Seed seed() const noexcept { return seed_; }
  /// Perturbed networks: none for L1, one for L+/L*, m for RPENN.
  const std::vector<Network>& variations() const noexcept { return variations_; }

  /// x plus a fresh draw of input noise for L1/L*; an unchanged copy otherwise.
  Vector noisyInput(std::span<const double> x);

  /// For RPENN with majority voting the logits hold vote counts; with
  /// averaging they hold the mean logits.
  Prediction predict(std::span<const double> x);
  Label classify(std::span<const double> x);
  /// Same labels as calling classify on each input in order. RPENN runs
  /// variation by variation over the whole set so each variation's weights
  /// stay in cache.
  std::vector<Label> classifyAll(const LabeledSet& inputs);

 private:
  const Network& single() const noexcept {
    return variations_.empty() ? *base_ : variations_.front();
  }

  DefenseConfig config_;
  std::shared_ptr<const Network> base_;
  Seed seed_;
  std::vector<Network> variations_;
  Engine inputStream_;
  std::normal_distribution<double> inputNoise_;
  std::vector<Label> votes_;
};

Installation defendL1(std::shared_ptr<const Network> base, double sigma, Seed seed);
Installation defendLStar(std::shared_ptr<const Network> base, double sigma, Seed seed);
Installation defendLPlus(std::shared_ptr<const Network> base, double sigma, Seed seed);
Installation defendRpenn(std::shared_ptr<const Network> base, double lambda, std::size_t m,
                         Seed seed, Combine combine = Combine::Majority);

}  // namespace randef
