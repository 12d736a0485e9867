#pragma once
// The evaluation pipeline at desk scale: data and base network from a master
// seed, curation, adversarial sets, grid sweeps over defense parameters,
// setting selection under a quality floor and the n-installation
// robustness experiment.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "randef/attacks.hpp"
#include "randef/dataset.hpp"
#include "randef/defenses.hpp"
#include "randef/metrics.hpp"
#include "randef/nncore.hpp"

namespace randef {

enum class Spacing { Linear, Geometric };

struct ParameterGrid {
  Spacing spacing = Spacing::Linear;
  double lower = 0.0;
  double upper = 1.0;
  std::size_t count = 1;

  /// ConfigError unless lower < upper (or count == 1), count >= 1 and,
  /// for geometric spacing, lower > 0.
  void validate() const;
};

/// Both endpoints are reproduced bit-exactly. Geometric grids are evenly
/// spaced in log10, so decades land on exact powers of ten.
std::vector<double> buildGrid(const ParameterGrid& grid);

/// Grid over one defense. RPENN points are the product noise x ensembleSizes,
/// noise-major.
struct DefenseGrid {
  DefenseKind kind = DefenseKind::L1;
  ParameterGrid noise;
  std::vector<std::size_t> ensembleSizes;  // RPENN only
  Combine combine = Combine::Majority;
  bool perturbBiases = true;

  std::vector<DefenseConfig> points() const;
};

struct DatasetPlan {
  DatasetKind kind = DatasetKind::SyntheticBlobs;
  std::size_t classCount = 10;
  std::size_t inputDim = 64;
  std::size_t trainCount = 2000;
  std::size_t evalCount = 240;
  double spread = 0.2;
  Box bounds{};
  // DatasetKind::File only
  std::string trainPath;
  std::string evalPath;
};

struct NetworkPlan {
  std::vector<std::size_t> hidden{128, 64};
  std::size_t epochs = 20;
  double learningRate = 0.01;
};

struct RobustnessPlan {
  std::vector<double> qSet{0.5, 0.8, 0.95, 0.99, 1.0};
  std::size_t fleetSize = 128;
};

struct ExperimentPlan {
  Seed seed = 0;
  DatasetPlan dataset;
  NetworkPlan network;
  std::vector<AttackMethod> attacks{kAllAttackMethods.begin(), kAllAttackMethods.end()};
  std::vector<DefenseGrid> defenses;
  /// Overrides the 10 / ceil(10/m) rule when set.
  std::optional<std::size_t> repetitions;
  RobustnessPlan robustness;
  std::vector<double> qualityFloors{0.99, 0.98};

  void validate() const;
  static ExperimentPlan fromJson(std::string_view text);
  std::string toJson() const;
};

ExperimentPlan loadPlan(const std::string& path);

// ------------------------------------------------------------------ stages

LabeledSet trainingSet(const ExperimentPlan& plan);
LabeledSet evaluationSet(const ExperimentPlan& plan);
TrainResult trainBase(const ExperimentPlan& plan, const LabeledSet& train);

struct CurationStats {
  std::size_t retained = 0;
  std::size_t discarded = 0;
};

/// Pairs the network labels correctly, in input order. CurationError when
/// nothing survives; ContractError when `raw` is empty.
LabeledSet curateDataset(const Network& net, const LabeledSet& raw,
                         CurationStats* stats = nullptr);

AttackConfig attackConfigFor(const ExperimentPlan& plan, AttackMethod method);

std::vector<AdversarialSet> generateAdversarialSets(const Network& net, const LabeledSet& benign,
                                                    const ExperimentPlan& plan,
                                                    std::size_t workers = 1);

/// Seeds of the repetitions averaged at one grid point.
std::vector<Seed> sweepSeeds(Seed master, const DefenseConfig& cfg, std::size_t gridIndex,
                             std::size_t repetitions);
/// Seeds of the robustness fleet; disjoint from every sweep path.
std::vector<Seed> robustnessSeeds(Seed master, const DefenseConfig& cfg, std::size_t n);

struct SweepInputs {
  std::shared_ptr<const Network> base;
  LabeledSet benign;
  std::vector<AdversarialSet> adversarial;
};

/// Estimated efficacy on every adversarial set and quality on its benign
/// twins, for every grid point. Each installation labels the whole benign
/// set and then each adversarial set in attack order; one installation
/// serves all attacks. Reports are ordered defense, grid point, attack,
/// (efficacy, quality). DependencyError when an adversarial set is empty.
std::vector<MetricReport> sweep(const ExperimentPlan& plan, const SweepInputs& inputs,
                                std::size_t workers = 1);

/// Same measurement for a single configuration and seed list (used to
/// re-verify selections).
std::vector<MetricReport> measureConfig(const DefenseConfig& cfg, std::size_t gridIndex,
                                        std::span<const Seed> seeds, const SweepInputs& inputs,
                                        std::size_t workers = 1);

/// Selection groups: L1, LSTAR, LPLUS, RPENN_M1 (RPENN with m = 1) and
/// RPENN (m > 1).
std::string selectionGroup(const DefenseConfig& cfg);

struct Selection {
  std::string group;
  DefenseConfig config;
  std::size_t gridIndex = 0;
  double floor = 0.0;
  double worstQuality = 0.0;
  double worstEfficacy = 0.0;
};

/// Per group, among grid points whose worst-case quality over attacks
/// exceeds `qualityFloor`, the one with the highest worst-case efficacy;
/// ties go to the smaller noise, then the smaller ensemble. SelectionError
/// names the first group without any admissible point.
std::vector<Selection> selectSettings(std::span<const MetricReport> reports, double qualityFloor);

/// Robustness of each chosen configuration against each attack, for every
/// q in the plan and every n in {1, 2, 4, ...} up to the fleet size (and the
/// fleet size itself). One label matrix per configuration is shared by all
/// n: the first n columns form the n-installation fleet.
std::vector<MetricReport> robustnessExperiment(const ExperimentPlan& plan,
                                               std::span<const Selection> chosen,
                                               const SweepInputs& inputs,
                                               std::size_t workers = 1);

/// Fleet sizes evaluated for a fleet of n: powers of two below n, then n.
std::vector<std::size_t> fleetSizes(std::size_t n);

/// Spearman rank correlation with average ranks for ties; NaN when either
/// side is constant.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace randef
