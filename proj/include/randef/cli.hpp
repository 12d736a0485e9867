#pragma once
// Command-line pipeline. Every stage reads its inputs from the output
// directory, verifies them against the manifest of the stage that wrote
// them, and writes its own artifacts plus <stage>.manifest.json.

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "randef/harness.hpp"

namespace randef::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDependencyError = 3,
  kContractError = 4,
  kRuntimeError = 5,
};

struct RunManifest {
  std::string command;
  std::string configHash;
  Seed masterSeed = 0;
  std::map<std::string, std::string> inputs;   // file name -> sha256
  std::map<std::string, std::string> outputs;  // file name -> sha256
  double seconds = 0.0;

  std::string toJson() const;
  static RunManifest fromJson(const std::string& text);
};

struct StageContext {
  ExperimentPlan plan;
  std::string configHash;
  std::string outDir;
  std::size_t workers = 1;
  std::ostream* log = nullptr;
};

// Artifact names inside the output directory.
inline constexpr const char* kTrainFile = "train.vec";
inline constexpr const char* kEvalFile = "eval.vec";
inline constexpr const char* kNetworkFile = "base.net";
inline constexpr const char* kCuratedFile = "curated.vec";
inline constexpr const char* kSweepFile = "sweep.csv";
inline constexpr const char* kTableFile = "settings.csv";
inline constexpr const char* kHeatmapFile = "grid.csv";
inline constexpr const char* kCurvesFile = "robustness_curves.csv";
std::string adversarialFile(AttackMethod m);
std::string robustnessFile(double floor);

// One function per stage; each writes its manifest. All throw randef errors.
void stageDataset(const StageContext& ctx);
/// Returns the training accuracy of the saved network.
double stageTrain(const StageContext& ctx);
void stageCurate(const StageContext& ctx);
void stageAttack(const StageContext& ctx);
void stageSweep(const StageContext& ctx);
void stageRobustness(const StageContext& ctx);
void stageReport(const StageContext& ctx);
void stageRun(const StageContext& ctx);

/// Maps an exception to its exit code.
int exitCodeFor(const std::exception& e) noexcept;

/// Entry point of the `randef` tool; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace randef::cli
