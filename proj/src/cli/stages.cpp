#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "randef/cli.hpp"
#include "randef/errors.hpp"
#include "randef/io.hpp"

namespace randef::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string RunManifest::toJson() const {
  json j;
  j["format"] = "RANDEF-MANIFEST";
  j["version"] = 1;
  j["command"] = command;
  j["config_sha256"] = configHash;
  j["master_seed"] = masterSeed;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["seconds"] = seconds;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::fromJson(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "RANDEF-MANIFEST" || j.at("version") != 1) {
      throw DependencyError("not a version-1 run manifest");
    }
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.configHash = j.at("config_sha256").get<std::string>();
    m.masterSeed = j.at("master_seed").get<Seed>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.seconds = j.at("seconds").get<double>();
    return m;
  } catch (const json::exception& e) {
    throw DependencyError(std::string("malformed manifest: ") + e.what());
  }
}

std::string adversarialFile(AttackMethod m) {
  return "adv_" + std::string(methodName(m)) + ".vec";
}

std::string robustnessFile(double floor) {
  return "robustness_" + io::formatDouble(floor) + ".csv";
}

namespace {

using Clock = std::chrono::steady_clock;

std::string pathOf(const StageContext& ctx, const std::string& name) {
  return (fs::path(ctx.outDir) / name).string();
}

std::ostream& log(const StageContext& ctx, std::string_view stage) {
  static std::ofstream devnull;
  std::ostream& os = ctx.log ? *ctx.log : devnull;
  return os << "[" << stage << "] ";
}

/// Tracks one stage: verified inputs, hashed outputs, elapsed time.
class Stage {
 public:
  Stage(const StageContext& ctx, std::string name)
      : ctx_(ctx), start_(Clock::now()) {
    manifest_.command = std::move(name);
    manifest_.configHash = ctx.configHash;
    manifest_.masterSeed = ctx.plan.seed;
    fs::create_directories(ctx.outDir);
  }

  /// Path of `file`, after checking it against the manifest of `producer`.
  std::string input(const std::string& file, const std::string& producer) {
    const std::string manifestPath = pathOf(ctx_, producer + ".manifest.json");
    if (!fs::exists(manifestPath)) {
      throw DependencyError(file + ": no manifest from stage '" + producer + "' (run it first)");
    }
    const RunManifest upstream = RunManifest::fromJson(io::readFile(manifestPath));
    const auto recorded = upstream.outputs.find(file);
    if (recorded == upstream.outputs.end()) {
      throw DependencyError(file + ": not listed by stage '" + producer + "'");
    }
    const std::string path = pathOf(ctx_, file);
    if (!fs::exists(path)) throw DependencyError(file + ": missing (expected sha256 " + recorded->second + ")");
    const std::string actual = io::sha256File(path);
    if (actual != recorded->second) {
      throw DependencyError(file + ": sha256 " + actual + " does not match " + recorded->second +
                            " recorded by stage '" + producer + "'");
    }
    if (upstream.masterSeed != ctx_.plan.seed) {
      throw DependencyError(file + ": produced with master seed " +
                            std::to_string(upstream.masterSeed) + ", current seed is " +
                            std::to_string(ctx_.plan.seed));
    }
    manifest_.inputs[file] = actual;
    return path;
  }

  void output(const std::string& file, std::string_view contents) {
    io::writeFile(pathOf(ctx_, file), contents);
    manifest_.outputs[file] = io::sha256Hex(contents);
  }

  void finish() {
    manifest_.seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    io::writeFile(pathOf(ctx_, manifest_.command + ".manifest.json"), manifest_.toJson());
    log(ctx_, manifest_.command) << "done in " << manifest_.seconds << " s\n";
  }

 private:
  const StageContext& ctx_;
  Clock::time_point start_;
  RunManifest manifest_;
};

std::string vectorFileText(const VectorFile& file) {
  std::ostringstream out;
  writeVectorFile(out, file);
  return out.str();
}

std::shared_ptr<const Network> loadBase(Stage& stage) {
  return std::make_shared<const Network>(loadNetwork(stage.input(kNetworkFile, "train")));
}

SweepInputs loadSweepInputs(const StageContext& ctx, Stage& stage) {
  SweepInputs in;
  in.base = loadBase(stage);
  in.benign = loadFile(stage.input(kCuratedFile, "curate"));
  for (AttackMethod m : ctx.plan.attacks) {
    in.adversarial.push_back(
        adversarialSetFromFile(loadVectorFile(stage.input(adversarialFile(m), "attack"))));
    if (in.adversarial.back().method != m) {
      throw DependencyError(adversarialFile(m) + ": holds a different attack");
    }
  }
  return in;
}

std::vector<MetricReport> loadReports(const std::string& path) {
  try {
    return readReports(io::readFile(path));
  } catch (const ParseError& e) {
    throw DependencyError(path + ": " + e.what());
  }
}

}  // namespace

void stageDataset(const StageContext& ctx) {
  Stage stage(ctx, "dataset");
  const LabeledSet train = trainingSet(ctx.plan);
  const LabeledSet eval = evaluationSet(ctx.plan);
  stage.output(kTrainFile, vectorFileText(benignFile(train)));
  stage.output(kEvalFile, vectorFileText(benignFile(eval)));
  log(ctx, "dataset") << train.size() << " training, " << eval.size() << " evaluation samples\n";
  stage.finish();
}

double stageTrain(const StageContext& ctx) {
  Stage stage(ctx, "train");
  const LabeledSet train = loadFile(stage.input(kTrainFile, "dataset"));
  const TrainResult result = trainBase(ctx.plan, train);
  std::ostringstream bytes;
  writeNetwork(bytes, result.network);
  stage.output(kNetworkFile, bytes.str());
  // Re-score the saved artifact rather than trusting the training loop.
  const double acc = accuracy(loadNetwork(pathOf(ctx, kNetworkFile)), train);
  log(ctx, "train") << "training accuracy " << io::formatDouble(acc) << "\n";
  stage.finish();
  return acc;
}

void stageCurate(const StageContext& ctx) {
  Stage stage(ctx, "curate");
  const auto base = loadBase(stage);
  const LabeledSet raw = loadFile(stage.input(kEvalFile, "dataset"));
  CurationStats stats;
  const LabeledSet curated = curateDataset(*base, raw, &stats);
  stage.output(kCuratedFile, vectorFileText(benignFile(curated)));
  log(ctx, "curate") << "retained " << stats.retained << ", discarded " << stats.discarded << "\n";
  stage.finish();
}

void stageAttack(const StageContext& ctx) {
  Stage stage(ctx, "attack");
  const auto base = loadBase(stage);
  const LabeledSet benign = loadFile(stage.input(kCuratedFile, "curate"));
  for (AttackMethod m : ctx.plan.attacks) {
    const auto t0 = Clock::now();
    const AdversarialSet set =
        generateAdversarialSet(*base, benign, attackConfigFor(ctx.plan, m), ctx.workers);
    stage.output(adversarialFile(m), vectorFileText(set.file));
    log(ctx, "attack") << methodName(m) << ": " << set.succeeded() << "/" << set.attempted()
                       << " succeeded in "
                       << std::chrono::duration<double>(Clock::now() - t0).count() << " s\n";
  }
  stage.finish();
}

void stageSweep(const StageContext& ctx) {
  Stage stage(ctx, "sweep");
  const SweepInputs in = loadSweepInputs(ctx, stage);
  const std::vector<MetricReport> reports = sweep(ctx.plan, in, ctx.workers);
  stage.output(kSweepFile, writeReports(reports));
  log(ctx, "sweep") << reports.size() << " reports\n";
  stage.finish();
}

void stageRobustness(const StageContext& ctx) {
  Stage stage(ctx, "robustness");
  const SweepInputs in = loadSweepInputs(ctx, stage);
  const std::vector<MetricReport> swept = loadReports(stage.input(kSweepFile, "sweep"));
  // Selections under different floors often coincide; measure each config once.
  std::vector<std::pair<DefenseConfig, std::vector<MetricReport>>> cache;
  for (double floor : ctx.plan.qualityFloors) {
    std::vector<MetricReport> reports;
    for (const Selection& s : selectSettings(swept, floor)) {
      auto hit = std::find_if(cache.begin(), cache.end(),
                              [&](const auto& entry) { return entry.first == s.config; });
      if (hit == cache.end()) {
        cache.emplace_back(s.config, robustnessExperiment(ctx.plan, std::span(&s, 1), in, ctx.workers));
        hit = std::prev(cache.end());
      }
      reports.insert(reports.end(), hit->second.begin(), hit->second.end());
    }
    stage.output(robustnessFile(floor), writeReports(reports));
    log(ctx, "robustness") << "floor " << io::formatDouble(floor) << ": " << reports.size()
                           << " reports\n";
  }
  stage.finish();
}

void stageReport(const StageContext& ctx) {
  Stage stage(ctx, "report");
  const std::vector<MetricReport> swept = loadReports(stage.input(kSweepFile, "sweep"));

  std::string table = "#RANDEF-SETTINGS 1\n"
                      "floor,group,defense,sigma,lambda,m,combine,grid_index,worst_quality,"
                      "worst_efficacy\n";
  std::string curves = "#RANDEF-CURVES 1\nfloor,group,defense,sigma,lambda,m,combine,attack,q,n,value\n";
  for (double floor : ctx.plan.qualityFloors) {
    for (const Selection& s : selectSettings(swept, floor)) {
      table += io::formatDouble(floor) + "," + s.group + "," +
               std::string(defenseName(s.config.kind)) + "," + io::formatDouble(s.config.sigma) +
               "," + io::formatDouble(s.config.lambda) + "," + std::to_string(s.config.m) + "," +
               std::string(combineName(s.config.combine)) + "," + std::to_string(s.gridIndex) +
               "," + io::formatDouble(s.worstQuality) + "," + io::formatDouble(s.worstEfficacy) +
               "\n";
    }
    const auto robust = loadReports(stage.input(robustnessFile(floor), "robustness"));
    for (const MetricReport& r : robust) {
      curves += io::formatDouble(floor) + "," + selectionGroup(r.defense) + "," +
                std::string(defenseName(r.defense.kind)) + "," +
                io::formatDouble(r.defense.sigma) + "," + io::formatDouble(r.defense.lambda) +
                "," + std::to_string(r.defense.m) + "," +
                std::string(combineName(r.defense.combine)) + "," + r.attack + "," +
                io::formatDouble(r.q) + "," + std::to_string(r.n) + "," +
                io::formatDouble(r.value) + "\n";
    }
  }

  // Long format: one row per (grid point, attack) with both metrics.
  std::string grid = "#RANDEF-GRID 1\ndefense,combine,grid_index,sigma,lambda,m,attack,efficacy,quality\n";
  for (std::size_t i = 0; i + 1 < swept.size(); i += 2) {
    const MetricReport& e = swept[i];
    const MetricReport& q = swept[i + 1];
    if (e.kind != MetricKind::Efficacy || q.kind != MetricKind::Quality || e.attack != q.attack ||
        e.gridIndex != q.gridIndex) {
      throw DependencyError(std::string(kSweepFile) + ": efficacy/quality rows are not paired");
    }
    grid += std::string(defenseName(e.defense.kind)) + "," +
            std::string(combineName(e.defense.combine)) + "," + std::to_string(e.gridIndex) +
            "," + io::formatDouble(e.defense.sigma) + "," + io::formatDouble(e.defense.lambda) +
            "," + std::to_string(e.defense.m) + "," + e.attack + "," + io::formatDouble(e.value) +
            "," + io::formatDouble(q.value) + "\n";
  }

  stage.output(kTableFile, table);
  stage.output(kHeatmapFile, grid);
  stage.output(kCurvesFile, curves);
  stage.finish();
}

void stageRun(const StageContext& ctx) {
  stageDataset(ctx);
  stageTrain(ctx);
  stageCurate(ctx);
  stageAttack(ctx);
  stageSweep(ctx);
  stageRobustness(ctx);
  stageReport(ctx);
}

}  // namespace randef::cli
