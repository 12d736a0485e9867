#include "randef/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "json.hpp"
#include "randef/errors.hpp"
#include "randef/io.hpp"
#include "randef/parallel.hpp"

namespace randef {

using nlohmann::json;

// ------------------------------------------------------------------- grids

void ParameterGrid::validate() const {
  if (count == 0) throw ConfigError("grid count must be positive");
  if (!std::isfinite(lower) || !std::isfinite(upper)) throw ConfigError("grid bounds must be finite");
  if (count > 1 && !(lower < upper)) throw ConfigError("grid needs lower < upper");
  if (count == 1 && lower > upper) throw ConfigError("grid needs lower <= upper");
  if (spacing == Spacing::Geometric && !(lower > 0.0)) {
    throw ConfigError("geometric grid needs lower > 0");
  }
}

std::vector<double> buildGrid(const ParameterGrid& grid) {
  grid.validate();
  std::vector<double> values(grid.count);
  if (grid.count == 1) {
    values[0] = grid.lower;
    return values;
  }
  const double last = static_cast<double>(grid.count - 1);
  if (grid.spacing == Spacing::Linear) {
    const double step = (grid.upper - grid.lower) / last;
    for (std::size_t k = 0; k < grid.count; ++k) {
      values[k] = grid.lower + static_cast<double>(k) * step;
    }
  } else {
    const double a = std::log10(grid.lower);
    const double b = std::log10(grid.upper);
    for (std::size_t k = 0; k < grid.count; ++k) {
      values[k] = std::pow(10.0, a + (b - a) * static_cast<double>(k) / last);
    }
  }
  values.front() = grid.lower;
  values.back() = grid.upper;
  return values;
}

std::vector<DefenseConfig> DefenseGrid::points() const {
  std::vector<DefenseConfig> out;
  for (double v : buildGrid(noise)) {
    if (kind == DefenseKind::Rpenn) {
      if (ensembleSizes.empty()) throw ConfigError("RPENN grid needs ensemble sizes");
      for (std::size_t m : ensembleSizes) {
        DefenseConfig c = DefenseConfig::rpenn(v, m, combine);
        c.perturbBiases = perturbBiases;
        out.push_back(c);
      }
    } else {
      DefenseConfig c;
      c.kind = kind;
      c.sigma = v;
      c.perturbBiases = perturbBiases;
      out.push_back(c);
    }
  }
  return out;
}

// -------------------------------------------------------------------- plan

namespace {

std::string_view spacingName(Spacing s) { return s == Spacing::Linear ? "LINEAR" : "GEOMETRIC"; }

Spacing parseSpacing(const std::string& s) {
  if (s == "LINEAR") return Spacing::Linear;
  if (s == "GEOMETRIC") return Spacing::Geometric;
  throw ConfigError("unknown spacing '" + s + "'");
}

std::string_view datasetKindName(DatasetKind k) {
  switch (k) {
    case DatasetKind::SyntheticBlobs:
      return "SYNTHETIC_BLOBS";
    case DatasetKind::SyntheticRings:
      return "SYNTHETIC_RINGS";
    case DatasetKind::File:
      return "FILE";
  }
  return "UNKNOWN";
}

DatasetKind parseDatasetKind(const std::string& s) {
  for (DatasetKind k : {DatasetKind::SyntheticBlobs, DatasetKind::SyntheticRings, DatasetKind::File}) {
    if (datasetKindName(k) == s) return k;
  }
  throw ConfigError("unknown dataset kind '" + s + "'");
}

void rejectUnknownKeys(const json& obj, std::initializer_list<std::string_view> known,
                       std::string_view where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <class T>
void readIfPresent(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

void ExperimentPlan::validate() const {
  const DatasetPlan& d = dataset;
  if (d.classCount < 2) throw ConfigError("dataset needs at least two classes");
  if (d.inputDim == 0) throw ConfigError("dataset dimension must be positive");
  if (d.kind != DatasetKind::File && (d.trainCount < d.classCount || d.evalCount < d.classCount)) {
    throw ConfigError("dataset sample counts must be at least the class count");
  }
  if (d.kind == DatasetKind::File && (d.trainPath.empty() || d.evalPath.empty())) {
    throw ConfigError("FILE dataset needs train_path and eval_path");
  }
  if (!(d.bounds.lower < d.bounds.upper)) throw ConfigError("dataset bounds inverted");
  if (!(network.learningRate > 0.0)) throw ConfigError("learning rate must be positive");
  for (std::size_t w : network.hidden) {
    if (w == 0) throw ConfigError("hidden widths must be positive");
  }
  if (attacks.empty()) throw ConfigError("plan lists no attacks");
  std::set<AttackMethod> seen(attacks.begin(), attacks.end());
  if (seen.size() != attacks.size()) throw ConfigError("plan lists an attack twice");
  for (const DefenseGrid& g : defenses) {
    for (const DefenseConfig& c : g.points()) {
      try {
        c.validate();
      } catch (const DomainError& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (repetitions && *repetitions == 0) throw ConfigError("repetitions must be positive");
  if (robustness.fleetSize == 0) throw ConfigError("fleet size must be positive");
  for (double q : robustness.qSet) {
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("robustness levels must lie in (0, 1]");
  }
  for (double f : qualityFloors) {
    if (!(f >= 0.0 && f < 1.0)) throw ConfigError("quality floors must lie in [0, 1)");
  }
}

ExperimentPlan ExperimentPlan::fromJson(std::string_view text) {
  ExperimentPlan plan;
  try {
    const json root = json::parse(text);
    rejectUnknownKeys(root,
                      {"seed", "dataset", "network", "attacks", "defenses", "repetitions",
                       "robustness", "quality_floors"},
                      "plan");
    readIfPresent(root, "seed", plan.seed);
    if (root.contains("dataset")) {
      const json& d = root.at("dataset");
      rejectUnknownKeys(d,
                        {"kind", "classes", "dim", "train", "eval", "spread", "lower", "upper",
                         "train_path", "eval_path"},
                        "dataset");
      if (d.contains("kind")) plan.dataset.kind = parseDatasetKind(d.at("kind").get<std::string>());
      readIfPresent(d, "classes", plan.dataset.classCount);
      readIfPresent(d, "dim", plan.dataset.inputDim);
      readIfPresent(d, "train", plan.dataset.trainCount);
      readIfPresent(d, "eval", plan.dataset.evalCount);
      readIfPresent(d, "spread", plan.dataset.spread);
      readIfPresent(d, "lower", plan.dataset.bounds.lower);
      readIfPresent(d, "upper", plan.dataset.bounds.upper);
      readIfPresent(d, "train_path", plan.dataset.trainPath);
      readIfPresent(d, "eval_path", plan.dataset.evalPath);
    }
    if (root.contains("network")) {
      const json& n = root.at("network");
      rejectUnknownKeys(n, {"hidden", "epochs", "learning_rate"}, "network");
      readIfPresent(n, "hidden", plan.network.hidden);
      readIfPresent(n, "epochs", plan.network.epochs);
      readIfPresent(n, "learning_rate", plan.network.learningRate);
    }
    if (root.contains("attacks")) {
      plan.attacks.clear();
      for (const auto& name : root.at("attacks")) {
        plan.attacks.push_back(parseMethod(name.get<std::string>()));
      }
    }
    if (root.contains("defenses")) {
      for (const json& g : root.at("defenses")) {
        rejectUnknownKeys(g,
                          {"kind", "spacing", "lower", "upper", "count", "m", "combine",
                           "perturb_biases"},
                          "defense grid");
        DefenseGrid grid;
        grid.kind = parseDefense(g.at("kind").get<std::string>());
        if (g.contains("spacing")) grid.noise.spacing = parseSpacing(g.at("spacing").get<std::string>());
        grid.noise.lower = g.at("lower").get<double>();
        grid.noise.upper = g.at("upper").get<double>();
        grid.noise.count = g.at("count").get<std::size_t>();
        readIfPresent(g, "m", grid.ensembleSizes);
        if (g.contains("combine")) grid.combine = parseCombine(g.at("combine").get<std::string>());
        readIfPresent(g, "perturb_biases", grid.perturbBiases);
        if (grid.kind != DefenseKind::Rpenn && !grid.ensembleSizes.empty()) {
          throw ConfigError("only RPENN grids take ensemble sizes");
        }
        plan.defenses.push_back(std::move(grid));
      }
    }
    if (root.contains("repetitions") && !root.at("repetitions").is_null()) {
      plan.repetitions = root.at("repetitions").get<std::size_t>();
    }
    if (root.contains("robustness")) {
      const json& r = root.at("robustness");
      rejectUnknownKeys(r, {"q", "n"}, "robustness");
      readIfPresent(r, "q", plan.robustness.qSet);
      readIfPresent(r, "n", plan.robustness.fleetSize);
    }
    readIfPresent(root, "quality_floors", plan.qualityFloors);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("plan: ") + e.what());
  }
  plan.validate();
  return plan;
}

std::string ExperimentPlan::toJson() const {
  json root;
  root["seed"] = seed;
  json d;
  d["kind"] = datasetKindName(dataset.kind);
  d["classes"] = dataset.classCount;
  d["dim"] = dataset.inputDim;
  d["train"] = dataset.trainCount;
  d["eval"] = dataset.evalCount;
  d["spread"] = dataset.spread;
  d["lower"] = dataset.bounds.lower;
  d["upper"] = dataset.bounds.upper;
  if (dataset.kind == DatasetKind::File) {
    d["train_path"] = dataset.trainPath;
    d["eval_path"] = dataset.evalPath;
  }
  root["dataset"] = d;
  root["network"] = {{"hidden", network.hidden},
                     {"epochs", network.epochs},
                     {"learning_rate", network.learningRate}};
  json attackNames = json::array();
  for (AttackMethod m : attacks) attackNames.push_back(methodName(m));
  root["attacks"] = attackNames;
  json grids = json::array();
  for (const DefenseGrid& g : defenses) {
    json j;
    j["kind"] = defenseName(g.kind);
    j["spacing"] = spacingName(g.noise.spacing);
    j["lower"] = g.noise.lower;
    j["upper"] = g.noise.upper;
    j["count"] = g.noise.count;
    if (g.kind == DefenseKind::Rpenn) {
      j["m"] = g.ensembleSizes;
      j["combine"] = combineName(g.combine);
    }
    j["perturb_biases"] = g.perturbBiases;
    grids.push_back(j);
  }
  root["defenses"] = grids;
  root["repetitions"] = repetitions ? json(*repetitions) : json(nullptr);
  root["robustness"] = {{"q", robustness.qSet}, {"n", robustness.fleetSize}};
  root["quality_floors"] = qualityFloors;
  return root.dump(2) + "\n";
}

ExperimentPlan loadPlan(const std::string& path) {
  std::string text;
  try {
    text = io::readFile(path);
  } catch (const DependencyError& e) {
    throw ConfigError(std::string("cannot read plan: ") + e.what());
  }
  return ExperimentPlan::fromJson(text);
}

// ------------------------------------------------------------------ stages

namespace {

DatasetSpec specFor(const ExperimentPlan& plan, std::size_t count, std::string_view stream) {
  DatasetSpec spec;
  spec.kind = plan.dataset.kind;
  spec.classCount = plan.dataset.classCount;
  spec.inputDim = plan.dataset.inputDim;
  spec.sampleCount = count;
  spec.seed = deriveSeed(plan.seed, stream);
  spec.layoutSeed = deriveSeed(plan.seed, "layout");
  spec.bounds = plan.dataset.bounds;
  spec.spread = plan.dataset.spread;
  return spec;
}

LabeledSet loadPlanFile(const ExperimentPlan& plan, const std::string& path) {
  LabeledSet data = loadFile(path);
  for (const Example& e : data) {
    if (e.input.size() != plan.dataset.inputDim) throw ShapeError(path + ": dimension differs from plan");
    if (e.label >= plan.dataset.classCount) throw DomainError(path + ": label outside plan classes");
  }
  return data;
}

}  // namespace

LabeledSet trainingSet(const ExperimentPlan& plan) {
  if (plan.dataset.kind == DatasetKind::File) return loadPlanFile(plan, plan.dataset.trainPath);
  return generate(specFor(plan, plan.dataset.trainCount, "dataset-train"));
}

LabeledSet evaluationSet(const ExperimentPlan& plan) {
  if (plan.dataset.kind == DatasetKind::File) return loadPlanFile(plan, plan.dataset.evalPath);
  return generate(specFor(plan, plan.dataset.evalCount, "dataset-eval"));
}

TrainResult trainBase(const ExperimentPlan& plan, const LabeledSet& train) {
  TrainConfig cfg;
  cfg.learningRate = plan.network.learningRate;
  cfg.epochs = plan.network.epochs;
  cfg.seed = deriveSeed(plan.seed, "train");
  return trainClassifier(train, plan.network.hidden, cfg);
}

LabeledSet curateDataset(const Network& net, const LabeledSet& raw, CurationStats* stats) {
  if (raw.empty()) throw ContractError("nothing to curate");
  LabeledSet kept;
  for (const Example& e : raw) {
    if (classify(net, e.input) == e.label) kept.push_back(e);
  }
  if (stats) *stats = {kept.size(), raw.size() - kept.size()};
  if (kept.empty()) throw CurationError("curation discarded every input");
  return kept;
}

AttackConfig attackConfigFor(const ExperimentPlan& plan, AttackMethod method) {
  return AttackConfig::defaults(method, plan.dataset.bounds, plan.dataset.inputDim);
}

std::vector<AdversarialSet> generateAdversarialSets(const Network& net, const LabeledSet& benign,
                                                    const ExperimentPlan& plan,
                                                    std::size_t workers) {
  std::vector<AdversarialSet> sets;
  for (AttackMethod m : plan.attacks) {
    sets.push_back(generateAdversarialSet(net, benign, attackConfigFor(plan, m), workers));
  }
  return sets;
}

std::vector<Seed> sweepSeeds(Seed master, const DefenseConfig& cfg, std::size_t gridIndex,
                             std::size_t repetitions) {
  const Seed stream = deriveSeed(master, "sweep",
                                 {tagHash(defenseName(cfg.kind)),
                                  static_cast<std::uint64_t>(cfg.combine), gridIndex});
  return seedStream(stream, repetitions);
}

std::vector<Seed> robustnessSeeds(Seed master, const DefenseConfig& cfg, std::size_t n) {
  const Seed stream = deriveSeed(
      master, "robustness",
      {tagHash(defenseName(cfg.kind)), static_cast<std::uint64_t>(cfg.combine),
       std::bit_cast<std::uint64_t>(cfg.noise()), cfg.m, cfg.perturbBiases ? 1u : 0u});
  std::vector<Seed> seeds(n);
  for (std::size_t v = 0; v < n; ++v) seeds[v] = deriveSeed(stream, "installation", {v});
  return seeds;
}

// ------------------------------------------------------------------- sweep

namespace {

struct PreparedSets {
  std::vector<LabeledSet> adversarial;          // per attack
  std::vector<std::vector<std::size_t>> twins;  // per attack: benign indices
  std::vector<std::string> names;
};

PreparedSets prepare(const SweepInputs& inputs) {
  if (!inputs.base) throw DependencyError("sweep needs a base network");
  if (inputs.benign.empty()) throw DependencyError("sweep needs a benign set");
  PreparedSets p;
  for (const AdversarialSet& set : inputs.adversarial) {
    const std::string name(methodName(set.method));
    LabeledSet examples = set.examples();
    if (examples.empty()) throw DependencyError("adversarial set " + name + " has no successes");
    std::vector<std::size_t> twins;
    for (const VectorRecord& r : set.file.records) {
      if (!r.success) continue;
      if (r.id >= inputs.benign.size() || inputs.benign[r.id].label != r.label) {
        throw DependencyError("adversarial set " + name + " does not match the benign set");
      }
      twins.push_back(r.id);
    }
    p.adversarial.push_back(std::move(examples));
    p.twins.push_back(std::move(twins));
    p.names.push_back(name);
  }
  if (p.adversarial.empty()) throw DependencyError("sweep needs at least one adversarial set");
  return p;
}

// The sets must cover the plan's attacks, in plan order.
void requireAttacks(const ExperimentPlan& plan, const SweepInputs& inputs) {
  for (std::size_t a = 0; a < plan.attacks.size(); ++a) {
    if (a >= inputs.adversarial.size() || inputs.adversarial[a].method != plan.attacks[a]) {
      throw DependencyError("missing adversarial set for " + std::string(methodName(plan.attacks[a])));
    }
  }
  if (inputs.adversarial.size() != plan.attacks.size()) {
    throw DependencyError("adversarial sets do not match the planned attacks");
  }
}

// Hit counts of one installation: efficacy and twin-quality per attack.
struct Hits {
  std::vector<std::size_t> efficacy;
  std::vector<std::size_t> quality;
};

Hits measureInstallation(const DefenseConfig& cfg, Seed seed, const SweepInputs& inputs,
                         const PreparedSets& p) {
  Installation inst(cfg, inputs.base, seed);
  const std::vector<Label> benignLabels = predictAll(inst, inputs.benign);
  Hits h;
  for (std::size_t a = 0; a < p.adversarial.size(); ++a) {
    std::size_t q = 0;
    for (std::size_t id : p.twins[a]) q += benignLabels[id] == inputs.benign[id].label ? 1 : 0;
    h.quality.push_back(q);
    h.efficacy.push_back(matchcount(predictAll(inst, p.adversarial[a]), p.adversarial[a]));
  }
  return h;
}

void appendReports(std::vector<MetricReport>& out, const DefenseConfig& cfg, std::size_t gridIndex,
                   std::span<const Seed> seeds, std::span<const Hits> hits,
                   const PreparedSets& p) {
  const std::string seedHash = io::seedListHash(seeds);
  for (std::size_t a = 0; a < p.adversarial.size(); ++a) {
    std::size_t e = 0, q = 0;
    for (const Hits& h : hits) {
      e += h.efficacy[a];
      q += h.quality[a];
    }
    const double reps = static_cast<double>(seeds.size());
    const double size = static_cast<double>(p.adversarial[a].size());
    MetricReport r;
    r.defense = cfg;
    r.attack = p.names[a];
    r.gridIndex = gridIndex;
    r.repetitions = seeds.size();
    r.seedHash = seedHash;
    r.kind = MetricKind::Efficacy;
    r.value = static_cast<double>(e) / (size * reps);
    out.push_back(r);
    r.kind = MetricKind::Quality;
    r.value = static_cast<double>(q) / (size * reps);
    out.push_back(r);
  }
}

}  // namespace

std::vector<MetricReport> sweep(const ExperimentPlan& plan, const SweepInputs& inputs,
                                std::size_t workers) {
  requireAttacks(plan, inputs);
  const PreparedSets p = prepare(inputs);

  struct Point {
    DefenseConfig cfg;
    std::size_t gridIndex;
    std::vector<Seed> seeds;
    std::size_t firstTask;
  };
  std::vector<Point> points;
  std::size_t tasks = 0;
  for (const DefenseGrid& grid : plan.defenses) {
    const std::vector<DefenseConfig> configs = grid.points();
    for (std::size_t g = 0; g < configs.size(); ++g) {
      const std::size_t reps = plan.repetitions.value_or(defaultRepetitions(configs[g]));
      points.push_back({configs[g], g, sweepSeeds(plan.seed, configs[g], g, reps), tasks});
      tasks += reps;
    }
  }

  std::vector<Hits> hits(tasks);
  std::vector<std::pair<std::size_t, std::size_t>> index;  // task -> (point, rep)
  index.reserve(tasks);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t r = 0; r < points[i].seeds.size(); ++r) index.emplace_back(i, r);
  }
  parallelFor(tasks, workers, [&](std::size_t t) {
    const auto [i, r] = index[t];
    hits[t] = measureInstallation(points[i].cfg, points[i].seeds[r], inputs, p);
  });

  std::vector<MetricReport> reports;
  for (const Point& pt : points) {
    appendReports(reports, pt.cfg, pt.gridIndex, pt.seeds,
                  std::span<const Hits>(hits).subspan(pt.firstTask, pt.seeds.size()), p);
  }
  return reports;
}

std::vector<MetricReport> measureConfig(const DefenseConfig& cfg, std::size_t gridIndex,
                                        std::span<const Seed> seeds, const SweepInputs& inputs,
                                        std::size_t workers) {
  if (seeds.empty()) throw ContractError("measureConfig needs at least one seed");
  const PreparedSets p = prepare(inputs);
  std::vector<Hits> hits(seeds.size());
  parallelFor(seeds.size(), workers,
              [&](std::size_t r) { hits[r] = measureInstallation(cfg, seeds[r], inputs, p); });
  std::vector<MetricReport> reports;
  appendReports(reports, cfg, gridIndex, seeds, hits, p);
  return reports;
}

// --------------------------------------------------------------- selection

std::string selectionGroup(const DefenseConfig& cfg) {
  std::string group(defenseName(cfg.kind));
  if (cfg.kind == DefenseKind::Rpenn) {
    if (cfg.m == 1) group += "_M1";
    if (cfg.combine == Combine::Average) group += "_AVERAGE";
  }
  return group;
}

std::vector<Selection> selectSettings(std::span<const MetricReport> reports, double qualityFloor) {
  struct Cell {
    DefenseConfig cfg;
    std::size_t gridIndex = 0;
    double worstQ = std::numeric_limits<double>::infinity();
    double worstE = std::numeric_limits<double>::infinity();
    std::set<std::string> qAttacks, eAttacks;
  };
  // (group, grid index) -> cell; groups in first-seen order.
  std::map<std::pair<std::string, std::size_t>, Cell> cells;
  std::vector<std::string> groups;
  for (const MetricReport& r : reports) {
    if (r.kind == MetricKind::Robustness) continue;
    const std::string group = selectionGroup(r.defense);
    if (std::find(groups.begin(), groups.end(), group) == groups.end()) groups.push_back(group);
    auto [it, fresh] = cells.try_emplace({group, r.gridIndex});
    Cell& c = it->second;
    if (fresh) {
      c.cfg = r.defense;
      c.gridIndex = r.gridIndex;
    } else if (!(c.cfg == r.defense)) {
      throw ContractError("reports disagree on the configuration of grid point " +
                          std::to_string(r.gridIndex) + " in " + group);
    }
    if (r.kind == MetricKind::Quality) {
      c.worstQ = std::min(c.worstQ, r.value);
      c.qAttacks.insert(r.attack);
    } else {
      c.worstE = std::min(c.worstE, r.value);
      c.eAttacks.insert(r.attack);
    }
  }

  std::vector<Selection> out;
  for (const std::string& group : groups) {
    const Cell* best = nullptr;
    for (const auto& [key, c] : cells) {
      if (key.first != group) continue;
      if (c.qAttacks.empty() || c.qAttacks != c.eAttacks) {
        throw ContractError("grid point " + std::to_string(c.gridIndex) + " in " + group +
                            " lacks efficacy or quality reports");
      }
      if (!(c.worstQ > qualityFloor)) continue;
      if (!best || c.worstE > best->worstE ||
          (c.worstE == best->worstE &&
           (c.cfg.noise() < best->cfg.noise() ||
            (c.cfg.noise() == best->cfg.noise() && c.cfg.m < best->cfg.m)))) {
        best = &c;
      }
    }
    if (!best) {
      throw SelectionError("no " + group + " setting keeps worst-case quality above " +
                           io::formatDouble(qualityFloor));
    }
    out.push_back({group, best->cfg, best->gridIndex, qualityFloor, best->worstQ, best->worstE});
  }
  return out;
}

// -------------------------------------------------------------- robustness

std::vector<std::size_t> fleetSizes(std::size_t n) {
  std::vector<std::size_t> sizes;
  for (std::size_t k = 1; k < n; k *= 2) sizes.push_back(k);
  sizes.push_back(n);
  return sizes;
}

std::vector<MetricReport> robustnessExperiment(const ExperimentPlan& plan,
                                               std::span<const Selection> chosen,
                                               const SweepInputs& inputs, std::size_t workers) {
  requireAttacks(plan, inputs);
  const PreparedSets p = prepare(inputs);
  const std::size_t n = plan.robustness.fleetSize;
  if (n == 0) throw ContractError("fleet size must be positive");

  // All adversarial sets are labelled by the same fleet in one pass.
  LabeledSet all;
  std::vector<std::size_t> offsets{0};
  for (const LabeledSet& A : p.adversarial) {
    all.insert(all.end(), A.begin(), A.end());
    offsets.push_back(all.size());
  }

  std::vector<MetricReport> reports;
  for (const Selection& s : chosen) {
    const std::vector<Seed> seeds = robustnessSeeds(plan.seed, s.config, n);
    const LabelMatrix full = buildLabelMatrix(s.config, inputs.base, all, seeds, workers);
    for (std::size_t a = 0; a < p.adversarial.size(); ++a) {
      LabelMatrix slice;
      slice.seeds = full.seeds;
      for (const auto& column : full.columns) {
        slice.columns.emplace_back(column.begin() + static_cast<std::ptrdiff_t>(offsets[a]),
                                   column.begin() + static_cast<std::ptrdiff_t>(offsets[a + 1]));
      }
      for (double q : plan.robustness.qSet) {
        for (std::size_t k : fleetSizes(n)) {
          MetricReport r;
          r.kind = MetricKind::Robustness;
          r.value = robustnessFromMatrix(slice, p.adversarial[a], q, k);
          r.defense = s.config;
          r.attack = p.names[a];
          r.gridIndex = s.gridIndex;
          r.n = k;
          r.q = q;
          r.repetitions = k;
          r.seedHash = io::seedListHash(std::span<const Seed>(seeds).first(k));
          reports.push_back(r);
        }
      }
    }
  }
  return reports;
}

// -------------------------------------------------------------- statistics

namespace {

std::vector<double> averageRanks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("spearman: length mismatch");
  if (a.size() < 2) throw ContractError("spearman needs at least two points");
  const std::vector<double> ra = averageRanks(a);
  const std::vector<double> rb = averageRanks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

}  // namespace randef
