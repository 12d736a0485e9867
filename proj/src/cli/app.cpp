#include <ostream>

#include "CLI11.hpp"
#include "randef/cli.hpp"
#include "randef/errors.hpp"
#include "randef/io.hpp"
#include "randef/parallel.hpp"

namespace randef::cli {

int exitCodeFor(const std::exception& e) noexcept {
  if (dynamic_cast<const ConfigError*>(&e)) return kConfigError;
  if (dynamic_cast<const DependencyError*>(&e) || dynamic_cast<const ParseError*>(&e)) {
    return kDependencyError;
  }
  if (dynamic_cast<const ContractError*>(&e) || dynamic_cast<const ShapeError*>(&e) ||
      dynamic_cast<const DomainError*>(&e)) {
    return kContractError;
  }
  if (dynamic_cast<const Error*>(&e)) return kRuntimeError;
  return kFailure;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomized defenses against adversarial examples: desk-scale evaluation pipeline",
               "randef"};
  app.require_subcommand(1);

  std::string configPath;
  std::optional<Seed> seed;
  std::size_t workers = defaultWorkers();
  std::string outDir = "out";
  app.add_option("--config", configPath, "Experiment plan (JSON)")->required();
  app.add_option("--seed", seed, "Master seed, overrides the plan");
  app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", outDir, "Artifact directory");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"dataset", "Generate training and evaluation sets"},
      {"train", "Train and save the base network"},
      {"curate", "Keep evaluation inputs the base network labels correctly"},
      {"attack", "Generate one adversarial set per attack"},
      {"sweep", "Estimate efficacy and quality over every defense grid"},
      {"robustness", "Select settings per quality floor and measure robustness"},
      {"report", "Write settings table, grid and robustness curves"},
      {"run", "All stages in order"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "randef: " << e.what() << "\n" << app.help();
    return kConfigError;
  }

  try {
    StageContext ctx;
    ctx.plan = loadPlan(configPath);
    if (seed) ctx.plan.seed = *seed;
    ctx.configHash = io::sha256Hex(ctx.plan.toJson());
    ctx.outDir = outDir;
    ctx.workers = workers;
    ctx.log = &err;

    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "dataset") {
      stageDataset(ctx);
    } else if (command == "train") {
      out << "training accuracy " << io::formatDouble(stageTrain(ctx)) << "\n";
    } else if (command == "curate") {
      stageCurate(ctx);
    } else if (command == "attack") {
      stageAttack(ctx);
    } else if (command == "sweep") {
      stageSweep(ctx);
    } else if (command == "robustness") {
      stageRobustness(ctx);
    } else if (command == "report") {
      stageReport(ctx);
    } else {
      stageRun(ctx);
    }
    return kOk;
  } catch (const std::exception& e) {
    err << "randef: " << e.what() << "\n";
    return exitCodeFor(e);
  }
}

}  // namespace randef::cli
