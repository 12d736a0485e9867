#include "randef/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "randef/errors.hpp"
#include "randef/io.hpp"
#include "randef/parallel.hpp"

namespace randef {

namespace {

constexpr std::string_view kReportMagic = "#RANDEF-METRICS 1";

void requireNonEmpty(const LabeledSet& S, std::string_view what) {
  if (S.empty()) throw UndefinedMetricError(std::string(what) + " of an empty set is undefined");
}

}  // namespace

std::string_view metricName(MetricKind k) noexcept {
  switch (k) {
    case MetricKind::Efficacy:
      return "EFFICACY";
    case MetricKind::Quality:
      return "QUALITY";
    case MetricKind::Robustness:
      return "ROBUSTNESS";
  }
  return "UNKNOWN";
}

MetricKind parseMetric(std::string_view name) {
  for (MetricKind k : {MetricKind::Efficacy, MetricKind::Quality, MetricKind::Robustness}) {
    if (metricName(k) == name) return k;
  }
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

std::size_t matchcount(std::span<const Label> labels, const LabeledSet& S) {
  if (labels.size() != S.size()) throw ContractError("matchcount: length mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += labels[i] == S[i].label ? 1 : 0;
  return hits;
}

std::vector<Label> predictAll(const Network& net, const LabeledSet& S) {
  std::vector<Label> out;
  out.reserve(S.size());
  for (const Example& e : S) out.push_back(classify(net, e.input));
  return out;
}

std::vector<Label> predictAll(Installation& inst, const LabeledSet& S) {
  return inst.classifyAll(S);
}

double accuracyOf(std::span<const Label> labels, const LabeledSet& S) {
  requireNonEmpty(S, "accuracy");
  return static_cast<double>(matchcount(labels, S)) / static_cast<double>(S.size());
}

double efficacy(Installation& inst, const LabeledSet& adversarial) {
  requireNonEmpty(adversarial, "efficacy");
  return accuracyOf(predictAll(inst, adversarial), adversarial);
}

double efficacy(const Network& undefended, const LabeledSet& adversarial) {
  requireNonEmpty(adversarial, "efficacy");
  return accuracyOf(predictAll(undefended, adversarial), adversarial);
}

double quality(Installation& inst, const LabeledSet& benign) {
  requireNonEmpty(benign, "quality");
  return accuracyOf(predictAll(inst, benign), benign);
}

double quality(const Network& undefended, const LabeledSet& benign) {
  requireNonEmpty(benign, "quality");
  return accuracyOf(predictAll(undefended, benign), benign);
}

LabelMatrix buildLabelMatrix(const DefenseConfig& cfg, std::shared_ptr<const Network> base,
                             const LabeledSet& A, std::span<const Seed> seeds,
                             std::size_t workers) {
  std::unordered_set<Seed> distinct(seeds.begin(), seeds.end());
  if (distinct.size() != seeds.size()) throw ContractError("installation seeds must be distinct");
  cfg.validate();
  LabelMatrix matrix;
  matrix.seeds.assign(seeds.begin(), seeds.end());
  matrix.columns.resize(seeds.size());
  parallelFor(seeds.size(), workers, [&](std::size_t v) {
    Installation inst(cfg, base, seeds[v]);
    matrix.columns[v] = predictAll(inst, A);
  });
  return matrix;
}

std::size_t foolingThreshold(double q, std::size_t n) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("q must lie in (0, 1]");
  // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
  const auto t = static_cast<std::size_t>(std::floor(q * static_cast<double>(n) + 1e-9));
  return std::max<std::size_t>(1, t);
}

double robustnessFromMatrix(const LabelMatrix& matrix, const LabeledSet& A, double q,
                            std::size_t n, FoolingRule) {
  requireNonEmpty(A, "robustness");
  if (n == 0 || n > matrix.size()) throw ContractError("robustness: n outside the label matrix");
  const std::size_t threshold = foolingThreshold(q, n);
  std::size_t robustRows = 0;
  for (std::size_t i = 0; i < A.size(); ++i) {
    std::size_t fooled = 0;
    for (std::size_t v = 0; v < n; ++v) {
      if (matrix.columns[v].size() != A.size()) throw ContractError("label matrix column length");
      fooled += matrix.columns[v][i] != A[i].label ? 1 : 0;
    }
    robustRows += fooled >= threshold ? 1 : 0;
  }
  return static_cast<double>(robustRows) / static_cast<double>(A.size());
}

MetricReport robustness(const DefenseConfig& cfg, std::shared_ptr<const Network> base,
                        const LabeledSet& A, double q, std::size_t n,
                        std::span<const Seed> seeds, std::size_t workers) {
  if (seeds.size() != n) throw ContractError("robustness needs exactly n seeds");
  requireNonEmpty(A, "robustness");
  const LabelMatrix matrix = buildLabelMatrix(cfg, std::move(base), A, seeds, workers);
  MetricReport r;
  r.kind = MetricKind::Robustness;
  r.value = robustnessFromMatrix(matrix, A, q, n);
  r.defense = cfg;
  r.n = n;
  r.q = q;
  r.repetitions = n;
  r.seedHash = io::seedListHash(seeds);
  return r;
}

std::size_t defaultRepetitions(const DefenseConfig& cfg) {
  if (cfg.kind != DefenseKind::Rpenn) return 10;
  if (cfg.m == 0) throw DomainError("RPENN ensemble size must be positive");
  return (10 + cfg.m - 1) / cfg.m;
}

std::vector<Seed> seedStream(Seed stream, std::size_t count) {
  std::vector<Seed> seeds(count);
  for (std::size_t r = 0; r < count; ++r) seeds[r] = deriveSeed(stream, "repetition", {r});
  return seeds;
}

MetricReport estimateMetric(MetricKind kind, const DefenseConfig& cfg,
                            std::shared_ptr<const Network> base, const LabeledSet& data,
                            std::span<const Seed> seeds, std::size_t workers) {
  if (kind == MetricKind::Robustness) throw ContractError("estimateMetric covers efficacy and quality");
  if (seeds.empty()) throw ContractError("estimateMetric needs at least one repetition");
  requireNonEmpty(data, metricName(kind));
  const LabelMatrix matrix = buildLabelMatrix(cfg, std::move(base), data, seeds, workers);
  std::size_t hits = 0;
  for (const auto& column : matrix.columns) hits += matchcount(column, data);
  MetricReport r;
  r.kind = kind;
  r.value = static_cast<double>(hits) /
            (static_cast<double>(data.size()) * static_cast<double>(seeds.size()));
  r.defense = cfg;
  r.repetitions = seeds.size();
  r.seedHash = io::seedListHash(seeds);
  return r;
}

std::string_view metricCsvHeader() noexcept {
  return "kind,value,defense,sigma,lambda,m,combine,attack,grid_index,n,q,repetitions,seed_hash";
}

std::string toCsvRow(const MetricReport& r) {
  std::string row;
  row += metricName(r.kind);
  row += ',' + io::formatDouble(r.value);
  row += ',';
  row += defenseName(r.defense.kind);
  row += ',' + io::formatDouble(r.defense.sigma);
  row += ',' + io::formatDouble(r.defense.lambda);
  row += ',' + std::to_string(r.defense.m);
  row += ',';
  row += combineName(r.defense.combine);
  row += ',' + r.attack;
  row += ',' + std::to_string(r.gridIndex);
  row += ',' + std::to_string(r.n);
  row += ',' + io::formatDouble(r.q);
  row += ',' + std::to_string(r.repetitions);
  row += ',' + r.seedHash;
  return row;
}

MetricReport parseCsvRow(std::string_view line) {
  const auto f = io::split(line, ',');
  if (f.size() != 13) throw ParseError("expected 13 fields, got " + std::to_string(f.size()), 0);
  MetricReport r;
  std::uint64_t u = 0;
  auto number = [](std::string_view s) {
    double v = 0.0;
    if (!io::parseDouble(s, v)) throw ParseError("bad number '" + std::string(s) + "'", 0);
    return v;
  };
  auto count = [&u](std::string_view s) {
    if (!io::parseUnsigned(s, u)) throw ParseError("bad count '" + std::string(s) + "'", 0);
    return static_cast<std::size_t>(u);
  };
  try {
    r.kind = parseMetric(f[0]);
    r.defense.kind = parseDefense(f[2]);
    r.defense.combine = parseCombine(f[6]);
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), 0);
  }
  r.value = number(f[1]);
  r.defense.sigma = number(f[3]);
  r.defense.lambda = number(f[4]);
  r.defense.m = count(f[5]);
  r.attack = std::string(f[7]);
  r.gridIndex = count(f[8]);
  r.n = count(f[9]);
  r.q = number(f[10]);
  r.repetitions = count(f[11]);
  r.seedHash = std::string(f[12]);
  return r;
}

std::string writeReports(std::span<const MetricReport> reports) {
  std::string out;
  out += kReportMagic;
  out += '\n';
  out += metricCsvHeader();
  out += '\n';
  for (const MetricReport& r : reports) {
    out += toCsvRow(r);
    out += '\n';
  }
  return out;
}

std::vector<MetricReport> readReports(std::string_view text) {
  std::vector<MetricReport> reports;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineNo = 0;
  auto next = [&] {
    if (!std::getline(in, line)) return false;
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next() || line != kReportMagic) throw ParseError("missing metrics magic header", 1);
  if (!next() || line != metricCsvHeader()) throw ParseError("unexpected metrics CSV header", 2);
  while (next()) {
    if (line.empty()) continue;
    try {
      reports.push_back(parseCsvRow(line));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineNo);
    }
  }
  return reports;
}

}  // namespace randef
