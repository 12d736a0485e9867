#pragma once
// Efficacy, quality and robustness of a defense. Efficacy and quality are
// accuracies: on adversarial inputs (labelled with their benign ground truth)
// and on the curated benign set respectively. Robustness counts adversarial
// inputs that fool at least a q-fraction of n independent installations.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "randef/defenses.hpp"
#include "randef/nncore.hpp"
#include "randef/rng.hpp"
#include "randef/types.hpp"

namespace randef {

enum class MetricKind { Efficacy, Quality, Robustness };

std::string_view metricName(MetricKind k) noexcept;
MetricKind parseMetric(std::string_view name);

/// When an installation counts as fooled. Attacks here are untargeted, so
/// only "label differs from ground truth" is provided.
enum class FoolingRule { Untargeted };

/// Positions where labels[i] equals the ground truth of S[i].
std::size_t matchcount(std::span<const Label> labels, const LabeledSet& S);

std::vector<Label> predictAll(const Network& net, const LabeledSet& S);
/// Queries in order of S, advancing the installation's noise stream.
std::vector<Label> predictAll(Installation& inst, const LabeledSet& S);

/// matchcount / |S|; UndefinedMetricError when S is empty.
double accuracyOf(std::span<const Label> labels, const LabeledSet& S);

double efficacy(Installation& inst, const LabeledSet& adversarial);
double efficacy(const Network& undefended, const LabeledSet& adversarial);
double quality(Installation& inst, const LabeledSet& benign);
double quality(const Network& undefended, const LabeledSet& benign);

/// Column v holds the labels installation v (seed seeds[v]) assigns to A.
struct LabelMatrix {
  std::vector<std::vector<Label>> columns;
  std::vector<Seed> seeds;

  std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t size() const noexcept { return columns.size(); }
};

/// ContractError on duplicate seeds. Columns are filled in parallel; the
/// result does not depend on `workers`.
LabelMatrix buildLabelMatrix(const DefenseConfig& cfg, std::shared_ptr<const Network> base,
                             const LabeledSet& A, std::span<const Seed> seeds,
                             std::size_t workers = 1);

/// max(1, floor(q * n)): a zero threshold would make every row count.
std::size_t foolingThreshold(double q, std::size_t n);

/// Robustness over the first n columns of `matrix`.
double robustnessFromMatrix(const LabelMatrix& matrix, const LabeledSet& A, double q,
                            std::size_t n, FoolingRule rule = FoolingRule::Untargeted);

struct MetricReport {
  MetricKind kind = MetricKind::Quality;
  double value = 0.0;
  DefenseConfig defense;
  std::string attack;  // empty for none
  std::size_t gridIndex = 0;
  std::size_t n = 0;   // robustness only
  double q = 0.0;      // robustness only
  std::size_t repetitions = 0;
  std::string seedHash;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

MetricReport robustness(const DefenseConfig& cfg, std::shared_ptr<const Network> base,
                        const LabeledSet& A, double q, std::size_t n,
                        std::span<const Seed> seeds, std::size_t workers = 1);

/// 10 for L1/L*/L+, ceil(10/m) for RPENN.
std::size_t defaultRepetitions(const DefenseConfig& cfg);

/// `count` seeds drawn from `stream` along distinct derivation paths.
std::vector<Seed> seedStream(Seed stream, std::size_t count);

/// Mean of one efficacy or quality evaluation per seed. The mean is taken
/// over pooled match counts, so it is independent of seed order.
MetricReport estimateMetric(MetricKind kind, const DefenseConfig& cfg,
                            std::shared_ptr<const Network> base, const LabeledSet& data,
                            std::span<const Seed> seeds, std::size_t workers = 1);

// CSV: kind,value,defense,sigma,lambda,m,combine,attack,grid_index,n,q,repetitions,seed_hash
std::string_view metricCsvHeader() noexcept;
std::string toCsvRow(const MetricReport& r);
MetricReport parseCsvRow(std::string_view line);
std::string writeReports(std::span<const MetricReport> reports);
/// ParseError with the line number on a malformed row or header.
std::vector<MetricReport> readReports(std::string_view text);

}  // namespace randef
