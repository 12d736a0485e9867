#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "randef/attacks.hpp"
#include "randef/errors.hpp"
#include "randef/metrics.hpp"

using namespace randef;

namespace {

LabeledSet withLabels(std::vector<Label> labels) {
  LabeledSet s;
  for (Label l : labels) s.push_back({Vector{0.0}, l});
  return s;
}

std::shared_ptr<const Network> fixtureNet() {
  static const auto net = std::make_shared<const Network>(testing::trainedFixture().net);
  return net;
}

const LabeledSet& fgsmExamples() {
  static const LabeledSet a = [] {
    const auto& f = testing::trainedFixture();
    return generateAdversarialSet(f.net, f.data,
                                  AttackConfig::defaults(AttackMethod::Fgsm, Box{}, f.net.inputDim()))
        .examples();
  }();
  return a;
}

std::vector<Seed> seedsFrom(Seed first, std::size_t n) {
  std::vector<Seed> s(n);
  for (std::size_t k = 0; k < n; ++k) s[k] = first + k;
  return s;
}

}  // namespace

TEST_CASE("matchcount examples") {
  const std::vector<Label> labels{1, 2, 3};
  CHECK(matchcount(labels, withLabels({1, 2, 3})) == 3);
  CHECK(matchcount(labels, withLabels({3, 2, 1})) == 1);
  CHECK_THROWS_AS(matchcount(labels, withLabels({1, 2})), ContractError);
  CHECK_THROWS_AS(accuracyOf(std::vector<Label>{}, LabeledSet{}), UndefinedMetricError);
}

TEST_CASE("matchcount agrees with a naive recount") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<Label> label(0, 4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Label> a(1000), b(1000);
    for (auto& v : a) v = label(rng);
    for (auto& v : b) v = label(rng);
    std::size_t naive = 0;
    for (std::size_t k = 0; k < a.size(); ++k) naive += a[k] == b[k] ? 1 : 0;
    CHECK(matchcount(a, withLabels(b)) == naive);
  }
}

TEST_CASE("undefended network: efficacy zero, quality one") {
  auto net = fixtureNet();
  REQUIRE(fgsmExamples().size() > 10);
  CHECK(efficacy(*net, fgsmExamples()) == 0.0);
  CHECK(quality(*net, testing::trainedFixture().data) == 1.0);
  CHECK_THROWS_AS(efficacy(*net, LabeledSet{}), UndefinedMetricError);
  Installation inst = defendLPlus(net, 0.01, 1);
  CHECK_THROWS_AS(quality(inst, LabeledSet{}), UndefinedMetricError);
}

TEST_CASE("an oracle classifier has efficacy one") {
  // Inputs are one-hot in their label, the identity network recovers it.
  auto oracle = std::make_shared<const Network>(
      testing::affineNetwork(3, {1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0}));
  LabeledSet a;
  for (Label l : {0, 2, 1, 1, 0}) {
    Vector x(3, 0.0);
    x[l] = 1.0;
    a.push_back({x, l});
  }
  CHECK(efficacy(*oracle, a) == 1.0);
  Installation inst = defendRpenn(oracle, 0.01, 3, 5);
  CHECK(efficacy(inst, a) == 1.0);
}

TEST_CASE("a lightly defended network recovers some adversarial inputs") {
  const MetricReport r = estimateMetric(MetricKind::Efficacy, DefenseConfig::rpenn(0.3, 7),
                                        fixtureNet(), fgsmExamples(), seedStream(1, 2));
  CHECK(r.value > 0.0);
}

TEST_CASE("single-installation robustness at q = 1 is one minus efficacy") {
  const LabeledSet& a = fgsmExamples();
  for (const DefenseConfig& cfg : {DefenseConfig::l1(0.2), DefenseConfig::lPlus(0.2),
                                   DefenseConfig::rpenn(0.5, 3)}) {
    const std::vector<Seed> seeds{42};
    Installation inst(cfg, fixtureNet(), 42);
    const double e = efficacy(inst, a);
    const MetricReport r = robustness(cfg, fixtureNet(), a, 1.0, 1, seeds);
    CHECK(r.value == doctest::Approx(1.0 - e).epsilon(1e-15));
    CHECK(r.kind == MetricKind::Robustness);
    CHECK(r.n == 1);
  }
}

TEST_CASE("deterministic defenses give robustness constant in n") {
  const LabeledSet& a = fgsmExamples();
  const DefenseConfig cfg = DefenseConfig::lPlus(1e-300);
  const std::vector<Seed> seeds = seedsFrom(100, 16);
  const LabelMatrix m = buildLabelMatrix(cfg, fixtureNet(), a, seeds, 2);
  for (double q : {0.5, 0.8, 1.0}) {
    const double r1 = robustnessFromMatrix(m, a, q, 1);
    for (std::size_t n : {2, 4, 8, 16}) CHECK(robustnessFromMatrix(m, a, q, n) == r1);
    CHECK(r1 == 1.0);
  }
}

TEST_CASE("robustness is non-increasing in q and lies in [0,1]") {
  const LabeledSet& a = fgsmExamples();
  for (const DefenseConfig& cfg : {DefenseConfig::l1(0.3), DefenseConfig::rpenn(0.8, 3)}) {
    const std::vector<Seed> seeds = seedsFrom(7, 32);
    const LabelMatrix m = buildLabelMatrix(cfg, fixtureNet(), a, seeds, 3);
    for (std::size_t n : {1, 5, 32}) {
      double previous = 1.0;
      for (double q : {0.1, 0.5, 0.8, 0.95, 0.99, 1.0}) {
        const double r = robustnessFromMatrix(m, a, q, n);
        CHECK(r >= 0.0);
        CHECK(r <= previous);
        previous = r;
      }
    }
  }
}

TEST_CASE("robustness matches a direct count over the label matrix") {
  const LabeledSet& a = fgsmExamples();
  const std::vector<Seed> seeds = seedsFrom(300, 9);
  const LabelMatrix m = buildLabelMatrix(DefenseConfig::l1(0.4), fixtureNet(), a, seeds);
  for (double q : {0.5, 0.8, 1.0}) {
    const std::size_t threshold = static_cast<std::size_t>(std::floor(q * 9));
    std::size_t rows = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      std::size_t fooled = 0;
      for (const auto& col : m.columns) fooled += col[i] != a[i].label ? 1 : 0;
      rows += fooled >= threshold ? 1 : 0;
    }
    CHECK(robustnessFromMatrix(m, a, q, 9) == static_cast<double>(rows) / a.size());
  }
}

TEST_CASE("fooling threshold never drops to zero") {
  CHECK(foolingThreshold(0.5, 1) == 1);
  CHECK(foolingThreshold(0.99, 128) == 126);
  CHECK(foolingThreshold(1.0, 128) == 128);
  CHECK(foolingThreshold(0.8, 5) == 4);
  CHECK(foolingThreshold(0.95, 20) == 19);
}

TEST_CASE("label matrix rejects duplicate seeds and is independent of workers") {
  const LabeledSet& a = fgsmExamples();
  const std::vector<Seed> dup{1, 2, 1};
  CHECK_THROWS_AS(buildLabelMatrix(DefenseConfig::l1(0.1), fixtureNet(), a, dup), ContractError);
  CHECK_THROWS_AS(robustness(DefenseConfig::l1(0.1), fixtureNet(), a, 0.5, 3, dup), ContractError);
  const std::vector<Seed> seeds = seedsFrom(50, 6);
  const LabelMatrix one = buildLabelMatrix(DefenseConfig::lStar(0.1), fixtureNet(), a, seeds, 1);
  const LabelMatrix four = buildLabelMatrix(DefenseConfig::lStar(0.1), fixtureNet(), a, seeds, 4);
  CHECK(one.columns == four.columns);
  CHECK(one.rows() == a.size());
  CHECK(one.size() == 6);
}

TEST_CASE("repetition counts") {
  CHECK(defaultRepetitions(DefenseConfig::l1(0.1)) == 10);
  CHECK(defaultRepetitions(DefenseConfig::lStar(0.1)) == 10);
  CHECK(defaultRepetitions(DefenseConfig::rpenn(0.1, 1)) == 10);
  CHECK(defaultRepetitions(DefenseConfig::rpenn(0.1, 3)) == 4);
  CHECK(defaultRepetitions(DefenseConfig::rpenn(0.1, 7)) == 2);
  CHECK(defaultRepetitions(DefenseConfig::rpenn(0.1, 63)) == 1);
  CHECK(defaultRepetitions(DefenseConfig::rpenn(0.1, 127)) == 1);
  const auto s = seedStream(9, 10);
  CHECK(std::set<Seed>(s.begin(), s.end()).size() == 10);
}

TEST_CASE("estimates average single evaluations and ignore seed order") {
  const LabeledSet& data = testing::trainedFixture().data;
  const DefenseConfig cfg = DefenseConfig::l1(0.5);
  std::vector<Seed> seeds = seedStream(4, 5);

  double mean = 0.0;
  for (Seed s : seeds) {
    Installation inst(cfg, fixtureNet(), s);
    mean += quality(inst, data) / seeds.size();
  }
  const MetricReport r = estimateMetric(MetricKind::Quality, cfg, fixtureNet(), data, seeds, 3);
  CHECK(r.value == doctest::Approx(mean).epsilon(1e-12));
  CHECK(r.repetitions == 5);

  std::reverse(seeds.begin(), seeds.end());
  CHECK(estimateMetric(MetricKind::Quality, cfg, fixtureNet(), data, seeds).value == r.value);

  const std::vector<Seed> one{seeds.front()};
  Installation inst(cfg, fixtureNet(), one.front());
  CHECK(estimateMetric(MetricKind::Quality, cfg, fixtureNet(), data, one).value ==
        quality(inst, data));
}

TEST_CASE("metric CSV rows round-trip") {
  MetricReport r;
  r.kind = MetricKind::Robustness;
  r.value = 1.0 / 3.0;
  r.defense = DefenseConfig::rpenn(0.11, 63, Combine::Average);
  r.attack = "CW_L2";
  r.gridIndex = 17;
  r.n = 64;
  r.q = 0.95;
  r.repetitions = 1;
  r.seedHash = "abc123";
  CHECK(parseCsvRow(toCsvRow(r)) == r);

  MetricReport e;
  e.kind = MetricKind::Efficacy;
  e.value = 0.1;
  e.defense = DefenseConfig::l1(4.71e-4);
  const std::vector<MetricReport> all{r, e};
  const std::string text = writeReports(all);
  CHECK(readReports(text) == all);
  CHECK(writeReports(readReports(text)) == text);

  CHECK_THROWS_AS(readReports("not a header\n"), ParseError);
  try {
    readReports(text + "QUALITY,x\n");
    FAIL("expected a parse error");
  } catch (const ParseError& err) {
    CHECK(err.line() == 5);
  }
}
