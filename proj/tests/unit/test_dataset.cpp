#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "randef/dataset.hpp"
#include "randef/errors.hpp"
#include "randef/nncore.hpp"

using namespace randef;

namespace {

DatasetSpec blobs(std::size_t classes, std::size_t dim, std::size_t count, double spread, Seed seed) {
  DatasetSpec s;
  s.classCount = classes;
  s.inputDim = dim;
  s.sampleCount = count;
  s.spread = spread;
  s.seed = seed;
  s.layoutSeed = 99;
  return s;
}

std::vector<std::size_t> classCounts(const LabeledSet& data, std::size_t classes) {
  std::vector<std::size_t> counts(classes, 0);
  for (const Example& e : data) ++counts.at(e.label);
  return counts;
}

// Perceptron with bias; returns true once an epoch makes no mistake.
bool perceptronSeparates(const LabeledSet& data, std::size_t maxEpochs) {
  const std::size_t dim = data.front().input.size();
  std::vector<double> w(dim + 1, 0.0);
  for (std::size_t epoch = 0; epoch < maxEpochs; ++epoch) {
    std::size_t mistakes = 0;
    for (const Example& e : data) {
      const double y = e.label == 1 ? 1.0 : -1.0;
      double s = w[dim];
      for (std::size_t c = 0; c < dim; ++c) s += w[c] * e.input[c];
      if (y * s <= 0) {
        ++mistakes;
        for (std::size_t c = 0; c < dim; ++c) w[c] += y * e.input[c];
        w[dim] += y;
      }
    }
    if (mistakes == 0) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("two balanced classes") {
  const LabeledSet d = generate(blobs(2, 4, 100, 0.1, 1));
  CHECK(d.size() == 100);
  CHECK(classCounts(d, 2) == std::vector<std::size_t>{50, 50});
}

TEST_CASE("classes stay balanced within one and inside the box") {
  for (DatasetKind kind : {DatasetKind::SyntheticBlobs, DatasetKind::SyntheticRings}) {
    for (std::size_t classes : {2u, 3u, 7u, 10u}) {
      for (std::size_t count : {classes, classes + 1, std::size_t{101}, std::size_t{257}}) {
        DatasetSpec s = blobs(classes, 5, count, 0.4, count);
        s.kind = kind;
        s.bounds = {-1.0, 2.0};
        const LabeledSet d = generate(s);
        REQUIRE(d.size() == count);
        const auto counts = classCounts(d, classes);
        const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
        CHECK(*hi - *lo <= 1);
        for (const Example& e : d) CHECK(s.bounds.contains(e.input));
      }
    }
  }
}

TEST_CASE("generation is deterministic and the layout is shared") {
  const DatasetSpec s = blobs(3, 6, 60, 0.1, 5);
  CHECK(generate(s) == generate(s));
  DatasetSpec other = s;
  other.seed = 6;
  CHECK(generate(other) != generate(s));
  CHECK(blobMeans(other) == blobMeans(s));
  other.layoutSeed = 100;
  CHECK(blobMeans(other) != blobMeans(s));
}

TEST_CASE("invalid specs are config errors") {
  CHECK_THROWS_AS(generate(blobs(1, 2, 10, 0.1, 0)), ConfigError);
  CHECK_THROWS_AS(generate(blobs(5, 2, 4, 0.1, 0)), ConfigError);
  CHECK_THROWS_AS(generate(blobs(2, 0, 10, 0.1, 0)), ConfigError);
  CHECK_THROWS_AS(generate(blobs(2, 2, 10, -0.1, 0)), ConfigError);
  DatasetSpec inverted = blobs(2, 2, 10, 0.1, 0);
  inverted.bounds = {1.0, 0.0};
  CHECK_THROWS_AS(generate(inverted), ConfigError);
}

TEST_CASE("well separated blobs: nearest mean is perfect and training reaches it") {
  const DatasetSpec s = blobs(4, 8, 400, 0.03, 2);
  const LabeledSet d = generate(s);
  const auto means = blobMeans(s);
  std::size_t correct = 0;
  for (const Example& e : d) {
    Label best = 0;
    double bestDist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < means.size(); ++k) {
      double dist = 0;
      for (std::size_t c = 0; c < e.input.size(); ++c) dist += std::pow(e.input[c] - means[k][c], 2);
      if (dist < bestDist) {
        bestDist = dist;
        best = k;
      }
    }
    correct += best == e.label ? 1 : 0;
  }
  CHECK(correct == d.size());

  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.seed = 8;
  const std::vector<std::size_t> hidden{16};
  CHECK(trainClassifier(d, hidden, cfg).trainingAccuracy >= 0.99);
}

TEST_CASE("linearly separable two-class data is learned") {
  const LabeledSet d = generate(blobs(2, 5, 200, 0.05, 3));
  REQUIRE(perceptronSeparates(d, 1000));
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.seed = 1;
  const std::vector<std::size_t> hidden{16};
  CHECK(trainClassifier(d, hidden, cfg).trainingAccuracy >= 0.99);
}

TEST_CASE("vector files round-trip bit-exactly") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1e3);
  VectorFile f;
  f.dim = 3;
  for (std::size_t k = 0; k < 20; ++k) {
    VectorRecord r;
    r.id = k;
    r.method = k % 2 ? "benign" : "CW_L2";
    r.success = k % 5 != 0;
    r.label = k % 4;
    r.l2 = std::abs(n(rng));
    r.linf = 1.0 / 3.0;
    if (r.success) r.payload = {n(rng), 5e-324, -0.1};
    f.records.push_back(r);
  }
  std::stringstream buf;
  writeVectorFile(buf, f);
  const std::string bytes = buf.str();
  CHECK(readVectorFile(buf) == f);

  std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(readVectorFile(truncated), ParseError);
  std::istringstream headerOnly(bytes.substr(0, bytes.find('\n') + 1));
  try {
    readVectorFile(headerOnly);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::string badPayload = bytes;
  badPayload.replace(badPayload.rfind("-0.1"), 4, "abc");
  std::istringstream bad(badPayload);
  CHECK_THROWS_AS(readVectorFile(bad), ParseError);
  CHECK_THROWS_AS(loadFile("/nonexistent/train.vec"), DependencyError);
}

TEST_CASE("benign files and file-backed datasets") {
  const LabeledSet d = generate(blobs(3, 4, 30, 0.1, 7));
  const VectorFile f = benignFile(d);
  CHECK(f.dim == 4);
  CHECK(toLabeledSet(f) == d);

  const auto path = std::filesystem::temp_directory_path() / "randef_dataset_test.vec";
  saveVectorFile(path.string(), f);
  DatasetSpec s;
  s.kind = DatasetKind::File;
  s.path = path.string();
  CHECK(generate(s) == d);
  CHECK(loadFile(path.string()) == d);
  std::filesystem::remove(path);
}

TEST_CASE("a 10k-vector file loads quickly") {
  const LabeledSet d = generate(blobs(10, 64, 10000, 0.2, 11));
  std::stringstream buf;
  writeVectorFile(buf, benignFile(d));
  const auto start = std::chrono::steady_clock::now();
  const LabeledSet back = toLabeledSet(readVectorFile(buf));
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(back == d);
  CHECK(seconds < 1.0);
}
