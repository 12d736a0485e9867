#include <cmath>
#include <random>
#include <sstream>

#include "../support/gradcheck.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "randef/dataset.hpp"
#include "randef/errors.hpp"
#include "randef/nncore.hpp"

using namespace randef;

TEST_CASE("identity network returns its input as logits") {
  const Network net = testing::affineNetwork(3, {1, 0, 0, 0, 1, 0, 0, 0, 1}, {0, 0, 0});
  const Prediction p = forward(net, std::vector<double>{0.2, 0.7, 0.1});
  CHECK(p.logits == std::vector<double>{0.2, 0.7, 0.1});
  CHECK(p.label == 1);
}

TEST_CASE("permutation layer permutes") {
  // rows pick x[2], x[0], x[1]
  const Network net = testing::affineNetwork(3, {0, 0, 1, 1, 0, 0, 0, 1, 0}, {0, 0, 0});
  CHECK(forward(net, std::vector<double>{1, 2, 3}).logits == std::vector<double>{3, 1, 2});
}

TEST_CASE("forward matches a hand-rolled two-layer product") {
  std::mt19937_64 rng(7);
  const Network net = testing::randomNetwork(rng, {5, 6, 4});
  const Vector x = testing::randomVector(rng, 5);
  const Layer& l1 = net.layers()[0];
  const Layer& l2 = net.layers()[1];
  std::vector<double> h(6), z(4);
  for (std::size_t r = 0; r < 6; ++r) {
    double s = l1.bias[r];
    for (std::size_t c = 0; c < 5; ++c) s += l1.weights[r * 5 + c] * x[c];
    h[r] = s > 0 ? s : 0;
  }
  for (std::size_t r = 0; r < 4; ++r) {
    double s = l2.bias[r];
    for (std::size_t c = 0; c < 6; ++c) s += l2.weights[r * 6 + c] * h[c];
    z[r] = s;
  }
  const Vector logits = forward(net, x).logits;
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(logits[k] - z[k]) <= 1e-12);
  Vector fast;
  forwardLogits(net, x, fast);
  CHECK(fast == logits);
  CHECK(classify(net, x) == argmaxLowest(logits));
}

TEST_CASE("argmax breaks ties toward the lowest index") {
  CHECK(argmaxLowest(std::vector<double>{1, 3, 3, 2}) == 1);
  CHECK(argmaxLowest(std::vector<double>{5, 5}) == 0);
}

TEST_CASE("network construction is validated") {
  Layer a{2, 3, std::vector<double>(6, 0.1), std::vector<double>(3, 0.0), Activation::Relu};
  Layer b{4, 2, std::vector<double>(8, 0.1), std::vector<double>(2, 0.0), Activation::Identity};
  CHECK_THROWS_AS(Network({a, b}), ShapeError);
  Layer one{2, 1, std::vector<double>(2, 0.1), std::vector<double>(1, 0.0), Activation::Identity};
  CHECK_THROWS_AS(Network({one}), ShapeError);
  Layer bad = a;
  bad.outputs = 2;
  bad.weights = {0, 0, 0, NAN};
  bad.bias = {0, 0};
  CHECK_THROWS_AS(Network({bad}), DomainError);
  const Network net = testing::affineNetwork(2, {1, 0, 0, 1}, {0, 0});
  CHECK_THROWS_AS(forward(net, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST_CASE("cross-entropy is stable for large logits") {
  CHECK(crossEntropy(std::vector<double>{1000, 0}, 0) == doctest::Approx(0.0));
  CHECK(crossEntropy(std::vector<double>{0, 1000}, 0) == doctest::Approx(1000.0));
  CHECK(crossEntropy(std::vector<double>{0, 0}, 1) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("analytic gradients match central differences") {
  const gradcheck::Summary s = gradcheck::run(20, 99);
  CHECK(s.compared > 500);
  CHECK(s.failed == 0);
  CHECK(s.skippedAtKinks * 20 < s.compared);
}

TEST_CASE("Jacobian rows are the gradients of single logits") {
  std::mt19937_64 rng(8);
  const Network net = testing::randomNetwork(rng, {4, 7, 3});
  const Vector x = testing::randomVector(rng, 4);
  Vector logits;
  const Jacobian jac = inputJacobian(net, x, &logits);
  CHECK(logits == forward(net, x).logits);
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<double> coeffs(3, 0.0);
    coeffs[k] = 1.0;
    const Vector g = inputGradient(net, x, coeffs);
    for (std::size_t c = 0; c < 4; ++c) CHECK(jac.row(k)[c] == doctest::Approx(g[c]).epsilon(1e-12));
  }
}

TEST_CASE("serialization round-trips bit-exactly") {
  std::mt19937_64 rng(9);
  const Network net = testing::randomNetwork(rng, {6, 5, 4, 3});
  std::stringstream buf;
  writeNetwork(buf, net);
  CHECK(readNetwork(buf) == net);

  std::string bytes;
  {
    std::stringstream again;
    writeNetwork(again, net);
    bytes = again.str();
  }
  std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(readNetwork(truncated), ParseError);
  std::string wrongMagic = bytes;
  wrongMagic[0] = 'X';
  std::istringstream bad(wrongMagic);
  CHECK_THROWS_AS(readNetwork(bad), ParseError);
  CHECK_THROWS_AS(loadNetwork("/nonexistent/base.net"), DependencyError);
}

TEST_CASE("training is deterministic and learns separable blobs") {
  DatasetSpec spec;
  spec.classCount = 3;
  spec.inputDim = 6;
  spec.sampleCount = 150;
  spec.spread = 0.05;
  spec.seed = 1;
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.seed = 4;
  const std::vector<std::size_t> hidden{8};
  const LabeledSet data = generate(spec);
  const TrainResult a = trainClassifier(data, hidden, cfg);
  const TrainResult b = trainClassifier(data, hidden, cfg);
  CHECK(a.network == b.network);
  CHECK(a.trainingAccuracy == accuracy(a.network, data));
  CHECK(a.trainingAccuracy >= 0.99);
  CHECK(a.epochLoss.size() == 10);
  CHECK(a.epochLoss.back() < a.epochLoss.front());

  cfg.epochs = 0;
  const std::vector<std::size_t> widths{6, 8, 3};
  CHECK(trainClassifier(data, hidden, cfg).network ==
        Network::initialized(widths, deriveSeed(cfg.seed, "init")));
}

TEST_CASE("divergent training reports the epoch") {
  LabeledSet data{{{1e300, -1e300}, 0}, {{-1e300, 1e300}, 1}};
  TrainConfig cfg;
  cfg.learningRate = 1e10;
  cfg.epochs = 3;
  const std::vector<std::size_t> hidden{4};
  CHECK_THROWS_AS(trainClassifier(data, hidden, cfg), TrainingError);
}
