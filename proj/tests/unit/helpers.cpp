#include "helpers.hpp"

#include "randef/dataset.hpp"

namespace testing {

const TrainedFixture& trainedFixture() {
  static const TrainedFixture fixture = [] {
    randef::DatasetSpec spec;
    spec.classCount = 4;
    spec.inputDim = 12;
    spec.sampleCount = 400;
    spec.spread = 0.08;
    spec.seed = 11;
    spec.layoutSeed = 5;
    const randef::LabeledSet train = randef::generate(spec);
    randef::TrainConfig cfg;
    cfg.epochs = 15;
    cfg.seed = 3;
    const std::vector<std::size_t> hidden{16, 12};
    TrainedFixture f{randef::trainClassifier(train, hidden, cfg).network, {}};
    spec.seed = 12;
    spec.sampleCount = 60;
    for (const auto& e : randef::generate(spec)) {
      if (randef::classify(f.net, e.input) == e.label) f.data.push_back(e);
    }
    return f;
  }();
  return fixture;
}

}  // namespace testing
