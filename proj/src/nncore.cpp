#include "randef/nncore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "randef/errors.hpp"
#include "randef/kernels.hpp"

namespace randef {

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("network needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    if (layer.inputs == 0 || layer.outputs == 0) throw ShapeError("layer with zero width");
    if (layer.weights.size() != layer.inputs * layer.outputs ||
        layer.bias.size() != layer.outputs) {
      throw ShapeError("layer " + std::to_string(l) + ": parameter count does not match shape");
    }
    if (l > 0 && layers_[l - 1].outputs != layer.inputs) {
      throw ShapeError("layer " + std::to_string(l) + ": input width does not match previous");
    }
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(layer.weights.begin(), layer.weights.end(), finite) ||
        !std::all_of(layer.bias.begin(), layer.bias.end(), finite)) {
      throw DomainError("layer " + std::to_string(l) + ": non-finite parameter");
    }
  }
  if (classCount() < 2) throw ShapeError("classifier needs at least two classes");
}

Network Network::initialized(std::span<const std::size_t> widths, Seed seed) {
  if (widths.size() < 2) throw ShapeError("need input and output widths");
  Engine engine(seed);
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Layer layer;
    layer.inputs = widths[l];
    layer.outputs = widths[l + 1];
    layer.activation = (l + 2 == widths.size()) ? Activation::Identity : Activation::Relu;
    std::normal_distribution<double> init(0.0, std::sqrt(2.0 / static_cast<double>(layer.inputs)));
    layer.weights.resize(layer.inputs * layer.outputs);
    for (double& w : layer.weights) w = init(engine);
    layer.bias.assign(layer.outputs, 0.0);
    layers.push_back(std::move(layer));
  }
  return Network(std::move(layers));
}

std::size_t Network::parameterCount() const noexcept {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

void Network::applyGradient(const GradientBundle& grads, double scale) {
  if (grads.layers.size() != layers_.size()) throw ShapeError("gradient depth mismatch");
  const auto& k = kernels::active();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Layer& layer = layers_[l];
    const LayerGradient& g = grads.layers[l];
    if (g.weights.size() != layer.weights.size() || g.bias.size() != layer.bias.size()) {
      throw ShapeError("gradient shape mismatch");
    }
    k.axpy(scale, g.weights.data(), layer.weights.data(), layer.weights.size());
    k.axpy(scale, g.bias.data(), layer.bias.data(), layer.bias.size());
  }
}

Label argmaxLowest(std::span<const double> values) {
  if (values.empty()) throw ShapeError("argmax of empty vector");
  Label best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return best;
}

namespace {

void checkInput(const Network& net, std::span<const double> x) {
  if (net.depth() == 0) throw ShapeError("empty network");
  if (x.size() != net.inputDim()) {
    throw ShapeError("input has dimension " + std::to_string(x.size()) + ", network expects " +
                     std::to_string(net.inputDim()));
  }
}

void activate(Activation a, std::span<double> v) {
  if (a == Activation::Relu) {
    for (double& e : v) e = e > 0.0 ? e : 0.0;
  }
}

}  // namespace

void forwardLogits(const Network& net, std::span<const double> x, Vector& logits) {
  checkInput(net, x);
  thread_local Vector bufA;
  thread_local Vector bufB;
  const auto& k = kernels::active();
  const double* in = x.data();
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Layer& layer = layers[l];
    Vector& out = (l + 1 == layers.size()) ? logits : ((l % 2 == 0) ? bufA : bufB);
    out.resize(layer.outputs);
    k.gemv(layer.weights.data(), layer.outputs, layer.inputs, in, layer.bias.data(), out.data());
    activate(layer.activation, out);
    in = out.data();
  }
}

Prediction forward(const Network& net, std::span<const double> x) {
  Prediction p;
  forwardLogits(net, x, p.logits);
  p.label = argmaxLowest(p.logits);
  return p;
}

Label classify(const Network& net, std::span<const double> x) {
  thread_local Vector logits;
  forwardLogits(net, x, logits);
  return argmaxLowest(logits);
}

ForwardTrace trace(const Network& net, std::span<const double> x) {
  checkInput(net, x);
  const auto& k = kernels::active();
  ForwardTrace tr;
  tr.pre.reserve(net.depth());
  tr.post.reserve(net.depth() + 1);
  tr.post.emplace_back(x.begin(), x.end());
  for (const Layer& layer : net.layers()) {
    Vector z(layer.outputs);
    k.gemv(layer.weights.data(), layer.outputs, layer.inputs, tr.post.back().data(),
           layer.bias.data(), z.data());
    Vector a = z;
    activate(layer.activation, a);
    tr.pre.push_back(std::move(z));
    tr.post.push_back(std::move(a));
  }
  return tr;
}

GradientBundle backward(const Network& net, const ForwardTrace& tr,
                        std::span<const double> dLogits, bool withWeights) {
  if (dLogits.size() != net.classCount()) throw ShapeError("dLogits length mismatch");
  const auto& k = kernels::active();
  const auto& layers = net.layers();
  GradientBundle out;
  if (withWeights) out.layers.resize(layers.size());

  Vector g(dLogits.begin(), dLogits.end());
  Vector next;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Layer& layer = layers[l];
    if (layer.activation == Activation::Relu) {
      // Subgradient 0 at the kink.
      for (std::size_t r = 0; r < layer.outputs; ++r) {
        if (!(tr.pre[l][r] > 0.0)) g[r] = 0.0;
      }
    }
    if (withWeights) {
      LayerGradient& lg = out.layers[l];
      lg.weights.assign(layer.weights.size(), 0.0);
      k.rankOneUpdate(lg.weights.data(), layer.outputs, layer.inputs, 1.0, g.data(),
                      tr.post[l].data());
      lg.bias = g;
    }
    next.resize(layer.inputs);
    k.gemvTransposed(layer.weights.data(), layer.outputs, layer.inputs, g.data(), next.data());
    std::swap(g, next);
  }
  out.inputGrad = std::move(g);
  return out;
}

double crossEntropy(std::span<const double> logits, Label label) {
  if (label >= logits.size()) throw DomainError("label out of range");
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - peak);
  return std::log(sum) + peak - logits[label];
}

LossGradient lossAndGradients(const Network& net, std::span<const double> x, Label label,
                              bool withWeights) {
  if (label >= net.classCount()) {
    throw DomainError("label " + std::to_string(label) + " out of range for " +
                      std::to_string(net.classCount()) + " classes");
  }
  const ForwardTrace tr = trace(net, x);
  const Vector& z = tr.post.back();
  const double peak = *std::max_element(z.begin(), z.end());
  Vector p(z.size());
  double sum = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) {
    p[c] = std::exp(z[c] - peak);
    sum += p[c];
  }
  for (double& v : p) v /= sum;
  LossGradient result;
  result.loss = std::log(sum) + peak - z[label];
  p[label] -= 1.0;
  result.grads = backward(net, tr, p, withWeights);
  return result;
}

Vector inputGradient(const Network& net, std::span<const double> x,
                     std::span<const double> coeffs) {
  const ForwardTrace tr = trace(net, x);
  return backward(net, tr, coeffs, false).inputGrad;
}

Jacobian inputJacobian(const Network& net, std::span<const double> x, Vector* logits) {
  const ForwardTrace tr = trace(net, x);
  Jacobian jac;
  jac.rows = net.classCount();
  jac.cols = net.inputDim();
  jac.data.resize(jac.rows * jac.cols);
  Vector unit(jac.rows, 0.0);
  for (std::size_t c = 0; c < jac.rows; ++c) {
    unit[c] = 1.0;
    const Vector g = backward(net, tr, unit, false).inputGrad;
    std::copy(g.begin(), g.end(), jac.data.begin() + static_cast<std::ptrdiff_t>(c * jac.cols));
    unit[c] = 0.0;
  }
  if (logits) *logits = tr.post.back();
  return jac;
}

double accuracy(const Network& net, const LabeledSet& data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : data) correct += classify(net, ex.input) == ex.label ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult trainClassifier(const LabeledSet& data, std::span<const std::size_t> hiddenWidths,
                            const TrainConfig& cfg) {
  if (data.empty()) throw ContractError("training data is empty");
  if (!(cfg.learningRate > 0.0)) throw ConfigError("learning rate must be positive");
  const std::size_t dim = data.front().input.size();
  Label maxLabel = 0;
  for (const auto& ex : data) {
    if (ex.input.size() != dim) throw ShapeError("training inputs have mixed dimensions");
    maxLabel = std::max(maxLabel, ex.label);
  }
  const std::size_t classes = std::max<std::size_t>(2, maxLabel + 1);

  std::vector<std::size_t> widths{dim};
  widths.insert(widths.end(), hiddenWidths.begin(), hiddenWidths.end());
  widths.push_back(classes);

  TrainResult result{Network::initialized(widths, deriveSeed(cfg.seed, "init")), 0.0, {}};
  Engine shuffler(deriveSeed(cfg.seed, "shuffle"));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffler);
    double total = 0.0;
    for (std::size_t idx : order) {
      const Example& ex = data[idx];
      LossGradient lg = lossAndGradients(result.network, ex.input, ex.label, true);
      if (!std::isfinite(lg.loss)) throw TrainingError("loss became non-finite", epoch);
      total += lg.loss;
      result.network.applyGradient(lg.grads, -cfg.learningRate);
    }
    const double mean = total / static_cast<double>(data.size());
    if (!std::isfinite(mean)) throw TrainingError("loss became non-finite", epoch);
    result.epochLoss.push_back(mean);
  }
  result.trainingAccuracy = accuracy(result.network, data);
  return result;
}

// ---------------------------------------------------------------- serialization

namespace {

constexpr char kMagic[8] = {'R', 'A', 'N', 'D', 'E', 'F', 'N', 'N'};

void putU64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((v >> (8 * b)) & 0xffU);
  out.write(bytes, 8);
}

std::uint64_t getU64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw ParseError("truncated network file", 0);
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | bytes[b];
  return v;
}

}  // namespace

void writeNetwork(std::ostream& out, const Network& net) {
  out.write(kMagic, sizeof kMagic);
  putU64(out, kNetworkFormatVersion);
  putU64(out, net.inputDim());
  putU64(out, net.classCount());
  putU64(out, net.depth());
  for (const Layer& layer : net.layers()) {
    putU64(out, layer.inputs);
    putU64(out, layer.outputs);
    putU64(out, static_cast<std::uint64_t>(layer.activation));
    for (double w : layer.weights) putU64(out, std::bit_cast<std::uint64_t>(w));
    for (double b : layer.bias) putU64(out, std::bit_cast<std::uint64_t>(b));
  }
}

Network readNetwork(std::istream& in) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, kMagic)) {
    throw ParseError("not a network file (bad magic)", 0);
  }
  const std::uint64_t version = getU64(in);
  if (version != kNetworkFormatVersion) {
    throw ParseError("unsupported network format version " + std::to_string(version), 0);
  }
  const std::uint64_t inputDim = getU64(in);
  const std::uint64_t classes = getU64(in);
  const std::uint64_t depth = getU64(in);
  if (depth == 0 || depth > 1024) throw ParseError("implausible layer count", 0);
  std::vector<Layer> layers(depth);
  for (Layer& layer : layers) {
    layer.inputs = getU64(in);
    layer.outputs = getU64(in);
    const std::uint64_t act = getU64(in);
    if (act > 1) throw ParseError("unknown activation code", 0);
    layer.activation = static_cast<Activation>(act);
    if (layer.inputs > (1u << 24) || layer.outputs > (1u << 24)) {
      throw ParseError("implausible layer width", 0);
    }
    layer.weights.resize(layer.inputs * layer.outputs);
    layer.bias.resize(layer.outputs);
    for (double& w : layer.weights) w = std::bit_cast<double>(getU64(in));
    for (double& b : layer.bias) b = std::bit_cast<double>(getU64(in));
  }
  Network net(std::move(layers));
  if (net.inputDim() != inputDim || net.classCount() != classes) {
    throw ParseError("header dimensions disagree with layer shapes", 0);
  }
  return net;
}

void saveNetwork(const std::string& path, const Network& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  writeNetwork(out, net);
  if (!out) throw Error("write failed: " + path);
}

Network loadNetwork(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("cannot open network file " + path);
  return readNetwork(in);
}

}  // namespace randef
