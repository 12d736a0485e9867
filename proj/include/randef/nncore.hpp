#pragma once
// Dense feed-forward classifier: exact inference, backpropagation to inputs
// and parameters, SGD training and a versioned binary serialization.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "randef/rng.hpp"
#include "randef/types.hpp"

namespace randef {

enum class Activation : std::uint8_t { Identity = 0, Relu = 1 };

struct Layer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;  // outputs x inputs, row-major
  std::vector<double> bias;     // outputs
  Activation activation = Activation::Relu;

  friend bool operator==(const Layer&, const Layer&) = default;
};

enum class ParameterKind { Weight, Bias };

struct LayerGradient {
  std::vector<double> weights;
  std::vector<double> bias;
};

struct GradientBundle {
  Vector inputGrad;
  std::vector<LayerGradient> layers;
};

struct Prediction {
  Vector logits;
  Label label = 0;
};

class Network {
 public:
  Network() = default;
  /// Throws ShapeError / DomainError when layers do not compose, the final
  /// width is below 2, or a parameter is not finite.
  explicit Network(std::vector<Layer> layers);

  /// He-initialised ReLU network; the last layer is affine (identity).
  /// `widths` = {inputDim, hidden..., classCount}.
  static Network initialized(std::span<const std::size_t> widths, Seed seed);

  std::size_t inputDim() const noexcept { return layers_.empty() ? 0 : layers_.front().inputs; }
  std::size_t classCount() const noexcept {
    return layers_.empty() ? 0 : layers_.back().outputs;
  }
  std::size_t depth() const noexcept { return layers_.size(); }
  std::size_t parameterCount() const noexcept;
  const std::vector<Layer>& layers() const noexcept { return layers_; }

  /// Visits every parameter in serialization order: per layer, weights then biases.
  template <class F>
  void transformParameters(F&& f) {
    for (auto& layer : layers_) {
      for (double& w : layer.weights) f(w, ParameterKind::Weight);
      for (double& b : layer.bias) f(b, ParameterKind::Bias);
    }
  }

  /// params += scale * grads
  void applyGradient(const GradientBundle& grads, double scale);

  friend bool operator==(const Network&, const Network&) = default;

 private:
  std::vector<Layer> layers_;
};

/// Smallest index attaining the maximum.
Label argmaxLowest(std::span<const double> values);

Prediction forward(const Network& net, std::span<const double> x);

/// Logits only, into `logits` (resized). Reuses per-thread scratch buffers.
void forwardLogits(const Network& net, std::span<const double> x, Vector& logits);

/// Label only; the hot path used by defenses and metrics.
Label classify(const Network& net, std::span<const double> x);

/// Pre- and post-activation values of every layer; post[0] is the input.
struct ForwardTrace {
  std::vector<Vector> pre;
  std::vector<Vector> post;
  const Vector& logits() const { return pre.back(); }
};

ForwardTrace trace(const Network& net, std::span<const double> x);

/// Gradient of sum_k dLogits[k] * Z_k. Weight gradients are filled only when
/// `withWeights` is set; otherwise `layers` is empty.
GradientBundle backward(const Network& net, const ForwardTrace& tr,
                        std::span<const double> dLogits, bool withWeights);

/// -log softmax(logits)[label], computed stably.
double crossEntropy(std::span<const double> logits, Label label);

struct LossGradient {
  double loss = 0.0;
  GradientBundle grads;
};

/// Cross-entropy loss and its exact gradients; DomainError on a bad label.
LossGradient lossAndGradients(const Network& net, std::span<const double> x, Label label,
                              bool withWeights = true);

/// Gradient of sum_k coeffs[k] * Z_k(x) with respect to x.
Vector inputGradient(const Network& net, std::span<const double> x,
                     std::span<const double> coeffs);

/// d Z_k / d x_c, classCount x inputDim, row-major.
struct Jacobian {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  std::span<const double> row(std::size_t k) const { return {data.data() + k * cols, cols}; }
};

Jacobian inputJacobian(const Network& net, std::span<const double> x, Vector* logits = nullptr);

struct TrainConfig {
  double learningRate = 0.01;
  std::size_t epochs = 20;
  Seed seed = 0;
};

struct TrainResult {
  Network network;
  double trainingAccuracy = 0.0;
  std::vector<double> epochLoss;
};

double accuracy(const Network& net, const LabeledSet& data);

/// Plain per-example SGD on cross-entropy, reshuffled every epoch.
/// Throws TrainingError when the loss becomes non-finite.
TrainResult trainClassifier(const LabeledSet& data, std::span<const std::size_t> hiddenWidths,
                            const TrainConfig& cfg);

// Serialization: "RANDEFNN" magic, u32 version, then shapes and IEEE-754 bit
// patterns, all little-endian.
inline constexpr std::uint32_t kNetworkFormatVersion = 1;

void writeNetwork(std::ostream& out, const Network& net);
Network readNetwork(std::istream& in);
void saveNetwork(const std::string& path, const Network& net);
Network loadNetwork(const std::string& path);

}  // namespace randef
