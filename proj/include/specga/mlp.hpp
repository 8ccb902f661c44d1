#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "specga/matrix.hpp"

namespace specga {

enum class Activation { Relu, Tanh };

enum class OptimizerKind { PlainSgd, AdaptiveMoments };

std::string activation_to_string(Activation a);
Activation activation_from_string(const std::string& s);
std::string optimizer_to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);

struct TrainConfig {
  std::int64_t steps = 200000;
  int batch_size = 64;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::AdaptiveMoments;
  std::uint64_t seed = 0;
};

// Fully connected feedforward network. Hidden widths follow the fixed ramp
// 100*H, 100*(H-1), ..., 100; hidden layers use the configured nonlinearity
// and the output layer is affine.
class Mlp {
 public:
  struct Layer {
    Matrix w;               // out x in, w(i, j) = coefficient from input j to neuron i
    std::vector<double> b;  // out

    friend bool operator==(const Layer&, const Layer&) = default;
  };

  // Widths [input_dim, 100*H, ..., 100, output_dim]; weights uniform in
  // +-sqrt(6 / (fan_in + fan_out)), biases zero, deterministic in the seed.
  Mlp(int input_dim, int hidden_depth, int output_dim, Activation act, std::uint64_t seed);

  // Arbitrary layer widths from explicit parameters; used by tests and by
  // the model loader. Validates shape consistency and finiteness only.
  static Mlp from_parts(std::vector<int> layer_dims, Activation act, std::vector<Layer> layers);

  int input_dim() const { return layer_dims_.front(); }
  int output_dim() const { return layer_dims_.back(); }
  int hidden_depth() const { return static_cast<int>(layer_dims_.size()) - 2; }
  Activation activation() const { return act_; }
  const std::vector<int>& layer_dims() const { return layer_dims_; }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  std::size_t parameter_count() const;

  std::vector<double> forward(std::span<const double> input) const;

  // One input per row; returns one output per row.
  Matrix forward_batch(const Matrix& inputs) const;

  // Mean over the batch of the squared Euclidean error, plus exact gradients
  // of that loss for every weight and bias.
  double loss_grad(const Matrix& inputs, const Matrix& targets, std::vector<Layer>& grads) const;
  double loss_grad(std::span<const std::pair<std::vector<double>, std::vector<double>>> batch,
                   std::vector<Layer>& grads) const;

  void save(const std::string& path) const;
  static Mlp load(const std::string& path);

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  Mlp() = default;

  std::vector<int> layer_dims_;
  Activation act_ = Activation::Relu;
  std::vector<Layer> layers_;
};

using Grads = std::vector<Mlp::Layer>;

// First/second moment accumulators for adaptive-moments mode; empty vectors
// in plain-sgd mode. Shapes mirror the network exactly once initialized.
struct OptimizerState {
  std::int64_t step = 0;
  std::vector<Mlp::Layer> m;
  std::vector<Mlp::Layer> v;
};

// p <- p - lr * g (plain-sgd), or the adaptive-moments update with
// beta1 = 0.9, beta2 = 0.999, eps = 1e-8 and bias correction.
void optimizer_step(Mlp& net, const Grads& grads, OptimizerState& state, const TrainConfig& cfg);

}  // namespace specga
