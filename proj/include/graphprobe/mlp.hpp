#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "graphprobe/matrix.hpp"
#include "graphprobe/rng.hpp"

namespace gp {

enum class Activation { Relu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Layer layout of a fully connected network. Hidden layers apply the
/// activation; the final layer is always linear.
struct MlpSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  std::size_t output_dim = 0;
  Activation activation = Activation::Relu;

  std::size_t num_layers() const { return hidden_dims.size() + 1; }
  void validate() const;
};

struct DenseLayer {
  Matrix weight;  // in_dim x out_dim, so y = x * W + b
  std::vector<float> bias;
};

struct MlpParams {
  MlpSpec spec;
  std::vector<DenseLayer> layers;
  /// Bumped by every in-place update; caches remember the version they saw.
  std::uint64_t version = 0;

  /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static MlpParams init(const MlpSpec& spec, Rng& rng);
  static MlpParams zeros(const MlpSpec& spec);

  /// Flat views in a fixed order (W0, b0, W1, b1, ...), for optimizers.
  std::vector<std::span<float>> tensors();
  std::size_t parameter_count() const;
  bool all_finite() const;
};

struct MlpCache {
  const MlpParams* owner = nullptr;
  std::uint64_t version = 0;
  std::vector<Matrix> inputs;  // input to each layer
  std::vector<Matrix> pre;     // pre-activation output of each hidden layer
};

struct MlpGradients {
  std::vector<DenseLayer> layers;
  Matrix input;

  std::vector<std::span<float>> tensors();
};

/// Runs the network on each row of `input`. When `cache` is given it is filled
/// for a later backward().
Matrix forward(const MlpParams& params, const Matrix& input, MlpCache* cache = nullptr);

/// Backpropagates d(loss)/d(output). Throws std::logic_error on a cache that was
/// produced by other params or before an update.
MlpGradients backward(const MlpParams& params, const MlpCache& cache, const Matrix& output_grad);

}  // namespace gp
