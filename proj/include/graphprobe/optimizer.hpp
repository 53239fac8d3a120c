#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gp {

enum class OptimizerKind { Sgd, Adam };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& s);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First-order minimizer over a fixed list of parameter tensors. The tensor
/// list (count and sizes) must be identical on every call.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config = {}) : config_(config) {}

  /// Applies one descent step (params -= lr * direction). A step whose
  /// gradient contains NaN/Inf is rejected: params and state are untouched and
  /// false is returned.
  bool step(std::span<const std::span<float>> params, std::span<const std::span<float>> grads,
            double learning_rate);

  std::uint64_t steps() const { return steps_; }
  std::uint64_t rejected() const { return rejected_; }
  const OptimizerConfig& config() const { return config_; }
  /// Adam moment estimates, for inspection in tests.
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  OptimizerConfig config_;
  std::uint64_t steps_ = 0;
  std::uint64_t rejected_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace gp
