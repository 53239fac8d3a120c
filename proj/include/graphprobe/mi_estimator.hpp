#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphprobe/matrix.hpp"
#include "graphprobe/mlp.hpp"
#include "graphprobe/optimizer.hpp"
#include "graphprobe/rng.hpp"

namespace gp {

struct CriticConfig {
  std::size_t x_dim = 0;  // 0: take from the data
  std::size_t z_dim = 0;  // 0: take from the data
  std::size_t projection_dim = 64;
  /// Hidden layers of the scalar head after the concatenated projections.
  std::vector<std::size_t> head_hidden_dims{64};
  std::size_t epochs = 50;
  double learning_rate = 1e-4;
  /// Number of trailing epoch means averaged into the final estimate.
  std::size_t smoothing_window = 10;
  /// Stop once the epoch mean moves less than this for `early_stop_patience`
  /// consecutive epochs. A non-positive tolerance disables early stopping.
  double early_stop_tolerance = 1e-3;
  std::size_t early_stop_patience = 5;
  OptimizerKind optimizer = OptimizerKind::Adam;
  /// Fraction of sentences held out; when positive the trace records the
  /// held-out bound instead of the training bound.
  double holdout = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  /// Stable hex digest of every field except the seed.
  std::string hash() const;
};

/// T(x, z): x and z are each linearly projected to projection_dim, the two
/// projections are concatenated and a ReLU head maps them to a scalar.
class Critic {
 public:
  Critic(std::size_t x_dim, std::size_t z_dim, const CriticConfig& cfg, Rng& rng);

  /// Scores of row pairs (x_i, z_i).
  std::vector<double> scores(const Matrix& x, const Matrix& z) const;

  MlpParams& proj_x() { return proj_x_; }
  MlpParams& proj_z() { return proj_z_; }
  MlpParams& head() { return head_; }
  const MlpParams& proj_x() const { return proj_x_; }
  const MlpParams& proj_z() const { return proj_z_; }
  const MlpParams& head() const { return head_; }

  std::vector<std::span<float>> tensors();
  void bump_version();

 private:
  MlpParams proj_x_;
  MlpParams proj_z_;
  MlpParams head_;
};

struct CriticGradients {
  MlpGradients proj_x;
  MlpGradients proj_z;
  MlpGradients head;
  std::vector<std::span<float>> tensors();
};

/// mean(joint) - log(mean(exp(marginal))), evaluated with a max shift.
double dv_bound_from_scores(std::span<const double> joint, std::span<const double> marginal);

/// DV bound on one batch: joint pairs (x_i, z_i), marginal pairs
/// (x_perm[i], z_i). `perm` must be a permutation without fixed points.
double dv_bound(const Critic& critic, const Matrix& x, const Matrix& z, std::span<const std::size_t> perm);

/// As dv_bound, also filling the gradient of the loss (= -bound).
double dv_bound_with_gradient(const Critic& critic, const Matrix& x, const Matrix& z,
                              std::span<const std::size_t> perm, CriticGradients& grads);

struct SentencePair {
  Matrix x;
  Matrix z;
};

/// Noise redrawn on every training pass for one side of the pairs.
struct ResampledNoise {
  enum class Kind {
    Additive,  // row += amount * N(0, 1)
    Mixing,    // row = (1 - amount) * row + amount * stddev(row) * N(0, 1)
    Replace,   // row = N(0, 1)
  };
  Kind kind = Kind::Mixing;
  double amount = 0.0;
  /// Rows to corrupt per sentence; ignored when all_rows is set.
  std::vector<std::vector<std::size_t>> rows;
  bool all_rows = true;
};

struct NoisePlan {
  std::optional<ResampledNoise> x;
  std::optional<ResampledNoise> z;
};

struct MiEstimate {
  double value = 0.0;  // nats
  std::vector<double> trace;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::size_t epochs_run = 0;
  bool early_stopped = false;
  std::size_t skipped_sentences = 0;  // fewer than 2 rows
  std::size_t rejected_steps = 0;     // non-finite gradients
};

/// row = (1 - ratio) * row + ratio * stddev(row) * N(0, 1).
void mix_with_noise(std::span<float> row, double ratio, Rng& rng);

/// Trains a fresh critic by ascending the DV bound, one sentence per step with
/// a fresh derangement each step.
MiEstimate estimate_mi(std::span<const SentencePair> pairs, const CriticConfig& cfg,
                       const NoisePlan& noise = {});

/// I(Z + eps; Z) with eps ~ N(0, (epsilon_scale * stddev(all Z entries))^2),
/// redrawn every pass.
MiEstimate estimate_self_mi(std::span<const Matrix> z, double epsilon_scale, const CriticConfig& cfg);

/// I(R; Z) with R standard Gaussian of width r_dim, redrawn every pass.
MiEstimate estimate_null_mi(std::span<const Matrix> z, std::size_t r_dim, const CriticConfig& cfg);

}  // namespace gp
