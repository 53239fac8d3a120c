#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "graphprobe/embedding_io.hpp"
#include "graphprobe/graph.hpp"
#include "graphprobe/matrix.hpp"
#include "graphprobe/mlp.hpp"
#include "graphprobe/optimizer.hpp"

namespace gp {

enum class InputSource { GraphEmbeddings, WordRepresentations, PerturbedWordRepresentations };

std::string to_string(InputSource s);
InputSource input_source_from_string(const std::string& s);

struct LinkPredictorConfig {
  std::size_t hidden_layers = 0;  // 0..5
  std::size_t hidden_dim = 128;
  double learning_rate = 1e-4;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  /// Stop when the epoch training loss improves by less than this for
  /// plateau_patience consecutive epochs; non-positive disables.
  double plateau_tolerance = 1e-4;
  std::size_t plateau_patience = 3;
  /// Score a pair as max(T(u,v), T(v,u)) instead of T(u,v) with u < v.
  bool symmetric = false;
  OptimizerKind optimizer = OptimizerKind::Adam;
  InputSource input_source = InputSource::GraphEmbeddings;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Per-sentence rows for the predictor plus the node behind each row.
struct RestorationData {
  std::vector<LinguisticGraph> graphs;
  std::vector<Matrix> rows;
  std::vector<std::vector<NodeId>> row_nodes;
  std::vector<std::string> warnings;

  std::size_t size() const { return graphs.size(); }
};

/// Rows from an embedding file keyed by token; sentences absent from the file
/// are skipped with a warning.
RestorationData restoration_data(const std::vector<LinguisticGraph>& graphs, const EmbeddingStore& store);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded 80/20 split by sentence; both sides non-empty when n >= 2.
Split split_sentences(std::size_t n, std::uint64_t seed, double test_fraction = 0.2);

struct LinkPredictor {
  MlpParams mlp;
  LinkPredictorConfig config;
  std::vector<double> train_loss;  // per epoch
  std::size_t epochs_run = 0;
  bool early_stopped = false;
};

/// Logistic loss on every unordered row pair (u < v) of the given sentences,
/// input [row_u || row_v], label = edge present.
LinkPredictor train_link_predictor(const RestorationData& data, std::span<const std::size_t> sentences,
                                   const LinkPredictorConfig& cfg);

/// Scores of row pairs (i, j) of one sentence.
std::vector<double> score_pairs(const LinkPredictor& p, const Matrix& rows,
                                std::span<const std::pair<std::size_t, std::size_t>> pairs);

struct ScoredPair {
  double score = 0.0;
  bool positive = false;
};

/// Mann-Whitney AUC with ties counting 1/2. Throws DataError unless both
/// classes are present.
double auc(std::span<const ScoredPair> scores);

struct AucReport {
  std::size_t depth = 0;
  double global_auc = 0.0;
  std::map<std::string, double> per_label_auc;
  std::map<std::string, std::size_t> label_counts;  // test positives per label
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::vector<std::string> notes;
  LinkPredictorConfig config;
  std::vector<double> train_loss;
  std::size_t epochs_run = 0;
};

/// Global and per-label AUC on the given sentences. A label's AUC uses its
/// positive pairs against every negative pair.
AucReport per_relation_auc(const LinkPredictor& p, const RestorationData& data, std::span<const std::size_t> sentences);

/// One predictor per entry of `depths`, trained on the train split and scored
/// on the test split. Entry k trains with seed derive_seed(cfg.seed, k).
std::vector<AucReport> evaluate_restoration(const RestorationData& data, const std::vector<std::size_t>& depths,
                                            const LinkPredictorConfig& cfg, std::size_t jobs = 1);

/// Mixes the targeted rows with noise at ratio rho (fixed draw, seeded by
/// cfg.seed), then trains a depth-5 predictor on the corrupted rows.
AucReport perturbed_accuracy_probe(const RestorationData& data, const std::vector<std::vector<std::size_t>>& targets,
                                   double rho, const LinkPredictorConfig& cfg);

}  // namespace gp
