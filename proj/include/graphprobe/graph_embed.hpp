#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphprobe/graph.hpp"
#include "graphprobe/matrix.hpp"
#include "graphprobe/optimizer.hpp"

namespace gp {

struct WalkConfig {
  std::size_t walk_length = 10;     // nodes per walk
  std::size_t walks_per_node = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Which skip-gram table becomes the node vector.
enum class EmbeddingSide { Input, Output, Sum };

std::string to_string(EmbeddingSide s);
EmbeddingSide embedding_side_from_string(const std::string& s);

struct SkipGramConfig {
  std::size_t embedding_dim = 128;
  std::size_t window = 1;
  /// Full-batch passes over the walk corpus's co-occurrence counts.
  std::size_t epochs = 300;
  double learning_rate = 0.025;
  OptimizerKind optimizer = OptimizerKind::Adam;
  EmbeddingSide side = EmbeddingSide::Sum;
  std::uint64_t seed = 0;

  void validate() const;
};

struct NodeEmbedding {
  Matrix input_table;   // n x dim, center-word vectors
  Matrix output_table;  // n x dim, context-word vectors
  Matrix vectors;       // n x dim, per SkipGramConfig::side
  WalkConfig walk_config;
  SkipGramConfig skipgram_config;
  double final_loss = 0.0;  // mean negative log-likelihood per co-occurrence pair
};

/// Rows of one sentence's embedding, ordered by token; `token_indices[i]` is
/// the source-sentence token of row i.
struct SentenceEmbedding {
  std::string sentence_id;
  Matrix rows;
  std::vector<std::size_t> token_indices;
};

/// walks_per_node uniform random walks from every node, each walk_length nodes.
std::vector<std::vector<NodeId>> sample_walks(const LinguisticGraph& graph, const WalkConfig& cfg);

/// counts(c, o) = number of times o appears within `window` positions of c
/// across all walks (both directions, excluding the center position).
std::vector<double> cooccurrence_counts(const std::vector<std::vector<NodeId>>& walks,
                                        std::size_t n_nodes, std::size_t window);

/// Maximizes the skip-gram likelihood of walk co-occurrences under a full
/// softmax over the sentence's nodes. Initialization: input table uniform in
/// +-0.5/dim, output table zero.
NodeEmbedding train_skipgram(const std::vector<std::vector<NodeId>>& walks, std::size_t n_nodes,
                             const SkipGramConfig& cfg);

/// Walks + skip-gram with the configs' seeds used as given, then rows for
/// aligned tokens in token order.
SentenceEmbedding embed_sentence(const LinguisticGraph& graph, const WalkConfig& walk_cfg,
                                 const SkipGramConfig& sg_cfg);

/// Per-sentence seeds derived from (global_seed, sentence_id), so the result
/// does not depend on `jobs`.
std::vector<SentenceEmbedding> embed_corpus(const std::vector<LinguisticGraph>& graphs,
                                            const WalkConfig& walk_cfg, const SkipGramConfig& sg_cfg,
                                            std::uint64_t global_seed, std::size_t jobs = 1);

}  // namespace gp
