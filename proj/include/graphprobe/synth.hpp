#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphprobe/graph.hpp"
#include "graphprobe/graph_embed.hpp"
#include "graphprobe/matrix.hpp"
#include "graphprobe/rng.hpp"

namespace gp {

struct LabelPalette {
  std::vector<std::string> node_labels{"NN", "IN", "NNP", "DT", "JJ"};
  std::vector<double> node_weights;  // empty: uniform
  std::vector<std::string> edge_labels{"prep", "pobj", "det", "nn", "nsubj"};
  std::vector<double> edge_weights;  // empty: uniform

  void validate() const;
  std::string sample_node_label(Rng& rng) const;
  std::string sample_edge_label(Rng& rng) const;
};

enum class GraphKind { RandomTree, Star, Path, ErdosRenyi };
enum class Dependence { InvertibleLinear, NoisyLinear, Independent, Mixture };

std::string to_string(GraphKind k);
GraphKind graph_kind_from_string(const std::string& s);
std::string to_string(Dependence d);
Dependence dependence_from_string(const std::string& s);

/// Uniform labeled tree on n nodes decoded from a random Pruefer sequence.
/// Token i carries node i.
LinguisticGraph gen_random_tree(std::size_t n, Rng& rng, const LabelPalette& palette = {},
                                const std::string& sentence_id = "s0");
LinguisticGraph gen_star(std::size_t n, Rng& rng, const LabelPalette& palette = {}, const std::string& sentence_id = "s0");
LinguisticGraph gen_path(std::size_t n, Rng& rng, const LabelPalette& palette = {}, const std::string& sentence_id = "s0");
/// G(n, p) redrawn until connected.
LinguisticGraph gen_erdos_renyi(std::size_t n, double p, Rng& rng, const LabelPalette& palette = {},
                                const std::string& sentence_id = "s0");

struct SynthCorpusConfig {
  std::size_t n_sentences = 200;
  std::size_t min_nodes = 8;
  std::size_t max_nodes = 16;
  GraphKind graph_kind = GraphKind::RandomTree;
  double edge_probability = 0.3;  // Erdos-Renyi only
  LabelPalette palette;
  Dependence dependence = Dependence::InvertibleLinear;
  /// noisy-linear: weight of the linear part; mixture: probability that a
  /// sentence is invertible-linear rather than independent.
  double dependence_param = 0.5;
  std::size_t x_dim = 128;
  /// Noise added to the linear image, relative to its global stddev.
  double linear_noise = 0.01;
  /// Extra tokens per sentence that carry no node; X still has rows for them.
  std::size_t unaligned_tokens = 0;
  WalkConfig walk;
  SkipGramConfig skipgram;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthCorpus {
  std::vector<LinguisticGraph> graphs;
  std::vector<SentenceEmbedding> z;
  std::vector<SentenceEmbedding> x;
  /// For mixture mode, whether each sentence drew the linear branch.
  std::vector<bool> linear_branch;
};

std::vector<LinguisticGraph> gen_graphs(const SynthCorpusConfig& cfg);

/// Orthogonal z_dim x z_dim block stacked over a Gaussian extension to x_dim
/// rows, so X = A z + b is invertible on the image. Requires x_dim >= z_dim.
Matrix gen_linear_map(std::size_t x_dim, std::size_t z_dim, Rng& rng);

/// X from Z per the dependence mode; Z rows are per aligned token, X rows
/// cover every token of the sentence.
std::vector<SentenceEmbedding> gen_x(const std::vector<LinguisticGraph>& graphs,
                                     const std::vector<SentenceEmbedding>& z, const SynthCorpusConfig& cfg,
                                     std::vector<bool>* linear_branch = nullptr);

SynthCorpus gen_corpus(const SynthCorpusConfig& cfg, std::size_t jobs = 1);

struct GaussianPairConfig {
  std::size_t dim = 4;
  double rho = 0.9;
  std::size_t n_samples = 10000;
  /// Rows per pseudo-sentence (one estimator minibatch).
  std::size_t block_size = 250;
  std::uint64_t seed = 0;

  void validate() const;
  /// -(dim / 2) * ln(1 - rho^2)
  double true_mi() const;
};

struct GaussianPairs {
  std::vector<SentenceEmbedding> x;
  std::vector<SentenceEmbedding> z;
};

/// Per dimension (x_i, z_i) standard bivariate normal with correlation rho.
GaussianPairs gen_gaussian_pairs(const GaussianPairConfig& cfg);

}  // namespace gp
