#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "graphprobe/embedding_io.hpp"
#include "graphprobe/graph.hpp"
#include "graphprobe/matrix.hpp"
#include "graphprobe/mi_estimator.hpp"

namespace gp {

/// Null and self estimates bracketing I(X; Z).
struct ControlBounds {
  double self_mi = 0.0;
  double null_mi = 0.0;
  bool valid() const { return self_mi > null_mi; }
};

/// (mi_xz - null) / (self - null), not clamped. Throws DataError when
/// self <= null.
double mig(double mi_xz, const ControlBounds& bounds);

/// 1 - (mi_x_zprime - null) / (mi_xz - null). Throws DataError when
/// mi_xz <= null.
double mil(double mi_x_zprime, double mi_xz, double null_mi);

/// Per sentence, the rows to corrupt.
using RowTargets = std::vector<std::vector<std::size_t>>;

/// Mixing noise on targeted rows: row' = (1 - rho) * row + rho * stddev(row) * N(0, 1).
/// Row r of sentence s draws from derive_seed(derive_seed(seed, s), r), so
/// disjoint target sets commute. rho = 0 returns bit-identical copies.
std::vector<Matrix> perturb_embeddings(std::span<const Matrix> z, const RowTargets& targets, double rho,
                                       std::uint64_t seed);

/// Graphs with their X and Z rows paired token by token. X rows of tokens
/// that carry no node are dropped.
struct AlignedCorpus {
  std::vector<LinguisticGraph> graphs;
  std::vector<Matrix> x;
  std::vector<Matrix> z;
  /// row_nodes[s][r]: node behind row r of sentence s.
  std::vector<std::vector<NodeId>> row_nodes;
  std::vector<std::string> warnings;

  std::size_t size() const { return graphs.size(); }
  std::vector<SentencePair> pairs() const;
};

/// Sentences missing from Z (skipped at embedding time) are dropped with a
/// warning; a sentence missing from X, or an X block lacking a node-bearing
/// token, is a DataError naming the sentence.
AlignedCorpus align_corpus(const std::vector<LinguisticGraph>& graphs, const EmbeddingStore& x,
                           const EmbeddingStore& z);

/// Rows whose nodes the selector picks, per sentence.
RowTargets resolve_targets(const AlignedCorpus& corpus, const SubgraphSelector& selector);
/// Node ids per sentence_id; the key "*" applies to sentences not listed.
RowTargets resolve_targets(const AlignedCorpus& corpus, const std::map<std::string, std::vector<NodeId>>& nodes);

std::size_t count_targets(const RowTargets& targets);

/// Down-samples every target set to the smallest total row count among them,
/// keeping a seeded uniform subset of rows.
std::vector<RowTargets> equalize_targets(const std::vector<RowTargets>& sets, std::uint64_t seed);

struct ProbeConfig {
  CriticConfig critic;
  std::size_t repeats = 20;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
  double self_epsilon = 0.01;  // times the global stddev of Z
  std::size_t null_dim = 0;    // 0: same width as X
  double rho = 1.0;
  bool equalize_targets = false;

  void validate() const;
};

/// Per-repeat critic seeds; the X;Z seeds are reused for X;Z' so MIL
/// comparisons stay paired.
std::uint64_t repeat_seed(std::uint64_t seed, std::string_view role, std::size_t repeat);

struct RepeatRecord {
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  double mi_xz = 0.0;
  double self_mi = 0.0;
  double null_mi = 0.0;
  double mi_perturbed = 0.0;  // I(X; Z') for MIL, I(Z'; Z) for the sweep
  double value = 0.0;
};

struct SweepPoint {
  double ratio = 0.0;
  std::vector<double> percents;  // per repeat, 100 * I(Z'; Z) / I(Z; Z)
  double mean = 0.0;
  double stddev = 0.0;
};

struct ProbeReport {
  std::string kind;  // "MIG", "MIL" or "noise-sweep"
  std::vector<double> values;
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<RepeatRecord> repeats;
  std::vector<SweepPoint> sweep;
  std::string selector;
  double noise_ratio = 0.0;
  std::size_t targeted_rows = 0;
  std::size_t total_rows = 0;
  bool degenerate = false;
  std::string critic_hash;
  std::vector<std::string> warnings;
  std::size_t skipped_sentences = 0;
};

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1); 0 for a single value
};
Summary summarize(std::span<const double> values);

/// Cached per-repeat I(X;Z), I(R;Z) and optionally I(Z;Z).
struct Baseline {
  std::vector<MiEstimate> xz;
  std::vector<MiEstimate> null;
  std::vector<MiEstimate> self;
};

Baseline estimate_baseline(const AlignedCorpus& corpus, const ProbeConfig& cfg, bool with_self);
/// Only the per-repeat I(X;Z) runs, with the same seeds estimate_baseline uses.
std::vector<MiEstimate> estimate_xz(const AlignedCorpus& corpus, const ProbeConfig& cfg);

ProbeReport run_birdseye(const AlignedCorpus& corpus, const ProbeConfig& cfg);
ProbeReport birdseye_report(const Baseline& base, const ProbeConfig& cfg);

/// One MIL report per target set, all against the same baseline.
std::vector<ProbeReport> run_wormseye(const AlignedCorpus& corpus, const std::vector<RowTargets>& targets,
                                      const std::vector<std::string>& descriptions, const ProbeConfig& cfg,
                                      const Baseline& base);
ProbeReport run_wormseye(const AlignedCorpus& corpus, const SubgraphSelector& selector, const ProbeConfig& cfg);

/// 100 * I(Z'; Z) / I(Z; Z) with Z' globally mixed at each ratio. The ratio 0
/// point is the self estimate itself.
ProbeReport run_noise_sweep(std::span<const Matrix> z, const std::vector<double>& ratios, const ProbeConfig& cfg);

}  // namespace gp
