#include "graphprobe/graph_embed.hpp"

#include <algorithm>
#include <cmath>

#include "graphprobe/error.hpp"
#include "graphprobe/parallel.hpp"
#include "graphprobe/rng.hpp"

namespace gp {

void WalkConfig::validate() const {
  if (walk_length < 2) throw UsageError("walk_length must be at least 2");
  if (walks_per_node < 1) throw UsageError("walks_per_node must be at least 1");
}

void SkipGramConfig::validate() const {
  if (embedding_dim < 1) throw UsageError("embedding_dim must be at least 1");
  if (window < 1) throw UsageError("skip-gram window must be at least 1");
  if (!(learning_rate > 0.0)) throw UsageError("skip-gram learning_rate must be positive");
}

std::string to_string(EmbeddingSide s) {
  switch (s) {
    case EmbeddingSide::Input:
      return "input";
    case EmbeddingSide::Output:
      return "output";
    case EmbeddingSide::Sum:
      return "sum";
  }
  return "sum";
}

EmbeddingSide embedding_side_from_string(const std::string& s) {
  if (s == "input") return EmbeddingSide::Input;
  if (s == "output") return EmbeddingSide::Output;
  if (s == "sum") return EmbeddingSide::Sum;
  throw UsageError("unknown embedding side '" + s + "' (expected input, output or sum)");
}

std::vector<std::vector<NodeId>> sample_walks(const LinguisticGraph& graph, const WalkConfig& cfg) {
  cfg.validate();
  const std::size_t n = graph.num_nodes();
  if (n < 2) {
    throw DataError("sentence '" + graph.sentence_id() + "': a single-node graph has no walks");
  }
  Rng rng(cfg.seed);
  std::vector<std::vector<NodeId>> walks;
  walks.reserve(n * cfg.walks_per_node);
  for (std::size_t rep = 0; rep < cfg.walks_per_node; ++rep) {
    for (NodeId start = 0; start < n; ++start) {
      std::vector<NodeId> walk;
      walk.reserve(cfg.walk_length);
      walk.push_back(start);
      while (walk.size() < cfg.walk_length) {
        const auto& nb = graph.neighbors(walk.back());
        walk.push_back(nb[rng.below(nb.size())]);
      }
      walks.push_back(std::move(walk));
    }
  }
  return walks;
}

std::vector<double> cooccurrence_counts(const std::vector<std::vector<NodeId>>& walks,
                                        std::size_t n_nodes, std::size_t window) {
  std::vector<double> counts(n_nodes * n_nodes, 0.0);
  for (const auto& walk : walks) {
    const std::size_t len = walk.size();
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t lo = i >= window ? i - window : 0;
      const std::size_t hi = std::min(len - 1, i + window);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        counts[walk[i] * n_nodes + walk[j]] += 1.0;
      }
    }
  }
  return counts;
}

namespace {

// Softmax rows of logits into `probs` and return the mean negative
// log-likelihood of the counts.
double softmax_nll(const Matrix& logits, const std::vector<double>& counts, double total,
                   std::vector<double>& probs) {
  const std::size_t n = logits.rows();
  const std::size_t m = logits.cols();
  probs.assign(n * m, 0.0);
  double nll = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    auto row = logits.row(r);
    double mx = row[0];
    for (float v : row) mx = std::max(mx, static_cast<double>(v));
    double z = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      probs[r * m + c] = std::exp(static_cast<double>(row[c]) - mx);
      z += probs[r * m + c];
    }
    const double log_z = std::log(z) + mx;
    for (std::size_t c = 0; c < m; ++c) {
      probs[r * m + c] /= z;
      const double k = counts[r * m + c];
      if (k > 0.0) nll -= k * (static_cast<double>(row[c]) - log_z);
    }
  }
  return nll / total;
}

}  // namespace

NodeEmbedding train_skipgram(const std::vector<std::vector<NodeId>>& walks, std::size_t n_nodes,
                             const SkipGramConfig& cfg) {
  cfg.validate();
  if (n_nodes == 0) throw DataError("skip-gram: no nodes");
  std::vector<bool> seen(n_nodes, false);
  for (const auto& w : walks) {
    for (NodeId v : w) {
      if (v >= n_nodes) throw DataError("skip-gram: walk visits node outside the vocabulary");
      seen[v] = true;
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw DataError("skip-gram: some node never appears in any walk");
  }

  const std::size_t n = n_nodes;
  const std::size_t d = cfg.embedding_dim;
  const auto counts = cooccurrence_counts(walks, n, cfg.window);
  std::vector<double> row_total(n, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) row_total[r] += counts[r * n + c];
    total += row_total[r];
  }
  if (total <= 0.0) throw DataError("skip-gram: walks contain no co-occurrence pairs");

  Rng rng(cfg.seed);
  Matrix input(n, d);
  Matrix output(n, d);
  const double scale = 0.5 / static_cast<double>(d);
  for (float& v : input.values()) v = static_cast<float>((2.0 * rng.uniform() - 1.0) * scale);

  Optimizer opt({cfg.optimizer});
  Matrix logits;
  Matrix grad_logits(n, n);
  Matrix grad_in;
  Matrix grad_out;
  std::vector<double> probs;
  double loss = 0.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    matmul_nt(input, output, logits);
    loss = softmax_nll(logits, counts, total, probs);
    if (!std::isfinite(loss)) {
      throw NumericalError("skip-gram diverged (non-finite loss) at epoch " + std::to_string(epoch));
    }
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        grad_logits(r, c) =
            static_cast<float>((row_total[r] * probs[r * n + c] - counts[r * n + c]) / total);
      }
    }
    matmul(grad_logits, output, grad_in);
    matmul_tn(grad_logits, input, grad_out);
    std::vector<std::span<float>> params{input.values(), output.values()};
    std::vector<std::span<float>> grads{grad_in.values(), grad_out.values()};
    if (!opt.step(params, grads, cfg.learning_rate)) {
      throw NumericalError("skip-gram: non-finite gradient at epoch " + std::to_string(epoch));
    }
  }
  matmul_nt(input, output, logits);
  loss = softmax_nll(logits, counts, total, probs);
  if (!std::isfinite(loss) || !input.all_finite() || !output.all_finite()) {
    throw NumericalError("skip-gram diverged (non-finite parameters)");
  }

  NodeEmbedding emb;
  emb.final_loss = loss;
  emb.walk_config = {};
  emb.skipgram_config = cfg;
  switch (cfg.side) {
    case EmbeddingSide::Input:
      emb.vectors = input;
      break;
    case EmbeddingSide::Output:
      emb.vectors = output;
      break;
    case EmbeddingSide::Sum: {
      emb.vectors = input;
      auto dst = emb.vectors.values();
      auto src = output.values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
      break;
    }
  }
  emb.input_table = std::move(input);
  emb.output_table = std::move(output);
  return emb;
}

SentenceEmbedding embed_sentence(const LinguisticGraph& graph, const WalkConfig& walk_cfg,
                                 const SkipGramConfig& sg_cfg) {
  auto walks = sample_walks(graph, walk_cfg);
  NodeEmbedding emb = train_skipgram(walks, graph.num_nodes(), sg_cfg);

  std::vector<std::pair<std::size_t, NodeId>> aligned;
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    if (auto t = graph.token_of(v)) aligned.emplace_back(*t, v);
  }
  std::sort(aligned.begin(), aligned.end());

  SentenceEmbedding out;
  out.sentence_id = graph.sentence_id();
  out.rows = Matrix(aligned.size(), sg_cfg.embedding_dim);
  for (std::size_t i = 0; i < aligned.size(); ++i) {
    auto src = emb.vectors.row(aligned[i].second);
    std::copy(src.begin(), src.end(), out.rows.row(i).begin());
    out.token_indices.push_back(aligned[i].first);
  }
  return out;
}

std::vector<SentenceEmbedding> embed_corpus(const std::vector<LinguisticGraph>& graphs,
                                            const WalkConfig& walk_cfg, const SkipGramConfig& sg_cfg,
                                            std::uint64_t global_seed, std::size_t jobs) {
  std::vector<SentenceEmbedding> out(graphs.size());
  run_jobs(graphs.size(), jobs, [&](std::size_t i) {
    const std::uint64_t sentence_seed = derive_seed(global_seed, graphs[i].sentence_id());
    WalkConfig w = walk_cfg;
    w.seed = derive_seed(sentence_seed, std::string_view("walks"));
    SkipGramConfig s = sg_cfg;
    s.seed = derive_seed(sentence_seed, std::string_view("skipgram"));
    out[i] = embed_sentence(graphs[i], w, s);
  });
  return out;
}

}  // namespace gp
