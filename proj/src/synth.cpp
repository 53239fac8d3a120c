#include "graphprobe/synth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "graphprobe/error.hpp"
#include "graphprobe/mi_estimator.hpp"

namespace gp {

namespace {

std::size_t sample_weighted(const std::vector<double>& w, std::size_t n, Rng& rng) {
  if (w.empty()) return rng.below(n);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return w.size() - 1;
}

void check_weights(const std::vector<double>& w, std::size_t n, const char* what) {
  if (w.empty()) return;
  if (w.size() != n) throw UsageError(std::string(what) + " weights must match the label count");
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw UsageError(std::string(what) + " weights must be non-negative");
    total += x;
  }
  if (!(total > 0.0)) throw UsageError(std::string(what) + " weights must not all be zero");
}

LinguisticGraph build(const std::string& sid, std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& pairs,
                      Rng& rng, const LabelPalette& palette) {
  std::vector<Node> nodes;
  std::vector<std::optional<std::size_t>> align;
  for (NodeId v = 0; v < n; ++v) {
    nodes.push_back({v, palette.sample_node_label(rng)});
    align.emplace_back(v);
  }
  std::vector<Edge> edges;
  for (const auto& [u, v] : pairs) edges.push_back({std::min(u, v), std::max(u, v), palette.sample_edge_label(rng)});
  return LinguisticGraph(sid, n, std::move(nodes), std::move(edges), std::move(align));
}

}  // namespace

void LabelPalette::validate() const {
  if (node_labels.empty()) throw UsageError("palette needs at least one node label");
  if (edge_labels.empty()) throw UsageError("palette needs at least one edge label");
  check_weights(node_weights, node_labels.size(), "node label");
  check_weights(edge_weights, edge_labels.size(), "edge label");
}

std::string LabelPalette::sample_node_label(Rng& rng) const {
  return node_labels[sample_weighted(node_weights, node_labels.size(), rng)];
}

std::string LabelPalette::sample_edge_label(Rng& rng) const {
  return edge_labels[sample_weighted(edge_weights, edge_labels.size(), rng)];
}

std::string to_string(GraphKind k) {
  switch (k) {
    case GraphKind::RandomTree:
      return "uniform-random-tree";
    case GraphKind::Star:
      return "star";
    case GraphKind::Path:
      return "path";
    case GraphKind::ErdosRenyi:
      return "erdos-renyi-connected";
  }
  return "uniform-random-tree";
}

GraphKind graph_kind_from_string(const std::string& s) {
  if (s == "uniform-random-tree") return GraphKind::RandomTree;
  if (s == "star") return GraphKind::Star;
  if (s == "path") return GraphKind::Path;
  if (s == "erdos-renyi-connected") return GraphKind::ErdosRenyi;
  throw UsageError("unknown graph kind '" + s + "'");
}

std::string to_string(Dependence d) {
  switch (d) {
    case Dependence::InvertibleLinear:
      return "invertible-linear";
    case Dependence::NoisyLinear:
      return "noisy-linear";
    case Dependence::Independent:
      return "independent";
    case Dependence::Mixture:
      return "mixture";
  }
  return "invertible-linear";
}

Dependence dependence_from_string(const std::string& s) {
  if (s == "invertible-linear") return Dependence::InvertibleLinear;
  if (s == "noisy-linear") return Dependence::NoisyLinear;
  if (s == "independent") return Dependence::Independent;
  if (s == "mixture") return Dependence::Mixture;
  throw UsageError("unknown dependence mode '" + s + "'");
}

LinguisticGraph gen_random_tree(std::size_t n, Rng& rng, const LabelPalette& palette, const std::string& sentence_id) {
  if (n < 2) throw UsageError("a random tree needs at least 2 nodes");
  std::vector<std::pair<NodeId, NodeId>> pairs;
  if (n == 2) {
    pairs.emplace_back(0, 1);
    return build(sentence_id, n, pairs, rng, palette);
  }
  std::vector<NodeId> seq(n - 2);
  for (auto& s : seq) s = rng.below(n);
  std::vector<std::size_t> degree(n, 1);
  for (NodeId s : seq) ++degree[s];
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> leaves;
  for (NodeId v = 0; v < n; ++v) {
    if (degree[v] == 1) leaves.push(v);
  }
  for (NodeId s : seq) {
    const NodeId leaf = leaves.top();
    leaves.pop();
    pairs.emplace_back(leaf, s);
    if (--degree[s] == 1) leaves.push(s);
  }
  const NodeId a = leaves.top();
  leaves.pop();
  pairs.emplace_back(a, leaves.top());
  return build(sentence_id, n, pairs, rng, palette);
}

LinguisticGraph gen_star(std::size_t n, Rng& rng, const LabelPalette& palette, const std::string& sentence_id) {
  if (n < 2) throw UsageError("a star needs at least 2 nodes");
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId v = 1; v < n; ++v) pairs.emplace_back(0, v);
  return build(sentence_id, n, pairs, rng, palette);
}

LinguisticGraph gen_path(std::size_t n, Rng& rng, const LabelPalette& palette, const std::string& sentence_id) {
  if (n < 2) throw UsageError("a path needs at least 2 nodes");
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId v = 1; v < n; ++v) pairs.emplace_back(v - 1, v);
  return build(sentence_id, n, pairs, rng, palette);
}

LinguisticGraph gen_erdos_renyi(std::size_t n, double p, Rng& rng, const LabelPalette& palette,
                                const std::string& sentence_id) {
  if (n < 2) throw UsageError("an Erdos-Renyi graph needs at least 2 nodes");
  if (!(p > 0.0) || p > 1.0) throw UsageError("edge probability must lie in (0, 1]");
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        if (rng.uniform() < p) pairs.emplace_back(u, v);
      }
    }
    // connectivity via union-find
    std::vector<NodeId> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](NodeId x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::size_t components = n;
    for (const auto& [u, v] : pairs) {
      const NodeId a = find(u), b = find(v);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
    if (components == 1) return build(sentence_id, n, pairs, rng, palette);
  }
  throw DataError("could not draw a connected G(" + std::to_string(n) + ", " + std::to_string(p) + ")");
}

void SynthCorpusConfig::validate() const {
  if (n_sentences < 1) throw UsageError("n_sentences must be at least 1");
  if (min_nodes < 2 || max_nodes < min_nodes) throw UsageError("node range must satisfy 2 <= min_nodes <= max_nodes");
  if (dependence_param < 0.0 || dependence_param > 1.0) throw UsageError("dependence_param must lie in [0, 1]");
  if (x_dim < 1) throw UsageError("x_dim must be positive");
  if (linear_noise < 0.0) throw UsageError("linear_noise must be non-negative");
  if ((dependence == Dependence::InvertibleLinear || dependence == Dependence::NoisyLinear ||
       dependence == Dependence::Mixture) &&
      x_dim < skipgram.embedding_dim) {
    throw UsageError("linear dependence needs x_dim >= embedding_dim");
  }
  palette.validate();
  walk.validate();
  skipgram.validate();
}

std::vector<LinguisticGraph> gen_graphs(const SynthCorpusConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, std::string_view("graphs")));
  std::vector<LinguisticGraph> out;
  out.reserve(cfg.n_sentences);
  const int width = static_cast<int>(std::to_string(cfg.n_sentences - 1).size());
  for (std::size_t i = 0; i < cfg.n_sentences; ++i) {
    std::string num = std::to_string(i);
    const std::string sid = "s" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num;
    const std::size_t n = cfg.min_nodes + rng.below(cfg.max_nodes - cfg.min_nodes + 1);
    LinguisticGraph g = [&] {
      switch (cfg.graph_kind) {
        case GraphKind::Star:
          return gen_star(n, rng, cfg.palette, sid);
        case GraphKind::Path:
          return gen_path(n, rng, cfg.palette, sid);
        case GraphKind::ErdosRenyi:
          return gen_erdos_renyi(n, cfg.edge_probability, rng, cfg.palette, sid);
        case GraphKind::RandomTree:
          break;
      }
      return gen_random_tree(n, rng, cfg.palette, sid);
    }();
    if (cfg.unaligned_tokens > 0) {
      // Scatter the node-bearing tokens among the extra ones, keeping order.
      const std::size_t tokens = n + cfg.unaligned_tokens;
      std::vector<std::size_t> slots(tokens);
      std::iota(slots.begin(), slots.end(), 0);
      rng.shuffle(std::span<std::size_t>(slots));
      slots.resize(n);
      std::sort(slots.begin(), slots.end());
      std::vector<std::optional<std::size_t>> align(slots.begin(), slots.end());
      g = LinguisticGraph(sid, tokens, g.nodes(), g.edges(), std::move(align));
    }
    out.push_back(std::move(g));
  }
  return out;
}

Matrix gen_linear_map(std::size_t x_dim, std::size_t z_dim, Rng& rng) {
  if (x_dim < z_dim) throw UsageError("an invertible map needs x_dim >= z_dim");
  Eigen::MatrixXd g(z_dim, z_dim);
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ();
  Matrix a(x_dim, z_dim);
  for (std::size_t i = 0; i < z_dim; ++i) {
    for (std::size_t j = 0; j < z_dim; ++j) a(i, j) = static_cast<float>(q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(z_dim));
  for (std::size_t i = z_dim; i < x_dim; ++i) {
    for (std::size_t j = 0; j < z_dim; ++j) a(i, j) = static_cast<float>(rng.normal() * scale);
  }
  return a;
}

std::vector<SentenceEmbedding> gen_x(const std::vector<LinguisticGraph>& graphs,
                                     const std::vector<SentenceEmbedding>& z, const SynthCorpusConfig& cfg,
                                     std::vector<bool>* linear_branch) {
  if (graphs.size() != z.size()) throw std::invalid_argument("one Z block per graph expected");
  std::vector<Matrix> z_blocks;
  for (const auto& s : z) z_blocks.push_back(s.rows);
  const double sd = std::max(global_stddev(z_blocks), 1e-12);
  const std::size_t z_dim = cfg.skipgram.embedding_dim;

  Matrix a;
  std::vector<float> bias(cfg.x_dim, 0.0f);
  if (cfg.dependence != Dependence::Independent) {
    Rng map_rng(derive_seed(cfg.seed, std::string_view("linear-map")));
    a = gen_linear_map(cfg.x_dim, z_dim, map_rng);
    for (auto& b : bias) b = static_cast<float>((2.0 * map_rng.uniform() - 1.0) * sd);
  }

  std::vector<SentenceEmbedding> out;
  if (linear_branch) linear_branch->assign(graphs.size(), false);
  for (std::size_t s = 0; s < graphs.size(); ++s) {
    const auto& g = graphs[s];
    Rng rng(derive_seed(derive_seed(cfg.seed, std::string_view("x")), g.sentence_id()));
    bool linear = cfg.dependence == Dependence::InvertibleLinear || cfg.dependence == Dependence::NoisyLinear;
    if (cfg.dependence == Dependence::Mixture) linear = rng.uniform() < cfg.dependence_param;
    if (linear_branch) (*linear_branch)[s] = linear;

    SentenceEmbedding x;
    x.sentence_id = g.sentence_id();
    x.rows = Matrix(g.num_tokens(), cfg.x_dim);
    for (std::size_t t = 0; t < g.num_tokens(); ++t) x.token_indices.push_back(t);
    const auto& zt = z[s].token_indices;
    for (std::size_t t = 0; t < g.num_tokens(); ++t) {
      auto row = x.rows.row(t);
      auto it = std::find(zt.begin(), zt.end(), t);
      if (!linear || it == zt.end()) {
        for (float& v : row) v = static_cast<float>(rng.normal() * sd);
        continue;
      }
      auto zrow = z[s].rows.row(static_cast<std::size_t>(it - zt.begin()));
      for (std::size_t i = 0; i < cfg.x_dim; ++i) {
        double acc = bias[i];
        for (std::size_t j = 0; j < z_dim; ++j) acc += static_cast<double>(a(i, j)) * zrow[j];
        row[i] = static_cast<float>(acc + cfg.linear_noise * sd * rng.normal());
      }
      if (cfg.dependence == Dependence::NoisyLinear) mix_with_noise(row, 1.0 - cfg.dependence_param, rng);
    }
    out.push_back(std::move(x));
  }
  return out;
}

SynthCorpus gen_corpus(const SynthCorpusConfig& cfg, std::size_t jobs) {
  SynthCorpus c;
  c.graphs = gen_graphs(cfg);
  c.z = embed_corpus(c.graphs, cfg.walk, cfg.skipgram, derive_seed(cfg.seed, std::string_view("embed")), jobs);
  c.x = gen_x(c.graphs, c.z, cfg, &c.linear_branch);
  return c;
}

void GaussianPairConfig::validate() const {
  if (dim < 1) throw UsageError("gaussian dim must be positive");
  if (!(std::abs(rho) < 1.0)) throw UsageError("gaussian correlation must satisfy |rho| < 1");
  if (n_samples < 2) throw UsageError("gaussian n_samples must be at least 2");
  if (block_size < 2) throw UsageError("gaussian block_size must be at least 2");
}

double GaussianPairConfig::true_mi() const {
  return -0.5 * static_cast<double>(dim) * std::log(1.0 - rho * rho);
}

GaussianPairs gen_gaussian_pairs(const GaussianPairConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const double c = std::sqrt(1.0 - cfg.rho * cfg.rho);
  GaussianPairs out;
  const std::size_t blocks = (cfg.n_samples + cfg.block_size - 1) / cfg.block_size;
  const int width = static_cast<int>(std::to_string(blocks - 1).size());
  std::size_t done = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t rows = std::min(cfg.block_size, cfg.n_samples - done);
    if (rows < 2) break;  // a 1-row tail cannot form a derangement
    std::string num = std::to_string(b);
    const std::string sid = "g" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num;
    SentenceEmbedding x{sid, Matrix(rows, cfg.dim), {}};
    SentenceEmbedding z{sid, Matrix(rows, cfg.dim), {}};
    for (std::size_t r = 0; r < rows; ++r) {
      x.token_indices.push_back(r);
      z.token_indices.push_back(r);
      for (std::size_t d = 0; d < cfg.dim; ++d) {
        const double u = rng.normal();
        const double e = rng.normal();
        x.rows(r, d) = static_cast<float>(u);
        z.rows(r, d) = static_cast<float>(cfg.rho * u + c * e);
      }
    }
    done += rows;
    out.x.push_back(std::move(x));
    out.z.push_back(std::move(z));
  }
  return out;
}

}  // namespace gp
