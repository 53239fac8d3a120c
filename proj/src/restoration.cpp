#include "graphprobe/restoration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "graphprobe/error.hpp"
#include "graphprobe/parallel.hpp"
#include "graphprobe/probe_metrics.hpp"
#include "graphprobe/rng.hpp"

namespace gp {

std::string to_string(InputSource s) {
  switch (s) {
    case InputSource::GraphEmbeddings:
      return "graph-embeddings";
    case InputSource::WordRepresentations:
      return "word-representations";
    case InputSource::PerturbedWordRepresentations:
      return "perturbed-word-representations";
  }
  return "graph-embeddings";
}

InputSource input_source_from_string(const std::string& s) {
  if (s == "graph-embeddings") return InputSource::GraphEmbeddings;
  if (s == "word-representations") return InputSource::WordRepresentations;
  if (s == "perturbed-word-representations") return InputSource::PerturbedWordRepresentations;
  throw UsageError("unknown input source '" + s + "'");
}

void LinkPredictorConfig::validate() const {
  if (hidden_layers > 5) throw UsageError("link predictor hidden_layers must lie in [0, 5]");
  if (hidden_dim < 1) throw UsageError("link predictor hidden_dim must be positive");
  if (!(learning_rate > 0.0)) throw UsageError("link predictor learning_rate must be positive");
  if (batch_size < 1) throw UsageError("link predictor batch_size must be positive");
}

RestorationData restoration_data(const std::vector<LinguisticGraph>& graphs, const EmbeddingStore& store) {
  RestorationData out;
  for (const auto& g : graphs) {
    const std::string& sid = g.sentence_id();
    if (!store.contains(sid)) {
      out.warnings.push_back("sentence '" + sid + "' has no embedding rows; skipped");
      continue;
    }
    SentenceEmbedding s = store.sentence(sid);
    std::vector<NodeId> nodes;
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < s.token_indices.size(); ++r) {
      for (NodeId v = 0; v < g.num_nodes(); ++v) {
        if (g.token_of(v) == s.token_indices[r]) {
          nodes.push_back(v);
          keep.push_back(r);
          break;
        }
      }
    }
    out.graphs.push_back(g);
    out.rows.push_back(s.rows.gather_rows(keep));
    out.row_nodes.push_back(std::move(nodes));
  }
  if (out.graphs.empty()) throw DataError("restoration: no sentence has embedding rows");
  return out;
}

Split split_sentences(std::size_t n, std::uint64_t seed, double test_fraction) {
  if (n < 2) throw DataError("train/test split needs at least 2 sentences");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, std::string_view("split")));
  rng.shuffle(std::span<std::size_t>(idx));
  std::size_t n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  Split s;
  s.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

namespace {

struct PairRef {
  std::size_t sentence;
  std::size_t i;
  std::size_t j;
  float label;
};

Matrix pair_features(const std::vector<Matrix>& rows, std::span<const PairRef> batch, bool swap) {
  const std::size_t d = rows[batch.front().sentence].cols();
  Matrix f(batch.size(), 2 * d);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& p = batch[b];
    const auto& m = rows[p.sentence];
    auto a = m.row(swap ? p.j : p.i);
    auto c = m.row(swap ? p.i : p.j);
    auto dst = f.row(b);
    std::copy(a.begin(), a.end(), dst.begin());
    std::copy(c.begin(), c.end(), dst.begin() + static_cast<std::ptrdiff_t>(d));
  }
  return f;
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

MlpSpec predictor_spec(std::size_t row_dim, const LinkPredictorConfig& cfg) {
  return {2 * row_dim, std::vector<std::size_t>(cfg.hidden_layers, cfg.hidden_dim), 1};
}

std::size_t row_width(const RestorationData& data) {
  for (const auto& m : data.rows) {
    if (m.rows() > 0) return m.cols();
  }
  throw DataError("restoration: every sentence has zero rows");
}

}  // namespace

LinkPredictor train_link_predictor(const RestorationData& data, std::span<const std::size_t> sentences,
                                   const LinkPredictorConfig& cfg) {
  cfg.validate();
  std::vector<PairRef> pairs;
  std::size_t positives = 0;
  for (std::size_t s : sentences) {
    const auto& g = data.graphs.at(s);
    const auto& nodes = data.row_nodes[s];
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (std::size_t j = i + 1; j < nodes.size(); ++j) {
        const bool edge = g.has_edge(nodes[i], nodes[j]);
        positives += edge;
        pairs.push_back({s, i, j, edge ? 1.0f : 0.0f});
      }
    }
  }
  if (positives == 0) throw DataError("link prediction: training sentences contain no edge between embedded nodes");
  if (positives == pairs.size()) throw DataError("link prediction: training sentences contain no non-edge pair");

  Rng init_rng(derive_seed(cfg.seed, std::string_view("init")));
  Rng order_rng(derive_seed(cfg.seed, std::string_view("order")));
  LinkPredictor p;
  p.config = cfg;
  p.mlp = MlpParams::init(predictor_spec(row_width(data), cfg), init_rng);
  Optimizer opt({cfg.optimizer});

  std::size_t flat = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(std::span<PairRef>(pairs));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < pairs.size(); start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, pairs.size() - start);
      std::span<const PairRef> batch(pairs.data() + start, b);
      MlpCache cache;
      Matrix out = forward(p.mlp, pair_features(data.rows, batch, false), &cache);
      Matrix grad(b, 1);
      for (std::size_t k = 0; k < b; ++k) {
        const double s = out(k, 0);
        const double y = batch[k].label;
        loss_sum += softplus(s) - y * s;
        grad(k, 0) = static_cast<float>((sigmoid(s) - y) / static_cast<double>(b));
      }
      MlpGradients g = backward(p.mlp, cache, grad);
      if (opt.step(p.mlp.tensors(), g.tensors(), cfg.learning_rate)) ++p.mlp.version;
    }
    const double loss = loss_sum / static_cast<double>(pairs.size());
    if (!std::isfinite(loss) || !p.mlp.all_finite()) {
      throw NumericalError("link predictor diverged at epoch " + std::to_string(epoch));
    }
    p.train_loss.push_back(loss);
    p.epochs_run = epoch + 1;
    if (cfg.plateau_tolerance > 0.0 && p.train_loss.size() >= 2) {
      const double gain = p.train_loss[p.train_loss.size() - 2] - loss;
      flat = gain < cfg.plateau_tolerance ? flat + 1 : 0;
      if (flat >= cfg.plateau_patience) {
        p.early_stopped = true;
        break;
      }
    }
  }
  return p;
}

std::vector<double> score_pairs(const LinkPredictor& p, const Matrix& rows,
                                std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  if (pairs.empty()) return out;
  std::vector<Matrix> one{rows};
  std::vector<PairRef> refs;
  refs.reserve(pairs.size());
  for (const auto& [i, j] : pairs) refs.push_back({0, i, j, 0.0f});
  Matrix s = forward(p.mlp, pair_features(one, refs, false));
  if (p.config.symmetric) {
    Matrix t = forward(p.mlp, pair_features(one, refs, true));
    for (std::size_t k = 0; k < refs.size(); ++k) out.push_back(std::max(s(k, 0), t(k, 0)));
  } else {
    for (std::size_t k = 0; k < refs.size(); ++k) out.push_back(s(k, 0));
  }
  return out;
}

double auc(std::span<const ScoredPair> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a].score < scores[b].score; });
  double pos_rank_sum = 0.0;
  std::size_t pos = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]].score == scores[order[i]].score) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k) {
      if (scores[order[k]].positive) {
        pos_rank_sum += avg_rank;
        ++pos;
      }
    }
    i = j + 1;
  }
  const std::size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) throw DataError("AUC needs at least one positive and one negative");
  const double p = static_cast<double>(pos);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

AucReport per_relation_auc(const LinkPredictor& p, const RestorationData& data, std::span<const std::size_t> sentences) {
  std::vector<ScoredPair> all;
  std::vector<double> negatives;
  std::map<std::string, std::vector<double>> positives_by_label;
  std::set<std::string> labels;
  for (const auto& g : data.graphs) {
    for (const auto& e : g.edges()) {
      if (e.label) labels.insert(*e.label);
    }
  }
  for (std::size_t s : sentences) {
    const auto& g = data.graphs.at(s);
    const auto& nodes = data.row_nodes[s];
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (std::size_t j = i + 1; j < nodes.size(); ++j) pairs.emplace_back(i, j);
    }
    const auto scores = score_pairs(p, data.rows[s], pairs);
    std::map<std::pair<NodeId, NodeId>, const Edge*> edge_of;
    for (const auto& e : g.edges()) edge_of[{std::min(e.u, e.v), std::max(e.u, e.v)}] = &e;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const NodeId a = nodes[pairs[k].first];
      const NodeId b = nodes[pairs[k].second];
      auto it = edge_of.find({std::min(a, b), std::max(a, b)});
      const bool edge = it != edge_of.end();
      all.push_back({scores[k], edge});
      if (!edge) {
        negatives.push_back(scores[k]);
      } else if (it->second->label) {
        positives_by_label[*it->second->label].push_back(scores[k]);
      }
    }
  }
  AucReport rep;
  rep.config = p.config;
  rep.depth = p.config.hidden_layers;
  rep.train_loss = p.train_loss;
  rep.epochs_run = p.epochs_run;
  rep.global_auc = auc(all);
  rep.negatives = negatives.size();
  rep.positives = all.size() - negatives.size();
  for (const auto& label : labels) {
    auto it = positives_by_label.find(label);
    if (it == positives_by_label.end()) {
      rep.notes.push_back("label '" + label + "' has no test positives; omitted");
      continue;
    }
    std::vector<ScoredPair> sub;
    sub.reserve(it->second.size() + negatives.size());
    for (double s : it->second) sub.push_back({s, true});
    for (double s : negatives) sub.push_back({s, false});
    rep.per_label_auc[label] = auc(sub);
    rep.label_counts[label] = it->second.size();
  }
  return rep;
}

std::vector<AucReport> evaluate_restoration(const RestorationData& data, const std::vector<std::size_t>& depths,
                                            const LinkPredictorConfig& cfg, std::size_t jobs) {
  const Split split = split_sentences(data.size(), cfg.seed);
  for (auto d : depths) {
    if (d > 5) throw UsageError("depth " + std::to_string(d) + " outside [0, 5]");
  }
  std::vector<AucReport> out(depths.size());
  run_jobs(depths.size(), jobs, [&](std::size_t k) {
    LinkPredictorConfig c = cfg;
    c.hidden_layers = depths[k];
    c.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(k));
    const LinkPredictor p = train_link_predictor(data, split.train, c);
    out[k] = per_relation_auc(p, data, split.test);
    out[k].notes.insert(out[k].notes.begin(), data.warnings.begin(), data.warnings.end());
  });
  return out;
}

AucReport perturbed_accuracy_probe(const RestorationData& data, const std::vector<std::vector<std::size_t>>& targets,
                                   double rho, const LinkPredictorConfig& cfg) {
  RestorationData noisy = data;
  noisy.rows = perturb_embeddings(data.rows, targets, rho, derive_seed(cfg.seed, std::string_view("perturb")));
  LinkPredictorConfig c = cfg;
  c.hidden_layers = 5;
  c.input_source = InputSource::PerturbedWordRepresentations;
  const Split split = split_sentences(data.size(), cfg.seed);
  const LinkPredictor p = train_link_predictor(noisy, split.train, c);
  AucReport rep = per_relation_auc(p, noisy, split.test);
  rep.notes.insert(rep.notes.begin(), data.warnings.begin(), data.warnings.end());
  return rep;
}

}  // namespace gp
