#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "graphprobe/embedding_io.hpp"
#include "graphprobe/mi_estimator.hpp"
#include "graphprobe/mlp.hpp"
#include "graphprobe/probe_metrics.hpp"
#include "graphprobe/synth.hpp"

namespace fx {

/// Small, fast synthetic corpus settings.
inline gp::SynthCorpusConfig tiny_corpus(std::size_t n_sentences, std::uint64_t seed) {
  gp::SynthCorpusConfig c;
  c.n_sentences = n_sentences;
  c.min_nodes = 6;
  c.max_nodes = 10;
  c.x_dim = 16;
  c.walk.walks_per_node = 20;
  c.skipgram.embedding_dim = 16;
  c.skipgram.epochs = 100;
  c.seed = seed;
  return c;
}

inline gp::CriticConfig fast_critic(std::uint64_t seed = 1) {
  gp::CriticConfig c;
  c.projection_dim = 16;
  c.head_hidden_dims = {16};
  c.epochs = 8;
  c.smoothing_window = 3;
  c.learning_rate = 1e-3;
  c.seed = seed;
  return c;
}

inline std::vector<gp::Matrix> blocks(const std::vector<gp::SentenceEmbedding>& s) {
  std::vector<gp::Matrix> out;
  for (const auto& e : s) out.push_back(e.rows);
  return out;
}

inline std::vector<gp::SentencePair> pairs(const std::vector<gp::Matrix>& x, const std::vector<gp::Matrix>& z) {
  std::vector<gp::SentencePair> out;
  for (std::size_t i = 0; i < x.size(); ++i) out.push_back({x[i], z[i]});
  return out;
}

inline gp::AlignedCorpus aligned(const gp::SynthCorpus& c) {
  return gp::align_corpus(c.graphs, gp::EmbeddingStore::from_sentences(c.x), gp::EmbeddingStore::from_sentences(c.z));
}

inline gp::Matrix random_matrix(std::size_t r, std::size_t c, gp::Rng& rng, double scale = 1.0) {
  gp::Matrix m(r, c);
  for (float& v : m.values()) v = static_cast<float>(rng.normal() * scale);
  return m;
}

/// Dense network evaluated in double precision from float parameters.
struct RefMlp {
  struct Layer {
    std::vector<std::vector<double>> w;  // in x out
    std::vector<double> b;
  };
  std::vector<Layer> layers;

  static RefMlp from(const gp::MlpParams& p) {
    RefMlp r;
    for (const auto& l : p.layers) {
      Layer d;
      d.w.assign(l.weight.rows(), std::vector<double>(l.weight.cols()));
      for (std::size_t i = 0; i < l.weight.rows(); ++i) {
        for (std::size_t j = 0; j < l.weight.cols(); ++j) d.w[i][j] = l.weight(i, j);
      }
      d.b.assign(l.bias.begin(), l.bias.end());
      r.layers.push_back(std::move(d));
    }
    return r;
  }

  std::vector<double> row(std::vector<double> x) const {
    for (std::size_t k = 0; k < layers.size(); ++k) {
      const auto& l = layers[k];
      std::vector<double> y(l.b);
      for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < y.size(); ++j) y[j] += x[i] * l.w[i][j];
      }
      if (k + 1 < layers.size()) {
        for (double& v : y) v = std::max(0.0, v);
      }
      x = std::move(y);
    }
    return x;
  }

  /// Parameter views in tensor order (W0, b0, W1, b1, ...), flattened.
  std::vector<double*> slots(std::size_t tensor) {
    std::vector<double*> out;
    auto& l = layers[tensor / 2];
    if (tensor % 2 == 0) {
      for (auto& r : l.w) {
        for (double& v : r) out.push_back(&v);
      }
    } else {
      for (double& v : l.b) out.push_back(&v);
    }
    return out;
  }
};

inline std::vector<double> to_double(std::span<const float> v) { return {v.begin(), v.end()}; }

/// ||a - b|| / max(||a||, ||b||, 1e-12)
inline double rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(d) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

/// Fresh scratch directory under the system temp dir, removed on scope exit.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / ("graphprobe_test_" + name);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& f) const { return path / f; }
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace fx
