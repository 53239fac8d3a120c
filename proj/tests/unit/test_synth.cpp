#include <doctest.h>

#include <map>
#include <numeric>

#include "fixtures.hpp"
#include "graphprobe/corpus_io.hpp"
#include "graphprobe/synth.hpp"

using namespace gp;

namespace {

// true when the undirected edge set on n nodes is a spanning tree
bool is_tree(const LinguisticGraph& g) {
  const std::size_t n = g.num_nodes();
  if (g.edges().size() != n - 1) return false;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& e : g.edges()) {
    const auto a = find(e.u), b = find(e.v);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("random trees") {
    Rng rng(1);
    auto two = gen_random_tree(2, rng);
    REQUIRE(two.edges().size() == 1);
    CHECK(two.has_edge(0, 1));
    for (int i = 0; i < 50; ++i) {
      auto g = gen_random_tree(8, rng);
      CHECK(is_tree(g));
      for (std::size_t v = 0; v < 8; ++v) CHECK(g.token_of(v) == std::optional<std::size_t>(v));
      for (const auto& e : g.edges()) CHECK(e.label.has_value());
    }
  }

  TEST_CASE("3-node trees are uniform over the 3 labeled trees") {
    Rng rng(2);
    std::map<std::size_t, int> centers;  // the degree-2 node identifies the tree
    const int n = 3000;
    for (int i = 0; i < n; ++i) {
      auto g = gen_random_tree(3, rng);
      for (std::size_t v = 0; v < 3; ++v) {
        if (g.neighbors(v).size() == 2) ++centers[v];
      }
    }
    const double sd = std::sqrt(n * (1.0 / 3) * (2.0 / 3));
    REQUIRE(centers.size() == 3);
    for (auto [v, c] : centers) CHECK(std::abs(c - n / 3.0) < 3 * sd);
  }

  TEST_CASE("other graph kinds") {
    Rng rng(3);
    auto star = gen_star(6, rng);
    CHECK(star.neighbors(0).size() == 5);
    auto path = gen_path(6, rng);
    CHECK(is_tree(path));
    for (std::size_t v = 0; v + 1 < 6; ++v) CHECK(path.has_edge(v, v + 1));
    for (int i = 0; i < 20; ++i) {
      auto er = gen_erdos_renyi(10, 0.15, rng);  // constructor enforces connectivity
      CHECK(er.num_nodes() == 10);
      CHECK(er.edges().size() >= 9);
    }
  }

  TEST_CASE("label weights are respected") {
    LabelPalette p;
    p.edge_labels = {"a", "b"};
    p.edge_weights = {1.0, 0.0};
    Rng rng(4);
    for (int i = 0; i < 100; ++i) CHECK(p.sample_edge_label(rng) == "a");
    p.edge_weights = {1.0};
    CHECK_THROWS(p.validate());
  }

  TEST_CASE("generated corpora round-trip through validation") {
    for (auto kind : {GraphKind::RandomTree, GraphKind::Star, GraphKind::Path, GraphKind::ErdosRenyi}) {
      auto cfg = fx::tiny_corpus(10, 5);
      cfg.graph_kind = kind;
      auto graphs = gen_graphs(cfg);
      std::string text;
      for (const auto& g : graphs) text += graph_to_json_line(g) + "\n";
      CHECK(parse_corpus(text).graphs == graphs);
    }
  }

  TEST_CASE("corpus generation is deterministic and job-invariant") {
    auto cfg = fx::tiny_corpus(8, 6);
    auto a = gen_corpus(cfg, 1);
    auto b = gen_corpus(cfg, 4);
    CHECK(a.graphs == b.graphs);
    for (std::size_t i = 0; i < a.z.size(); ++i) {
      CHECK(a.z[i].rows.storage() == b.z[i].rows.storage());
      CHECK(a.x[i].rows.storage() == b.x[i].rows.storage());
    }
  }

  TEST_CASE("dependence modes shape X") {
    auto cfg = fx::tiny_corpus(30, 7);
    cfg.dependence = Dependence::Mixture;
    auto c = gen_corpus(cfg);
    const auto linear = std::count(c.linear_branch.begin(), c.linear_branch.end(), true);
    CHECK(linear > 5);
    CHECK(linear < 25);
    cfg.dependence = Dependence::Independent;
    auto ind = gen_corpus(cfg);
    CHECK(ind.x[0].rows.cols() == cfg.x_dim);
    CHECK(dependence_from_string(to_string(Dependence::NoisyLinear)) == Dependence::NoisyLinear);
    CHECK(graph_kind_from_string("erdos-renyi-connected") == GraphKind::ErdosRenyi);
  }

  TEST_CASE("linear map has an orthogonal top block") {
    Rng rng(8);
    Matrix a = gen_linear_map(10, 4, rng);
    REQUIRE(a.rows() == 10);
    REQUIRE(a.cols() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        double dot = 0;
        for (std::size_t k = 0; k < 4; ++k) dot += double(a(i, k)) * a(j, k);
        CHECK(dot == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-5).scale(1.0));
      }
    }
  }

  TEST_CASE("Gaussian pairs: closed form and sample correlation") {
    GaussianPairConfig cfg;
    cfg.rho = 0.9;
    cfg.seed = 9;
    CHECK(cfg.true_mi() == doctest::Approx(-2.0 * std::log(0.19)));
    cfg.rho = 0.0;
    CHECK(cfg.true_mi() == 0.0);
    cfg.rho = 0.9;
    auto p = gen_gaussian_pairs(cfg);
    CHECK(p.x.size() == 40);
    std::vector<std::vector<double>> xs(4), zs(4);
    for (std::size_t b = 0; b < p.x.size(); ++b) {
      for (std::size_t r = 0; r < p.x[b].rows.rows(); ++r) {
        for (std::size_t d = 0; d < 4; ++d) {
          xs[d].push_back(p.x[b].rows(r, d));
          zs[d].push_back(p.z[b].rows(r, d));
        }
      }
    }
    CHECK(xs[0].size() == 10000);
    for (std::size_t d = 0; d < 4; ++d) CHECK(std::abs(pearson(xs[d], zs[d]) - 0.9) < 0.03);
    CHECK(std::abs(pearson(xs[0], zs[1])) < 0.03);
    auto again = gen_gaussian_pairs(cfg);
    CHECK(again.x[3].rows.storage() == p.x[3].rows.storage());
    cfg.rho = 1.0;
    CHECK_THROWS(cfg.validate());
  }
}
