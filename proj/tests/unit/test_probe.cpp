#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "graphprobe/error.hpp"
#include "graphprobe/probe_metrics.hpp"

using namespace gp;

namespace {

ProbeConfig small_probe(std::uint64_t seed = 1) {
  ProbeConfig p;
  p.critic = fx::fast_critic();
  p.repeats = 2;
  p.seed = seed;
  return p;
}

}  // namespace

TEST_SUITE("probe") {
  TEST_CASE("MIG by hand") {
    CHECK(mig(2.0, {4.001, 0.001}) == doctest::Approx(0.49975));
    CHECK(mig(4.001, {4.001, 0.001}) == doctest::Approx(1.0));
    CHECK(mig(0.001, {4.001, 0.001}) == 0.0);
    CHECK(mig(5.0, {4.0, 0.0}) == doctest::Approx(1.25));  // not clamped
    CHECK_THROWS_AS(mig(1.0, {1.0, 1.0}), DataError);
    CHECK_THROWS_AS(mig(1.0, {0.5, 1.0}), DataError);
    CHECK(mig(1.0, {3.0, 0.5}) < mig(1.1, {3.0, 0.5}));
  }

  TEST_CASE("MIL by hand") {
    CHECK(mil(1.2, 2.0, 0.0) == doctest::Approx(0.4));
    CHECK(mil(2.0, 2.0, 0.0) == 0.0);
    CHECK(mil(0.1, 2.0, 0.1) == doctest::Approx(1.0));
    CHECK_THROWS_AS(mil(0.5, 0.1, 0.1), DataError);
    CHECK(mil(1.0, 2.0, 0.0) > mil(1.1, 2.0, 0.0));
  }

  TEST_CASE("perturbation: rho 0 identity, locality, commutation") {
    Rng rng(1);
    std::vector<Matrix> z{fx::random_matrix(5, 4, rng), fx::random_matrix(3, 4, rng)};
    RowTargets all{{0, 1, 2, 3, 4}, {0, 1, 2}};
    auto same = perturb_embeddings(z, all, 0.0, 7);
    CHECK(same[0].storage() == z[0].storage());
    CHECK(same[1].storage() == z[1].storage());

    RowTargets one{{2}, {}};
    auto p = perturb_embeddings(z, one, 0.5, 7);
    for (std::size_t r = 0; r < 5; ++r) {
      const bool equal = std::equal(p[0].row(r).begin(), p[0].row(r).end(), z[0].row(r).begin());
      CHECK(equal == (r != 2));
    }
    CHECK(p[1].storage() == z[1].storage());

    RowTargets a{{0, 3}, {1}}, b{{1}, {0, 2}}, ab{{0, 1, 3}, {0, 1, 2}};
    auto first = perturb_embeddings(z, a, 0.7, 11);
    auto both = perturb_embeddings(first, b, 0.7, 11);
    auto once = perturb_embeddings(z, ab, 0.7, 11);
    CHECK(both[0].storage() == once[0].storage());
    CHECK(both[1].storage() == once[1].storage());

    CHECK_THROWS(perturb_embeddings(z, RowTargets{{9}, {}}, 0.5, 1));
    CHECK_THROWS(perturb_embeddings(z, one, 1.5, 1));
  }

  TEST_CASE("sample statistics") {
    const std::vector<double> v{1, 2, 3, 4};
    auto s = summarize(v);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
    const std::vector<double> one{3};
    CHECK(summarize(one).stddev == 0.0);
  }

  TEST_CASE("equalized target sets share the smallest count and stay subsets") {
    std::vector<RowTargets> sets{{{0, 1, 2}, {0, 1}}, {{3}, {2}}, {{0, 1, 2, 3}, {}}};
    auto eq = equalize_targets(sets, 5);
    REQUIRE(eq.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(count_targets(eq[k]) == 2);
      for (std::size_t s = 0; s < 2; ++s) {
        std::set<std::size_t> orig(sets[k][s].begin(), sets[k][s].end());
        for (auto r : eq[k][s]) CHECK(orig.count(r) == 1);
      }
    }
    CHECK(equalize_targets(sets, 5) == eq);
  }

  TEST_CASE("alignment and target resolution") {
    auto sc = gen_corpus(fx::tiny_corpus(5, 2));
    auto corpus = fx::aligned(sc);
    REQUIRE(corpus.size() == 5);
    for (std::size_t s = 0; s < 5; ++s) {
      CHECK(corpus.x[s].rows() == corpus.z[s].rows());
      CHECK(corpus.row_nodes[s].size() == corpus.z[s].rows());
    }
    auto every = resolve_targets(corpus, SubgraphSelector::every_node());
    CHECK(count_targets(every) == [&] {
      std::size_t n = 0;
      for (const auto& z : corpus.z) n += z.rows();
      return n;
    }());
    std::map<std::string, std::vector<NodeId>> nodes{{"*", {0}}, {corpus.graphs[1].sentence_id(), {1, 2}}};
    auto picked = resolve_targets(corpus, nodes);
    CHECK(picked[0].size() == 1);
    CHECK(picked[1].size() == 2);

    // X lacking a sentence names it
    auto x = sc.x;
    const std::string gone = x[3].sentence_id;
    x.erase(x.begin() + 3);
    try {
      align_corpus(sc.graphs, EmbeddingStore::from_sentences(x), EmbeddingStore::from_sentences(sc.z));
      FAIL("expected a DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find(gone) != std::string::npos);
    }
    // Z lacking a sentence drops it with a warning
    auto z = sc.z;
    z.erase(z.begin());
    auto partial = align_corpus(sc.graphs, EmbeddingStore::from_sentences(sc.x), EmbeddingStore::from_sentences(z));
    CHECK(partial.size() == 4);
    CHECK_FALSE(partial.warnings.empty());
  }

  TEST_CASE("unaligned tokens are dropped from X") {
    auto cfg = fx::tiny_corpus(4, 3);
    cfg.unaligned_tokens = 2;
    auto sc = gen_corpus(cfg);
    CHECK(sc.x[0].rows.rows() == sc.z[0].rows.rows() + 2);
    auto corpus = fx::aligned(sc);
    CHECK(corpus.x[0].rows() == corpus.z[0].rows());
  }

  TEST_CASE("repeat seeds are role- and index-specific") {
    CHECK(repeat_seed(1, "xz", 0) != repeat_seed(1, "xz", 1));
    CHECK(repeat_seed(1, "xz", 0) != repeat_seed(1, "null", 0));
    CHECK(repeat_seed(1, "self", 3) == repeat_seed(1, "self", 3));
  }

  TEST_CASE("empty selector: MIL exactly 0 and flagged degenerate") {
    auto corpus = fx::aligned(gen_corpus(fx::tiny_corpus(10, 4)));
    auto cfg = small_probe();
    auto report = run_wormseye(corpus, SubgraphSelector::node_label("NOPE"), cfg);
    CHECK(report.kind == "MIL");
    CHECK(report.degenerate);
    CHECK(report.targeted_rows == 0);
    REQUIRE(report.values.size() == 2);
    for (double v : report.values) CHECK(v == 0.0);
  }

  TEST_CASE("rho 0 on every node replays the baseline") {
    auto corpus = fx::aligned(gen_corpus(fx::tiny_corpus(10, 5)));
    auto cfg = small_probe();
    cfg.rho = 0.0;
    auto report = run_wormseye(corpus, SubgraphSelector::every_node(), cfg);
    for (const auto& r : report.repeats) CHECK(r.mi_perturbed == r.mi_xz);
    for (double v : report.values) CHECK(v == 0.0);
  }

  TEST_CASE("birdseye is deterministic across job counts and consistent") {
    auto corpus = fx::aligned(gen_corpus(fx::tiny_corpus(10, 6)));
    auto cfg = small_probe(3);
    auto a = run_birdseye(corpus, cfg);
    cfg.jobs = 3;
    auto b = run_birdseye(corpus, cfg);
    CHECK(a.values == b.values);
    auto s = summarize(a.values);
    CHECK(a.mean == s.mean);
    CHECK(a.stddev == s.stddev);
    for (const auto& r : a.repeats) {
      CHECK(r.value == mig(r.mi_xz, {r.self_mi, r.null_mi}));
      CHECK(r.seed == repeat_seed(3, "xz", r.repeat));
    }
  }

  TEST_CASE("noise sweep starts at 100 percent") {
    auto z = fx::blocks(gen_corpus(fx::tiny_corpus(10, 7)).z);
    auto cfg = small_probe();
    auto rep = run_noise_sweep(z, {0.0, 0.5, 1.0}, cfg);
    REQUIRE(rep.sweep.size() == 3);
    CHECK(rep.sweep[0].mean == doctest::Approx(100.0));
    CHECK(rep.sweep[2].mean < rep.sweep[0].mean);
    CHECK(rep.values.size() == 3);
    CHECK_THROWS(run_noise_sweep(z, {1.5}, cfg));
  }
}
