// Serial reference vs OpenMP job runner on the two parallel hot spots:
// per-sentence embedding and per-repeat critic training.

#include <benchmark/benchmark.h>

#include "graphprobe/graph_embed.hpp"
#include "graphprobe/mi_estimator.hpp"
#include "graphprobe/parallel.hpp"
#include "graphprobe/rng.hpp"
#include "graphprobe/synth.hpp"

namespace {

std::vector<gp::LinguisticGraph> bench_graphs() {
  gp::SynthCorpusConfig c;
  c.n_sentences = 32;
  c.seed = 1;
  return gp::gen_graphs(c);
}

void BM_EmbedCorpus(benchmark::State& state) {
  static const auto graphs = bench_graphs();
  const auto jobs = static_cast<std::size_t>(state.range(0));
  gp::WalkConfig w;
  w.walks_per_node = 20;
  gp::SkipGramConfig s;
  s.embedding_dim = 32;
  s.epochs = 100;
  for (auto _ : state) {
    auto z = gp::embed_corpus(graphs, w, s, 7, jobs);
    benchmark::DoNotOptimize(z.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(graphs.size()));
}

void BM_CriticRepeats(benchmark::State& state) {
  static const auto z = [] {
    gp::SynthCorpusConfig c;
    c.n_sentences = 40;
    c.skipgram.embedding_dim = 32;
    c.walk.walks_per_node = 20;
    auto corpus = gp::gen_corpus(c);
    std::vector<gp::Matrix> out;
    for (const auto& e : corpus.z) out.push_back(e.rows);
    return out;
  }();
  const bool parallel = state.range(0) > 1;
  const auto jobs = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t kRepeats = 4;
  for (auto _ : state) {
    std::vector<double> values(kRepeats);
    auto job = [&](std::size_t r) {
      gp::CriticConfig c;
      c.projection_dim = 32;
      c.head_hidden_dims = {32};
      c.epochs = 5;
      c.smoothing_window = 2;
      c.seed = gp::derive_seed(3, static_cast<std::uint64_t>(r));
      values[r] = gp::estimate_self_mi(z, 0.01, c).value;
    };
    if (parallel) {
      gp::run_jobs(kRepeats, jobs, job);
    } else {
      gp::run_jobs_serial(kRepeats, job);
    }
    benchmark::DoNotOptimize(values.data());
  }
}

}  // namespace

BENCHMARK(BM_EmbedCorpus)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CriticRepeats)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
