#include "graphprobe/probe_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "graphprobe/error.hpp"
#include "graphprobe/parallel.hpp"
#include "graphprobe/rng.hpp"

namespace gp {

double mig(double mi_xz, const ControlBounds& bounds) {
  if (!bounds.valid()) {
    throw DataError("degenerate control bounds: self MI " + std::to_string(bounds.self_mi) +
                    " does not exceed null MI " + std::to_string(bounds.null_mi));
  }
  return (mi_xz - bounds.null_mi) / (bounds.self_mi - bounds.null_mi);
}

double mil(double mi_x_zprime, double mi_xz, double null_mi) {
  if (!(mi_xz > null_mi)) {
    throw DataError("degenerate MIL denominator: I(X;Z) " + std::to_string(mi_xz) +
                    " does not exceed null MI " + std::to_string(null_mi));
  }
  return 1.0 - (mi_x_zprime - null_mi) / (mi_xz - null_mi);
}

std::vector<Matrix> perturb_embeddings(std::span<const Matrix> z, const RowTargets& targets, double rho,
                                       std::uint64_t seed) {
  if (rho < 0.0 || rho > 1.0) throw UsageError("noise ratio must lie in [0, 1]");
  if (targets.size() > z.size()) throw DataError("perturbation targets name more sentences than Z has");
  std::vector<Matrix> out(z.begin(), z.end());
  for (std::size_t s = 0; s < targets.size(); ++s) {
    const std::uint64_t sentence_seed = derive_seed(seed, static_cast<std::uint64_t>(s));
    for (std::size_t r : targets[s]) {
      if (r >= out[s].rows()) {
        throw DataError("perturbation target row " + std::to_string(r) + " out of range in sentence " +
                        std::to_string(s));
      }
      if (rho == 0.0) continue;
      Rng rng(derive_seed(sentence_seed, static_cast<std::uint64_t>(r)));
      mix_with_noise(out[s].row(r), rho, rng);
    }
  }
  return out;
}

std::vector<SentencePair> AlignedCorpus::pairs() const {
  std::vector<SentencePair> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back({x[i], z[i]});
  return out;
}

AlignedCorpus align_corpus(const std::vector<LinguisticGraph>& graphs, const EmbeddingStore& x,
                           const EmbeddingStore& z) {
  AlignedCorpus out;
  for (const auto& g : graphs) {
    const std::string& sid = g.sentence_id();
    if (!z.contains(sid)) {
      out.warnings.push_back("sentence '" + sid + "' has no graph embedding; skipped");
      continue;
    }
    if (!x.contains(sid)) throw DataError("alignment mismatch: sentence '" + sid + "' is missing from X");
    SentenceEmbedding zs = z.sentence(sid);
    const auto tokens = g.aligned_tokens();
    if (zs.token_indices != tokens) {
      throw DataError("alignment mismatch: sentence '" + sid + "' Z rows do not match the graph alignment");
    }
    SentenceEmbedding xs = x.sentence(sid);
    std::vector<std::size_t> x_rows;
    x_rows.reserve(tokens.size());
    for (std::size_t t : tokens) {
      auto it = std::find(xs.token_indices.begin(), xs.token_indices.end(), t);
      if (it == xs.token_indices.end()) {
        throw DataError("alignment mismatch: sentence '" + sid + "' has " + std::to_string(xs.rows.rows()) +
                        " X rows but lacks token " + std::to_string(t) + " of its " +
                        std::to_string(tokens.size()) + " graph-aligned tokens");
      }
      x_rows.push_back(static_cast<std::size_t>(it - xs.token_indices.begin()));
    }
    std::vector<NodeId> nodes(tokens.size());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      if (auto t = g.token_of(v)) {
        nodes[static_cast<std::size_t>(std::lower_bound(tokens.begin(), tokens.end(), *t) - tokens.begin())] = v;
      }
    }
    out.graphs.push_back(g);
    out.x.push_back(xs.rows.gather_rows(x_rows));
    out.z.push_back(std::move(zs.rows));
    out.row_nodes.push_back(std::move(nodes));
  }
  if (out.graphs.empty()) throw DataError("alignment: no sentence has both X and Z rows");
  return out;
}

namespace {

std::vector<std::size_t> rows_of_nodes(const std::vector<NodeId>& row_nodes, const std::vector<NodeId>& picked) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < row_nodes.size(); ++r) {
    if (std::binary_search(picked.begin(), picked.end(), row_nodes[r])) rows.push_back(r);
  }
  return rows;
}

}  // namespace

RowTargets resolve_targets(const AlignedCorpus& corpus, const SubgraphSelector& selector) {
  RowTargets out(corpus.size());
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    out[s] = rows_of_nodes(corpus.row_nodes[s], select_nodes(corpus.graphs[s], selector));
  }
  return out;
}

RowTargets resolve_targets(const AlignedCorpus& corpus, const std::map<std::string, std::vector<NodeId>>& nodes) {
  RowTargets out(corpus.size());
  auto fallback = nodes.find("*");
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    auto it = nodes.find(corpus.graphs[s].sentence_id());
    if (it == nodes.end()) it = fallback;
    if (it == nodes.end()) continue;
    out[s] = rows_of_nodes(corpus.row_nodes[s], select_nodes(corpus.graphs[s], SubgraphSelector::node_set(it->second)));
  }
  return out;
}

std::size_t count_targets(const RowTargets& targets) {
  std::size_t n = 0;
  for (const auto& t : targets) n += t.size();
  return n;
}

std::vector<RowTargets> equalize_targets(const std::vector<RowTargets>& sets, std::uint64_t seed) {
  if (sets.empty()) return {};
  std::size_t smallest = count_targets(sets.front());
  for (const auto& s : sets) smallest = std::min(smallest, count_targets(s));
  std::vector<RowTargets> out;
  for (std::size_t k = 0; k < sets.size(); ++k) {
    const auto& set = sets[k];
    std::vector<std::pair<std::size_t, std::size_t>> flat;
    for (std::size_t s = 0; s < set.size(); ++s) {
      for (std::size_t r : set[s]) flat.emplace_back(s, r);
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    rng.shuffle(std::span<std::pair<std::size_t, std::size_t>>(flat));
    flat.resize(smallest);
    RowTargets eq(set.size());
    for (const auto& [s, r] : flat) eq[s].push_back(r);
    for (auto& rows : eq) std::sort(rows.begin(), rows.end());
    out.push_back(std::move(eq));
  }
  return out;
}

void ProbeConfig::validate() const {
  critic.validate();
  if (repeats < 1) throw UsageError("repeats must be at least 1");
  if (!(self_epsilon > 0.0)) throw UsageError("self_epsilon must be positive");
  if (rho < 0.0 || rho > 1.0) throw UsageError("rho must lie in [0, 1]");
}

std::uint64_t repeat_seed(std::uint64_t seed, std::string_view role, std::size_t repeat) {
  return derive_seed(derive_seed(seed, role), static_cast<std::uint64_t>(repeat));
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

namespace {

CriticConfig seeded(const CriticConfig& c, std::uint64_t seed) {
  CriticConfig out = c;
  out.seed = seed;
  return out;
}

std::size_t total_rows(const AlignedCorpus& corpus) {
  std::size_t n = 0;
  for (const auto& m : corpus.z) n += m.rows();
  return n;
}

void fill_values(ProbeReport& rep) {
  rep.values.clear();
  for (const auto& r : rep.repeats) rep.values.push_back(r.value);
  const Summary s = summarize(rep.values);
  rep.mean = s.mean;
  rep.stddev = s.stddev;
}

}  // namespace

Baseline estimate_baseline(const AlignedCorpus& corpus, const ProbeConfig& cfg, bool with_self) {
  cfg.validate();
  const auto pairs = corpus.pairs();
  std::size_t null_dim = cfg.null_dim;
  if (null_dim == 0) {
    for (const auto& x : corpus.x) {
      if (x.rows() > 0) {
        null_dim = x.cols();
        break;
      }
    }
  }
  if (null_dim == 0) throw DataError("cannot infer null width: X has no rows");

  Baseline base;
  base.xz.resize(cfg.repeats);
  base.null.resize(cfg.repeats);
  if (with_self) base.self.resize(cfg.repeats);
  const std::size_t roles = with_self ? 3 : 2;
  run_jobs(cfg.repeats * roles, cfg.jobs, [&](std::size_t job) {
    const std::size_t r = job / roles;
    switch (job % roles) {
      case 0:
        base.xz[r] = estimate_mi(pairs, seeded(cfg.critic, repeat_seed(cfg.seed, "xz", r)));
        break;
      case 1:
        base.null[r] = estimate_null_mi(corpus.z, null_dim, seeded(cfg.critic, repeat_seed(cfg.seed, "null", r)));
        break;
      default:
        base.self[r] = estimate_self_mi(corpus.z, cfg.self_epsilon, seeded(cfg.critic, repeat_seed(cfg.seed, "self", r)));
        break;
    }
  });
  return base;
}

std::vector<MiEstimate> estimate_xz(const AlignedCorpus& corpus, const ProbeConfig& cfg) {
  cfg.validate();
  const auto pairs = corpus.pairs();
  std::vector<MiEstimate> out(cfg.repeats);
  run_jobs(cfg.repeats, cfg.jobs, [&](std::size_t r) {
    out[r] = estimate_mi(pairs, seeded(cfg.critic, repeat_seed(cfg.seed, "xz", r)));
  });
  return out;
}

ProbeReport birdseye_report(const Baseline& base, const ProbeConfig& cfg) {
  if (base.self.size() != base.xz.size()) throw std::invalid_argument("baseline lacks self estimates");
  ProbeReport rep;
  rep.kind = "MIG";
  rep.critic_hash = cfg.critic.hash();
  for (std::size_t r = 0; r < base.xz.size(); ++r) {
    RepeatRecord rec;
    rec.repeat = r;
    rec.seed = base.xz[r].seed;
    rec.mi_xz = base.xz[r].value;
    rec.self_mi = base.self[r].value;
    rec.null_mi = base.null[r].value;
    rec.value = mig(rec.mi_xz, {rec.self_mi, rec.null_mi});
    if (rec.value < 0.0 || rec.value > 1.0) {
      rep.warnings.push_back("repeat " + std::to_string(r) + ": MIG " + std::to_string(rec.value) +
                             " outside [0, 1] (estimation error)");
    }
    rep.repeats.push_back(rec);
  }
  if (!base.xz.empty()) rep.skipped_sentences = base.xz.front().skipped_sentences;
  fill_values(rep);
  return rep;
}

ProbeReport run_birdseye(const AlignedCorpus& corpus, const ProbeConfig& cfg) {
  ProbeReport rep = birdseye_report(estimate_baseline(corpus, cfg, true), cfg);
  rep.total_rows = total_rows(corpus);
  rep.warnings.insert(rep.warnings.begin(), corpus.warnings.begin(), corpus.warnings.end());
  return rep;
}

std::vector<ProbeReport> run_wormseye(const AlignedCorpus& corpus, const std::vector<RowTargets>& targets,
                                      const std::vector<std::string>& descriptions, const ProbeConfig& cfg,
                                      const Baseline& base) {
  cfg.validate();
  if (descriptions.size() != targets.size()) throw std::invalid_argument("one description per target set");
  if (base.xz.size() != cfg.repeats || base.null.size() != cfg.repeats) {
    throw std::invalid_argument("baseline repeat count differs from the probe config");
  }
  const auto pairs = corpus.pairs();
  const std::size_t k = targets.size();
  std::vector<std::vector<double>> perturbed(k, std::vector<double>(cfg.repeats, 0.0));
  run_jobs(k * cfg.repeats, cfg.jobs, [&](std::size_t job) {
    const std::size_t t = job / cfg.repeats;
    const std::size_t r = job % cfg.repeats;
    if (count_targets(targets[t]) == 0) {
      // Z' = Z; the training run would replay the baseline exactly.
      perturbed[t][r] = base.xz[r].value;
      return;
    }
    NoisePlan plan;
    plan.z = ResampledNoise{ResampledNoise::Kind::Mixing, cfg.rho, targets[t], false};
    perturbed[t][r] = estimate_mi(pairs, seeded(cfg.critic, base.xz[r].seed), plan).value;
  });

  std::vector<ProbeReport> out;
  for (std::size_t t = 0; t < k; ++t) {
    ProbeReport rep;
    rep.kind = "MIL";
    rep.selector = descriptions[t];
    rep.noise_ratio = cfg.rho;
    rep.critic_hash = cfg.critic.hash();
    rep.targeted_rows = count_targets(targets[t]);
    rep.total_rows = total_rows(corpus);
    rep.warnings = corpus.warnings;
    if (rep.targeted_rows == 0) {
      rep.degenerate = true;
      rep.warnings.push_back("selector '" + descriptions[t] + "' matches no row in any sentence; MIL is trivially 0");
    }
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      RepeatRecord rec;
      rec.repeat = r;
      rec.seed = base.xz[r].seed;
      rec.mi_xz = base.xz[r].value;
      rec.null_mi = base.null[r].value;
      rec.mi_perturbed = perturbed[t][r];
      rec.value = mil(rec.mi_perturbed, rec.mi_xz, rec.null_mi);
      rep.repeats.push_back(rec);
    }
    if (!base.xz.empty()) rep.skipped_sentences = base.xz.front().skipped_sentences;
    fill_values(rep);
    out.push_back(std::move(rep));
  }
  return out;
}

ProbeReport run_wormseye(const AlignedCorpus& corpus, const SubgraphSelector& selector, const ProbeConfig& cfg) {
  const Baseline base = estimate_baseline(corpus, cfg, false);
  return run_wormseye(corpus, {resolve_targets(corpus, selector)}, {selector.describe()}, cfg, base).front();
}

ProbeReport run_noise_sweep(std::span<const Matrix> z, const std::vector<double>& ratios, const ProbeConfig& cfg) {
  cfg.validate();
  if (ratios.empty()) throw UsageError("noise sweep needs at least one ratio");
  for (double r : ratios) {
    if (r < 0.0 || r > 1.0) throw UsageError("noise sweep ratios must lie in [0, 1]");
  }
  std::vector<SentencePair> pairs;
  for (const auto& m : z) pairs.push_back({m, m});

  const std::size_t slots = ratios.size() + 1;  // slot 0: self estimate
  std::vector<std::vector<double>> est(cfg.repeats, std::vector<double>(slots, 0.0));
  std::vector<std::size_t> skipped(cfg.repeats, 0);
  run_jobs(cfg.repeats * slots, cfg.jobs, [&](std::size_t job) {
    const std::size_t r = job / slots;
    const std::size_t j = job % slots;
    const CriticConfig c = seeded(cfg.critic, repeat_seed(cfg.seed, "self", r));
    if (j == 0) {
      const auto e = estimate_self_mi(z, cfg.self_epsilon, c);
      est[r][0] = e.value;
      skipped[r] = e.skipped_sentences;
      return;
    }
    const double rho = ratios[j - 1];
    if (rho == 0.0) return;  // Z' = Z: filled from the self estimate below
    NoisePlan plan;
    plan.x = ResampledNoise{ResampledNoise::Kind::Mixing, rho, {}, true};
    CriticConfig cx = c;
    cx.x_dim = 0;
    est[r][j] = estimate_mi(pairs, cx, plan).value;
  });

  ProbeReport rep;
  rep.kind = "noise-sweep";
  rep.critic_hash = cfg.critic.hash();
  rep.skipped_sentences = skipped.front();
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    if (!(est[r][0] > 0.0)) {
      throw DataError("noise sweep: self MI estimate " + std::to_string(est[r][0]) + " is not positive in repeat " +
                      std::to_string(r));
    }
    RepeatRecord rec;
    rec.repeat = r;
    rec.seed = repeat_seed(cfg.seed, "self", r);
    rec.self_mi = est[r][0];
    rec.value = est[r][0];
    rep.repeats.push_back(rec);
  }
  for (std::size_t j = 0; j < ratios.size(); ++j) {
    SweepPoint p;
    p.ratio = ratios[j];
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      p.percents.push_back(ratios[j] == 0.0 ? 100.0 : 100.0 * est[r][j + 1] / est[r][0]);
    }
    const Summary s = summarize(p.percents);
    p.mean = s.mean;
    p.stddev = s.stddev;
    rep.values.push_back(p.mean);
    rep.sweep.push_back(std::move(p));
  }
  const Summary s = summarize(rep.values);
  rep.mean = s.mean;
  rep.stddev = s.stddev;
  return rep;
}

}  // namespace gp
