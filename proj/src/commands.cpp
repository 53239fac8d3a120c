#include "graphprobe/commands.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "graphprobe/corpus_io.hpp"
#include "graphprobe/embedding_io.hpp"
#include "graphprobe/error.hpp"
#include "graphprobe/graph_embed.hpp"
#include "graphprobe/probe_metrics.hpp"
#include "graphprobe/report.hpp"
#include "graphprobe/restoration.hpp"
#include "graphprobe/synth.hpp"

namespace fs = std::filesystem;

namespace gp {

namespace {

struct LoadedCorpus {
  Corpus corpus;
  Json skipped = Json::array();
};

LoadedCorpus load(const RunConfig& cfg, const std::string& path) {
  if (path.empty()) throw UsageError("--corpus is required");
  LoadOptions opt;
  opt.strict_keys = cfg.strict();
  opt.skip_invalid = !cfg.strict();
  LoadedCorpus out;
  out.corpus = load_corpus(path, opt);
  for (const auto& s : out.corpus.skipped) out.skipped.push_back({{"sentence_id", s.sentence_id}, {"reason", s.reason}});
  if (out.corpus.graphs.empty()) throw DataError("corpus '" + path + "' has no valid sentence");
  return out;
}

std::uint64_t embed_seed(const RunConfig& cfg) { return derive_seed(cfg.seed(), std::string_view("embed")); }

/// Graphs that cannot be embedded (a single node) are skipped unless strict.
EmbeddingStore embed_graphs(const RunConfig& cfg, std::vector<LinguisticGraph>& graphs, Json& skipped) {
  std::vector<LinguisticGraph> usable;
  for (auto& g : graphs) {
    if (g.num_nodes() < 2) {
      const std::string reason = "a single-node graph has no walks";
      if (cfg.strict()) throw DataError("sentence '" + g.sentence_id() + "': " + reason);
      skipped.push_back({{"sentence_id", g.sentence_id()}, {"reason", reason}});
      continue;
    }
    usable.push_back(g);
  }
  if (usable.empty()) throw DataError("no sentence can be embedded");
  return EmbeddingStore::from_sentences(embed_corpus(usable, cfg.walk(), cfg.skipgram(), embed_seed(cfg), cfg.jobs()));
}

EmbeddingStore z_for(const RunConfig& cfg, const CommandArgs& args, std::vector<LinguisticGraph>& graphs, Json& skipped,
                     Json& inputs) {
  if (!args.z_file.empty()) {
    inputs["z"] = args.z_file;
    return read_embedding_store(args.z_file);
  }
  inputs["z"] = "embedded from corpus";
  return embed_graphs(cfg, graphs, skipped);
}

fs::path out_path(const RunConfig& cfg, const std::string& name) {
  fs::path dir(cfg.out_dir());
  fs::create_directories(dir);
  return dir / name;
}

std::vector<Matrix> blocks(const std::vector<SentenceEmbedding>& s) {
  std::vector<Matrix> out;
  for (const auto& e : s) out.push_back(e.rows);
  return out;
}

Json warnings_json(const std::vector<std::string>& w) { return Json(w); }

std::map<std::string, std::vector<NodeId>> read_node_lists(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open node list '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    return j.get<std::map<std::string, std::vector<NodeId>>>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("node list '" + path + "' must map sentence ids (or \"*\") to arrays of node ids: " + e.what());
  }
}

struct NamedTargets {
  std::vector<RowTargets> targets;
  std::vector<std::string> names;
};

NamedTargets selector_targets(const CommandArgs& args, const AlignedCorpus& aligned) {
  NamedTargets t;
  for (const auto& l : args.node_labels) {
    auto sel = SubgraphSelector::node_label(l);
    t.targets.push_back(resolve_targets(aligned, sel));
    t.names.push_back(sel.describe());
  }
  for (const auto& l : args.edge_labels) {
    auto sel = SubgraphSelector::edge_label(l);
    t.targets.push_back(resolve_targets(aligned, sel));
    t.names.push_back(sel.describe());
  }
  if (!args.nodes_file.empty()) {
    t.targets.push_back(resolve_targets(aligned, read_node_lists(args.nodes_file)));
    t.names.push_back("nodes from " + args.nodes_file);
  }
  if (args.all_nodes) {
    auto sel = SubgraphSelector::every_node();
    t.targets.push_back(resolve_targets(aligned, sel));
    t.names.push_back(sel.describe());
  }
  return t;
}

}  // namespace

void cmd_synth(const RunConfig& cfg) {
  Json meta;
  meta["schema"] = kReportSchema;
  meta["toolkit_version"] = kToolkitVersion;
  meta["config"] = recorded_config(cfg.tree);
  if (cfg.synth_kind() == "gaussian") {
    const GaussianPairConfig g = cfg.gaussian();
    const GaussianPairs pairs = gen_gaussian_pairs(g);
    write_embedding_store(out_path(cfg, "x.gpem"), EmbeddingStore::from_sentences(pairs.x));
    write_embedding_store(out_path(cfg, "z.gpem"), EmbeddingStore::from_sentences(pairs.z));
    meta["kind"] = "gaussian";
    meta["true_mi_nats"] = g.true_mi();
    meta["blocks"] = pairs.x.size();
    write_json(out_path(cfg, "metadata.json"), meta);
    return;
  }
  const SynthCorpusConfig sc = cfg.synth();
  const SynthCorpus c = gen_corpus(sc, cfg.jobs());
  save_corpus(out_path(cfg, "corpus.jsonl"), c.graphs);
  write_embedding_store(out_path(cfg, "z.gpem"), EmbeddingStore::from_sentences(c.z));
  write_embedding_store(out_path(cfg, "x.gpem"), EmbeddingStore::from_sentences(c.x));
  meta["kind"] = "corpus";
  meta["sentences"] = c.graphs.size();
  if (sc.dependence == Dependence::Mixture) {
    std::size_t linear = 0;
    for (bool b : c.linear_branch) linear += b;
    meta["linear_sentences"] = linear;
  }
  write_json(out_path(cfg, "metadata.json"), meta);
}

void cmd_embed(const RunConfig& cfg, const CommandArgs& args) {
  LoadedCorpus lc = load(cfg, args.corpus);
  const EmbeddingStore store = embed_graphs(cfg, lc.corpus.graphs, lc.skipped);
  const fs::path z_path = args.z_out.empty() ? out_path(cfg, "z.gpem") : fs::path(args.z_out);
  if (z_path.has_parent_path()) fs::create_directories(z_path.parent_path());
  write_embedding_store(z_path, store);

  Json rep = report_envelope("embed", cfg.tree, {{"corpus", args.corpus}});
  rep["result"] = {{"z_file", z_path.string()},
                   {"rows", store.data().rows()},
                   {"cols", store.data().cols()},
                   {"sentences", store.manifest().size()}};
  rep["warnings"] = warnings_json(lc.corpus.warnings);
  rep["skipped"] = lc.skipped;
  write_json(out_path(cfg, "embed_report.json"), rep);
}

void cmd_birdseye(const RunConfig& cfg, const CommandArgs& args) {
  if (args.x_files.empty()) throw UsageError("birdseye needs at least one --x file");
  const ProbeConfig pc = cfg.probe();
  LoadedCorpus lc = load(cfg, args.corpus);
  Json inputs = {{"corpus", args.corpus}, {"x", args.x_files}};
  const EmbeddingStore z = z_for(cfg, args, lc.corpus.graphs, lc.skipped, inputs);

  Baseline base;
  std::vector<ProbeReport> reports;
  for (std::size_t layer = 0; layer < args.x_files.size(); ++layer) {
    const AlignedCorpus aligned = align_corpus(lc.corpus.graphs, read_embedding_store(args.x_files[layer]), z);
    if (layer == 0) {
      base = estimate_baseline(aligned, pc, true);
    } else {
      base.xz = estimate_xz(aligned, pc);
    }
    ProbeReport r = birdseye_report(base, pc);
    r.total_rows = 0;
    for (const auto& m : aligned.z) r.total_rows += m.rows();
    r.warnings.insert(r.warnings.begin(), aligned.warnings.begin(), aligned.warnings.end());
    reports.push_back(std::move(r));
  }

  Json rep = report_envelope("birdseye", cfg.tree, inputs);
  if (reports.size() == 1) {
    rep["result"] = to_json(reports.front());
  } else {
    Json layers = Json::array();
    for (std::size_t k = 0; k < reports.size(); ++k) {
      Json l = to_json(reports[k]);
      l["layer"] = k;
      l["x_file"] = args.x_files[k];
      layers.push_back(std::move(l));
    }
    rep["result"] = {{"kind", "MIG-layer-sweep"}, {"layers", std::move(layers)}};
    std::string csv = "layer,mig_mean,mig_std\n";
    for (std::size_t k = 0; k < reports.size(); ++k) {
      csv += std::to_string(k) + "," + format_number(reports[k].mean) + "," + format_number(reports[k].stddev) + "\n";
    }
    write_text(out_path(cfg, "birdseye_layers.csv"), csv);
  }
  rep["warnings"] = warnings_json(lc.corpus.warnings);
  rep["skipped"] = lc.skipped;
  write_json(out_path(cfg, "birdseye_report.json"), rep);

  std::string csv;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    std::string part = repeats_csv({reports[k]});
    if (reports.size() > 1) {
      // prefix a layer column
      std::istringstream lines(part);
      std::string line;
      bool header = true;
      part.clear();
      while (std::getline(lines, line)) {
        if (header) {
          if (k == 0) part += "layer," + line + "\n";
          header = false;
        } else {
          part += std::to_string(k) + "," + line + "\n";
        }
      }
    } else if (k > 0) {
      part = part.substr(part.find('\n') + 1);
    }
    csv += part;
  }
  write_text(out_path(cfg, "birdseye_repeats.csv"), csv);
}

void cmd_wormseye(const RunConfig& cfg, const CommandArgs& args) {
  if (args.x_files.size() != 1) throw UsageError("wormseye needs exactly one --x file");
  ProbeConfig pc = cfg.probe();
  LoadedCorpus lc = load(cfg, args.corpus);
  Json inputs = {{"corpus", args.corpus}, {"x", args.x_files.front()}};
  const EmbeddingStore z = z_for(cfg, args, lc.corpus.graphs, lc.skipped, inputs);
  const AlignedCorpus aligned = align_corpus(lc.corpus.graphs, read_embedding_store(args.x_files.front()), z);

  NamedTargets sel = selector_targets(args, aligned);
  if (sel.targets.empty()) {
    throw UsageError("wormseye needs a selector: --node-label, --edge-label, --nodes or --all-nodes");
  }
  if (pc.equalize_targets && sel.targets.size() > 1) {
    sel.targets = equalize_targets(sel.targets, derive_seed(pc.seed, std::string_view("equalize")));
  }
  const Baseline base = estimate_baseline(aligned, pc, false);
  const auto reports = run_wormseye(aligned, sel.targets, sel.names, pc, base);

  Json rep = report_envelope("wormseye", cfg.tree, inputs);
  Json res = Json::array();
  for (const auto& r : reports) res.push_back(to_json(r));
  rep["result"] = {{"kind", "MIL"}, {"selectors", std::move(res)}};
  std::vector<std::string> warnings = lc.corpus.warnings;
  warnings.insert(warnings.end(), aligned.warnings.begin(), aligned.warnings.end());
  rep["warnings"] = warnings_json(warnings);
  rep["skipped"] = lc.skipped;
  write_json(out_path(cfg, "wormseye_report.json"), rep);
  write_text(out_path(cfg, "wormseye_repeats.csv"), repeats_csv(reports));
}

void cmd_validate(const RunConfig& cfg, const CommandArgs& args) {
  if (args.x_files.size() > 1) throw UsageError("validate takes at most one --x file");
  LoadedCorpus lc = load(cfg, args.corpus);
  LinkPredictorConfig lcfg = cfg.link();
  Json inputs = {{"corpus", args.corpus}};

  RestorationData data;
  if (args.x_files.empty()) {
    const EmbeddingStore z = z_for(cfg, args, lc.corpus.graphs, lc.skipped, inputs);
    data = restoration_data(lc.corpus.graphs, z);
    lcfg.input_source = InputSource::GraphEmbeddings;
  } else {
    inputs["x"] = args.x_files.front();
    data = restoration_data(lc.corpus.graphs, read_embedding_store(args.x_files.front()));
    lcfg.input_source = InputSource::WordRepresentations;
  }

  Json rep = report_envelope("validate", cfg.tree, inputs);
  const bool perturbed = !args.node_labels.empty() || !args.edge_labels.empty() || !args.nodes_file.empty() || args.all_nodes;
  if (!perturbed) {
    const auto reports = evaluate_restoration(data, cfg.depths(), lcfg, cfg.jobs());
    Json res = Json::array();
    for (const auto& r : reports) res.push_back(to_json(r));
    rep["result"] = {{"kind", "restoration"}, {"reports", std::move(res)}};
    write_text(out_path(cfg, "validate_auc.csv"), auc_csv(reports, args.per_relation));
  } else {
    if (args.x_files.empty()) throw UsageError("perturbed probing needs an --x file");
    // Reuse the wormseye selector plumbing: rows here are the X rows of nodes.
    AlignedCorpus view;
    view.graphs = data.graphs;
    view.row_nodes = data.row_nodes;
    view.x = data.rows;
    view.z = data.rows;
    NamedTargets sel = selector_targets(args, view);
    if (sel.targets.size() != 1) throw UsageError("perturbed probing takes exactly one selector");
    const double rho = cfg.probe().rho;
    std::vector<AucReport> reports(cfg.repeats());
    for (std::size_t k = 0; k < reports.size(); ++k) {
      LinkPredictorConfig c = lcfg;
      c.seed = derive_seed(cfg.seed(), static_cast<std::uint64_t>(k));
      reports[k] = perturbed_accuracy_probe(data, sel.targets.front(), rho, c);
    }
    Json res = Json::array();
    for (const auto& r : reports) res.push_back(to_json(r));
    rep["result"] = {{"kind", "perturbed-accuracy"}, {"selector", sel.names.front()}, {"noise_ratio", rho},
                     {"targeted_rows", count_targets(sel.targets.front())}, {"reports", std::move(res)}};
    write_text(out_path(cfg, "validate_auc.csv"), auc_csv(reports, true));
  }
  std::vector<std::string> warnings = lc.corpus.warnings;
  warnings.insert(warnings.end(), data.warnings.begin(), data.warnings.end());
  rep["warnings"] = warnings_json(warnings);
  rep["skipped"] = lc.skipped;
  write_json(out_path(cfg, "validate_report.json"), rep);
}

void cmd_noise_sweep(const RunConfig& cfg, const CommandArgs& args) {
  const ProbeConfig pc = cfg.probe();
  LoadedCorpus lc = load(cfg, args.corpus);
  Json inputs = {{"corpus", args.corpus}};
  const EmbeddingStore z = z_for(cfg, args, lc.corpus.graphs, lc.skipped, inputs);
  std::vector<SentenceEmbedding> zs;
  std::vector<std::string> warnings = lc.corpus.warnings;
  for (const auto& g : lc.corpus.graphs) {
    if (z.contains(g.sentence_id())) {
      zs.push_back(z.sentence(g.sentence_id()));
    } else {
      warnings.push_back("sentence '" + g.sentence_id() + "' has no graph embedding; skipped");
    }
  }
  if (zs.empty()) throw DataError("noise sweep: no corpus sentence has graph embeddings");
  const auto zb = blocks(zs);
  const ProbeReport r = run_noise_sweep(zb, cfg.sweep_ratios(), pc);

  Json rep = report_envelope("noise-sweep", cfg.tree, inputs);
  rep["result"] = to_json(r);
  rep["warnings"] = warnings_json(warnings);
  rep["skipped"] = lc.skipped;
  write_json(out_path(cfg, "noise_sweep_report.json"), rep);
  write_text(out_path(cfg, "noise_sweep.csv"), sweep_csv(r));
}

}  // namespace gp
