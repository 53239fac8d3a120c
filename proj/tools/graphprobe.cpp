#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "graphprobe/commands.hpp"
#include "graphprobe/config.hpp"
#include "graphprobe/error.hpp"
#include "graphprobe/report.hpp"

namespace {

struct Shared {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repeats;
  std::optional<std::size_t> jobs;
  std::optional<std::string> out;
  bool strict = false;
};

void add_shared(CLI::App* cmd, Shared& s) {
  cmd->add_option("--config", s.config, "JSON config file");
  cmd->add_option("--seed", s.seed, "global seed");
  cmd->add_option("--repeats", s.repeats, "independent repeats (default 20)");
  cmd->add_option("--jobs", s.jobs, "parallel jobs");
  cmd->add_option("--out", s.out, "output directory");
  cmd->add_flag("--strict", s.strict, "abort on invalid sentences instead of skipping them");
  cmd->allow_extras();
}

/// "--a.b=v" or "--a.b v" pairs left over after parsing.
std::vector<std::pair<std::string, std::string>> overrides(const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& a = extras[i];
    if (a.rfind("--", 0) != 0 || a.size() < 3) throw gp::UsageError("unexpected argument '" + a + "'");
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(a.substr(2, eq - 2), a.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size()) throw gp::UsageError("option '" + a + "' needs a value");
      out.emplace_back(a.substr(2), extras[++i]);
    }
  }
  return out;
}

gp::RunConfig resolve(const Shared& s, const CLI::App* cmd) {
  auto ov = overrides(cmd->remaining());
  if (s.seed) ov.emplace_back("seed", std::to_string(*s.seed));
  if (s.repeats) ov.emplace_back("repeats", std::to_string(*s.repeats));
  if (s.jobs) ov.emplace_back("jobs", std::to_string(*s.jobs));
  if (s.out) ov.emplace_back("out", *s.out);
  if (s.strict) ov.emplace_back("strict", "true");
  return gp::RunConfig{gp::resolve_config(s.config, ov)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graphprobe: graph-structure probing of token representations"};
  app.set_version_flag("--version", gp::kToolkitVersion);
  app.require_subcommand(1);

  Shared shared;
  gp::CommandArgs args;
  std::optional<double> rho;
  std::vector<double> ratios;
  std::vector<std::size_t> depths;
  bool equalize = false;

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with X and Z files, or Gaussian pairs");
  add_shared(synth, shared);

  auto* embed = app.add_subcommand("embed", "embed every corpus graph into a Z file");
  add_shared(embed, shared);
  embed->add_option("--corpus", args.corpus, "corpus JSON-lines file")->required();
  embed->add_option("--z-out", args.z_out, "output embedding file (default <out>/z.gpem)");

  auto* birdseye = app.add_subcommand("birdseye", "MIG of whole structures; several --x files give a layer sweep");
  add_shared(birdseye, shared);
  birdseye->add_option("--corpus", args.corpus)->required();
  birdseye->add_option("--x", args.x_files, "representation file(s)")->required();
  birdseye->add_option("--z", args.z_file, "graph embedding file (default: embed the corpus)");

  auto* wormseye = app.add_subcommand("wormseye", "MIL of localized substructures");
  add_shared(wormseye, shared);
  wormseye->add_option("--corpus", args.corpus)->required();
  wormseye->add_option("--x", args.x_files)->required();
  wormseye->add_option("--z", args.z_file);

  auto* validate = app.add_subcommand("validate", "restore graphs from embeddings with link-prediction MLPs");
  add_shared(validate, shared);
  validate->add_option("--corpus", args.corpus)->required();
  validate->add_option("--z", args.z_file);
  validate->add_option("--x", args.x_files, "probe word representations instead of graph embeddings");
  validate->add_option("--depths", depths, "hidden-layer counts, e.g. --depths 0 1 2");
  validate->add_flag("--per-relation", args.per_relation, "add per-label AUC columns");

  for (auto* cmd : {wormseye, validate}) {
    cmd->add_option("--node-label", args.node_labels, "select nodes with this label");
    cmd->add_option("--edge-label", args.edge_labels, "select endpoints of edges with this label");
    cmd->add_option("--nodes", args.nodes_file, "JSON file mapping sentence ids (or \"*\") to node ids");
    cmd->add_flag("--all-nodes", args.all_nodes, "select every node");
    cmd->add_option("--rho", rho, "noise ratio in [0, 1]");
  }
  wormseye->add_flag("--equalize", equalize, "down-sample selectors to equal target counts");

  auto* sweep = app.add_subcommand("noise-sweep", "normalized I(Z';Z) under increasing noise");
  add_shared(sweep, shared);
  sweep->add_option("--corpus", args.corpus)->required();
  sweep->add_option("--z", args.z_file);
  sweep->add_option("--ratios", ratios, "noise ratios in [0, 1]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? gp::kExitOk : gp::kExitUsage;
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    gp::RunConfig cfg = resolve(shared, cmd);
    if (rho) gp::apply_override(cfg.tree, "probe.rho", gp::format_number(*rho));
    if (equalize) gp::apply_override(cfg.tree, "probe.equalize_targets", "true");
    if (!ratios.empty()) cfg.tree["noise_sweep"]["ratios"] = ratios;
    if (!depths.empty()) cfg.tree["link"]["depths"] = depths;

    if (cmd == synth) {
      gp::cmd_synth(cfg);
    } else if (cmd == embed) {
      gp::cmd_embed(cfg, args);
    } else if (cmd == birdseye) {
      gp::cmd_birdseye(cfg, args);
    } else if (cmd == wormseye) {
      gp::cmd_wormseye(cfg, args);
    } else if (cmd == validate) {
      gp::cmd_validate(cfg, args);
    } else {
      gp::cmd_noise_sweep(cfg, args);
    }
  } catch (const gp::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return gp::kExitUsage;
  } catch (const gp::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return gp::kExitNumerical;
  } catch (const gp::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return gp::kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return gp::kExitData;
  }
  return gp::kExitOk;
}
