#pragma once

#include <optional>
#include <string>
#include <vector>

#include "graphprobe/config.hpp"

namespace gp {

/// File and selector arguments beyond the config tree.
struct CommandArgs {
  std::string corpus;
  std::vector<std::string> x_files;  // several X files make a layer sweep
  std::string z_file;                // empty: embed the corpus
  std::string z_out;                 // embed: output path (default <out>/z.gpem)

  std::vector<std::string> node_labels;
  std::vector<std::string> edge_labels;
  std::string nodes_file;  // JSON {"<sentence_id>" | "*": [node ids]}
  bool all_nodes = false;

  bool per_relation = false;
};

// Each writes its outputs under cfg.out_dir() and throws UsageError,
// DataError or NumericalError on failure.
void cmd_synth(const RunConfig& cfg);
void cmd_embed(const RunConfig& cfg, const CommandArgs& args);
void cmd_birdseye(const RunConfig& cfg, const CommandArgs& args);
void cmd_wormseye(const RunConfig& cfg, const CommandArgs& args);
void cmd_validate(const RunConfig& cfg, const CommandArgs& args);
void cmd_noise_sweep(const RunConfig& cfg, const CommandArgs& args);

}  // namespace gp
