#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "graphprobe/graph.hpp"

namespace gp {

struct LoadOptions {
  /// Unknown keys are an error when true, a warning otherwise.
  bool strict_keys = true;
  /// Records that fail graph validation are skipped (and listed) instead of
  /// aborting the load. JSON syntax errors always abort.
  bool skip_invalid = false;
};

struct SkippedSentence {
  std::string sentence_id;
  std::string reason;
};

struct Corpus {
  std::vector<LinguisticGraph> graphs;
  std::vector<std::string> warnings;
  std::vector<SkippedSentence> skipped;
};

/// Reads the JSON-lines corpus format:
///   {"sentence_id": str, "num_tokens": int,
///    "nodes": [{"id": int, "label": str|null}],
///    "edges": [{"u": int, "v": int, "label": str|null}],
///    "alignment": {"<node_id>": int}}
/// Blank lines are ignored. Errors carry the 1-based line number.
Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options = {});
Corpus parse_corpus(const std::string& text, const LoadOptions& options = {});

/// Canonical single-line JSON for one graph (fixed key order, alignment sorted
/// by node id). save_corpus writes one such line per graph.
std::string graph_to_json_line(const LinguisticGraph& graph);
void save_corpus(const std::filesystem::path& path, const std::vector<LinguisticGraph>& graphs);

}  // namespace gp
