#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "graphprobe/graph_embed.hpp"
#include "graphprobe/mi_estimator.hpp"
#include "graphprobe/probe_metrics.hpp"
#include "graphprobe/restoration.hpp"
#include "graphprobe/synth.hpp"

namespace gp {

using Json = nlohmann::ordered_json;

/// Every recognised key with its default value.
Json default_config();

/// Copies `overlay` onto `base`; a key absent from `base` is a UsageError
/// naming its dotted path, as is a value of the wrong JSON type.
void merge_config(Json& base, const Json& overlay, const std::string& prefix = "");

/// Sets a dotted key ("critic.epochs") from command-line text, parsed
/// according to the type of the existing value.
void apply_override(Json& cfg, const std::string& dotted_key, const std::string& text);

/// Defaults, then the file (if any), then overrides in order.
Json resolve_config(const std::filesystem::path& file, const std::vector<std::pair<std::string, std::string>>& overrides);

/// Typed views of a resolved tree. Each also validates.
struct RunConfig {
  Json tree;

  std::uint64_t seed() const;
  std::size_t repeats() const;
  std::size_t jobs() const;
  std::string out_dir() const;
  bool strict() const;

  WalkConfig walk() const;
  SkipGramConfig skipgram() const;
  CriticConfig critic() const;
  ProbeConfig probe() const;
  LinkPredictorConfig link() const;
  std::vector<std::size_t> depths() const;
  std::vector<double> sweep_ratios() const;
  SynthCorpusConfig synth() const;
  std::string synth_kind() const;  // "corpus" or "gaussian"
  GaussianPairConfig gaussian() const;
};

}  // namespace gp
