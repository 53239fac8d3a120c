#include "graphprobe/config.hpp"

#include <fstream>
#include <sstream>

#include "graphprobe/error.hpp"

namespace gp {

Json default_config() {
  Json j;
  j["seed"] = 0;
  j["repeats"] = 20;
  j["jobs"] = 1;
  j["out"] = "out";
  j["strict"] = false;
  j["walk"] = {{"walk_length", 10}, {"walks_per_node", 100}};
  j["skipgram"] = {{"embedding_dim", 128}, {"window", 1},       {"epochs", 300},
                   {"learning_rate", 0.025}, {"optimizer", "adam"}, {"side", "sum"}};
  j["critic"] = {{"projection_dim", 64},
                 {"head_hidden_dims", Json::array({64})},
                 {"epochs", 50},
                 {"learning_rate", 1e-4},
                 {"smoothing_window", 10},
                 {"early_stop_tolerance", 1e-3},
                 {"early_stop_patience", 5},
                 {"optimizer", "adam"},
                 {"holdout", 0.0}};
  j["probe"] = {{"self_epsilon", 0.01}, {"null_dim", 0}, {"rho", 1.0}, {"equalize_targets", false}};
  j["noise_sweep"] = {{"ratios", Json::array({0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0})}};
  j["link"] = {{"hidden_dim", 128},
               {"learning_rate", 1e-4},
               {"epochs", 30},
               {"batch_size", 64},
               {"plateau_tolerance", 1e-4},
               {"plateau_patience", 3},
               {"symmetric", false},
               {"optimizer", "adam"},
               {"depths", Json::array({0, 1, 2, 3, 4, 5})}};
  j["synth"] = {{"kind", "corpus"},
                {"n_sentences", 200},
                {"min_nodes", 8},
                {"max_nodes", 16},
                {"graph_kind", "uniform-random-tree"},
                {"edge_probability", 0.3},
                {"dependence", "invertible-linear"},
                {"dependence_param", 0.5},
                {"x_dim", 128},
                {"linear_noise", 0.01},
                {"unaligned_tokens", 0},
                {"node_labels", Json::array({"NN", "IN", "NNP", "DT", "JJ"})},
                {"node_weights", Json::array()},
                {"edge_labels", Json::array({"prep", "pobj", "det", "nn", "nsubj"})},
                {"edge_weights", Json::array()}};
  j["gaussian"] = {{"dim", 4}, {"rho", 0.9}, {"n_samples", 10000}, {"block_size", 250}};
  return j;
}

namespace {

bool same_kind(const Json& a, const Json& b) {
  if (a.is_number() && b.is_number()) {
    // an integer default accepts only integers
    return !(a.is_number_integer() && b.is_number_float());
  }
  return a.type() == b.type();
}

}  // namespace

void merge_config(Json& base, const Json& overlay, const std::string& prefix) {
  if (!overlay.is_object()) throw UsageError("config" + (prefix.empty() ? "" : " '" + prefix + "'") + " must be an object");
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw UsageError("unknown config key '" + key + "'");
    Json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_config(slot, it.value(), key);
    } else {
      if (!same_kind(slot, it.value())) {
        throw UsageError("config key '" + key + "' expects " + std::string(slot.type_name()) + ", got " +
                         it.value().type_name());
      }
      slot = it.value();
    }
  }
}

void apply_override(Json& cfg, const std::string& dotted_key, const std::string& text) {
  Json* node = &cfg;
  std::stringstream parts(dotted_key);
  std::string part;
  while (std::getline(parts, part, '.')) {
    if (!node->is_object() || !node->contains(part)) throw UsageError("unknown config key '" + dotted_key + "'");
    node = &(*node)[part];
  }
  if (node->is_object()) throw UsageError("config key '" + dotted_key + "' is a section, not a value");
  Json value;
  if (node->is_string()) {
    value = text;
  } else {
    try {
      value = Json::parse(text);
    } catch (const Json::parse_error&) {
      throw UsageError("cannot parse value '" + text + "' for config key '" + dotted_key + "'");
    }
  }
  if (!same_kind(*node, value)) {
    throw UsageError("config key '" + dotted_key + "' expects " + std::string(node->type_name()) + ", got '" + text + "'");
  }
  *node = value;
}

Json resolve_config(const std::filesystem::path& file, const std::vector<std::pair<std::string, std::string>>& overrides) {
  Json cfg = default_config();
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw UsageError("cannot open config file '" + file.string() + "'");
    Json loaded;
    try {
      loaded = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw UsageError("config file '" + file.string() + "': " + e.what());
    }
    merge_config(cfg, loaded);
  }
  for (const auto& [k, v] : overrides) apply_override(cfg, k, v);
  return cfg;
}

namespace {

template <class T>
T get(const Json& tree, const char* section, const char* key) {
  try {
    return tree.at(section).at(key).get<T>();
  } catch (const Json::exception&) {
    throw UsageError(std::string("config key '") + section + "." + key + "' has an invalid value");
  }
}

template <class T>
T get_top(const Json& tree, const char* key) {
  try {
    return tree.at(key).get<T>();
  } catch (const Json::exception&) {
    throw UsageError(std::string("config key '") + key + "' has an invalid value");
  }
}

}  // namespace

std::uint64_t RunConfig::seed() const { return get_top<std::uint64_t>(tree, "seed"); }
std::size_t RunConfig::repeats() const { return get_top<std::size_t>(tree, "repeats"); }
std::size_t RunConfig::jobs() const { return std::max<std::size_t>(1, get_top<std::size_t>(tree, "jobs")); }
std::string RunConfig::out_dir() const { return get_top<std::string>(tree, "out"); }
bool RunConfig::strict() const { return get_top<bool>(tree, "strict"); }

WalkConfig RunConfig::walk() const {
  WalkConfig w;
  w.walk_length = get<std::size_t>(tree, "walk", "walk_length");
  w.walks_per_node = get<std::size_t>(tree, "walk", "walks_per_node");
  w.validate();
  return w;
}

SkipGramConfig RunConfig::skipgram() const {
  SkipGramConfig s;
  s.embedding_dim = get<std::size_t>(tree, "skipgram", "embedding_dim");
  s.window = get<std::size_t>(tree, "skipgram", "window");
  s.epochs = get<std::size_t>(tree, "skipgram", "epochs");
  s.learning_rate = get<double>(tree, "skipgram", "learning_rate");
  s.optimizer = optimizer_from_string(get<std::string>(tree, "skipgram", "optimizer"));
  s.side = embedding_side_from_string(get<std::string>(tree, "skipgram", "side"));
  s.validate();
  return s;
}

CriticConfig RunConfig::critic() const {
  CriticConfig c;
  c.projection_dim = get<std::size_t>(tree, "critic", "projection_dim");
  c.head_hidden_dims = get<std::vector<std::size_t>>(tree, "critic", "head_hidden_dims");
  c.epochs = get<std::size_t>(tree, "critic", "epochs");
  c.learning_rate = get<double>(tree, "critic", "learning_rate");
  c.smoothing_window = get<std::size_t>(tree, "critic", "smoothing_window");
  c.early_stop_tolerance = get<double>(tree, "critic", "early_stop_tolerance");
  c.early_stop_patience = get<std::size_t>(tree, "critic", "early_stop_patience");
  c.optimizer = optimizer_from_string(get<std::string>(tree, "critic", "optimizer"));
  c.holdout = get<double>(tree, "critic", "holdout");
  c.seed = seed();
  c.validate();
  return c;
}

ProbeConfig RunConfig::probe() const {
  ProbeConfig p;
  p.critic = critic();
  p.repeats = repeats();
  p.jobs = jobs();
  p.seed = seed();
  p.self_epsilon = get<double>(tree, "probe", "self_epsilon");
  p.null_dim = get<std::size_t>(tree, "probe", "null_dim");
  p.rho = get<double>(tree, "probe", "rho");
  p.equalize_targets = get<bool>(tree, "probe", "equalize_targets");
  p.validate();
  return p;
}

LinkPredictorConfig RunConfig::link() const {
  LinkPredictorConfig l;
  l.hidden_dim = get<std::size_t>(tree, "link", "hidden_dim");
  l.learning_rate = get<double>(tree, "link", "learning_rate");
  l.epochs = get<std::size_t>(tree, "link", "epochs");
  l.batch_size = get<std::size_t>(tree, "link", "batch_size");
  l.plateau_tolerance = get<double>(tree, "link", "plateau_tolerance");
  l.plateau_patience = get<std::size_t>(tree, "link", "plateau_patience");
  l.symmetric = get<bool>(tree, "link", "symmetric");
  l.optimizer = optimizer_from_string(get<std::string>(tree, "link", "optimizer"));
  l.seed = seed();
  l.validate();
  return l;
}

std::vector<std::size_t> RunConfig::depths() const {
  auto d = get<std::vector<std::size_t>>(tree, "link", "depths");
  if (d.empty()) throw UsageError("link.depths must not be empty");
  for (auto x : d) {
    if (x > 5) throw UsageError("link.depths entries must lie in [0, 5]");
  }
  return d;
}

std::vector<double> RunConfig::sweep_ratios() const {
  auto r = get<std::vector<double>>(tree, "noise_sweep", "ratios");
  if (r.empty()) throw UsageError("noise_sweep.ratios must not be empty");
  for (double x : r) {
    if (x < 0.0 || x > 1.0) throw UsageError("noise_sweep.ratios entries must lie in [0, 1]");
  }
  return r;
}

SynthCorpusConfig RunConfig::synth() const {
  SynthCorpusConfig s;
  s.n_sentences = get<std::size_t>(tree, "synth", "n_sentences");
  s.min_nodes = get<std::size_t>(tree, "synth", "min_nodes");
  s.max_nodes = get<std::size_t>(tree, "synth", "max_nodes");
  s.graph_kind = graph_kind_from_string(get<std::string>(tree, "synth", "graph_kind"));
  s.edge_probability = get<double>(tree, "synth", "edge_probability");
  s.dependence = dependence_from_string(get<std::string>(tree, "synth", "dependence"));
  s.dependence_param = get<double>(tree, "synth", "dependence_param");
  s.x_dim = get<std::size_t>(tree, "synth", "x_dim");
  s.linear_noise = get<double>(tree, "synth", "linear_noise");
  s.unaligned_tokens = get<std::size_t>(tree, "synth", "unaligned_tokens");
  s.palette.node_labels = get<std::vector<std::string>>(tree, "synth", "node_labels");
  s.palette.node_weights = get<std::vector<double>>(tree, "synth", "node_weights");
  s.palette.edge_labels = get<std::vector<std::string>>(tree, "synth", "edge_labels");
  s.palette.edge_weights = get<std::vector<double>>(tree, "synth", "edge_weights");
  s.walk = walk();
  s.skipgram = skipgram();
  s.seed = seed();
  s.validate();
  return s;
}

std::string RunConfig::synth_kind() const {
  auto k = get<std::string>(tree, "synth", "kind");
  if (k != "corpus" && k != "gaussian") throw UsageError("synth.kind must be 'corpus' or 'gaussian'");
  return k;
}

GaussianPairConfig RunConfig::gaussian() const {
  GaussianPairConfig g;
  g.dim = get<std::size_t>(tree, "gaussian", "dim");
  g.rho = get<double>(tree, "gaussian", "rho");
  g.n_samples = get<std::size_t>(tree, "gaussian", "n_samples");
  g.block_size = get<std::size_t>(tree, "gaussian", "block_size");
  g.seed = seed();
  g.validate();
  return g;
}

}  // namespace gp
