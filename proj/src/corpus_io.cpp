#include "graphprobe/corpus_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "graphprobe/error.hpp"
#include "json.hpp"

namespace gp {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct LineContext {
  std::size_t line;
  std::string sentence_id;  // empty until known

  std::string where() const {
    std::string s = "line " + std::to_string(line);
    if (!sentence_id.empty()) s += " (sentence '" + sentence_id + "')";
    return s;
  }
};

[[noreturn]] void fail(const LineContext& ctx, const std::string& msg) {
  throw DataError("corpus " + ctx.where() + ": " + msg);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const char* what,
                const LineContext& ctx, const LoadOptions& opt, std::vector<std::string>& warnings) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = std::any_of(allowed.begin(), allowed.end(),
                             [&](const char* k) { return it.key() == k; });
    if (known) continue;
    std::string msg = std::string("unknown key '") + it.key() + "' in " + what;
    if (opt.strict_keys) fail(ctx, msg);
    warnings.push_back("corpus " + ctx.where() + ": " + msg);
  }
}

const json& require(const json& obj, const char* key, const LineContext& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(ctx, std::string("missing key '") + key + "'");
  return *it;
}

std::size_t as_index(const json& v, const char* what, const LineContext& ctx) {
  if (!v.is_number_integer()) fail(ctx, std::string(what) + " must be an integer");
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  auto i = v.get<long long>();
  if (i < 0) fail(ctx, std::string(what) + " must be non-negative");
  return static_cast<std::size_t>(i);
}

std::optional<std::string> as_label(const json& obj, const LineContext& ctx) {
  auto it = obj.find("label");
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) fail(ctx, "label must be a string or null");
  return it->get<std::string>();
}

LinguisticGraph parse_record(const json& rec, LineContext& ctx, const LoadOptions& opt,
                             std::vector<std::string>& warnings) {
  if (!rec.is_object()) fail(ctx, "record must be a JSON object");
  const json& sid = require(rec, "sentence_id", ctx);
  if (!sid.is_string()) fail(ctx, "sentence_id must be a string");
  ctx.sentence_id = sid.get<std::string>();
  check_keys(rec, {"sentence_id", "num_tokens", "nodes", "edges", "alignment"}, "record", ctx, opt,
             warnings);

  const std::size_t num_tokens = as_index(require(rec, "num_tokens", ctx), "num_tokens", ctx);

  const json& jnodes = require(rec, "nodes", ctx);
  if (!jnodes.is_array()) fail(ctx, "nodes must be an array");
  std::vector<Node> nodes;
  for (const auto& jn : jnodes) {
    if (!jn.is_object()) fail(ctx, "node entries must be objects");
    check_keys(jn, {"id", "label"}, "node", ctx, opt, warnings);
    nodes.push_back({as_index(require(jn, "id", ctx), "node id", ctx), as_label(jn, ctx)});
  }
  std::stable_sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });

  const json& jedges = require(rec, "edges", ctx);
  if (!jedges.is_array()) fail(ctx, "edges must be an array");
  std::vector<Edge> edges;
  for (const auto& je : jedges) {
    if (!je.is_object()) fail(ctx, "edge entries must be objects");
    check_keys(je, {"u", "v", "label"}, "edge", ctx, opt, warnings);
    edges.push_back({as_index(require(je, "u", ctx), "edge endpoint u", ctx),
                     as_index(require(je, "v", ctx), "edge endpoint v", ctx), as_label(je, ctx)});
  }

  const json& jalign = require(rec, "alignment", ctx);
  if (!jalign.is_object()) fail(ctx, "alignment must be an object");
  std::vector<std::optional<std::size_t>> token_of(nodes.size());
  for (auto it = jalign.begin(); it != jalign.end(); ++it) {
    const std::string& key = it.key();
    if (key.empty() || !std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      fail(ctx, "alignment key '" + key + "' is not a node id");
    }
    std::size_t node = std::stoul(key);
    if (node >= nodes.size()) {
      throw DataError("sentence '" + ctx.sentence_id + "': alignment names node " + key +
                      " but the graph has " + std::to_string(nodes.size()) + " nodes");
    }
    token_of[node] = as_index(it.value(), "alignment target", ctx);
  }
  return LinguisticGraph(ctx.sentence_id, num_tokens, std::move(nodes), std::move(edges),
                         std::move(token_of));
}

}  // namespace

Corpus parse_corpus(const std::string& text, const LoadOptions& options) {
  Corpus corpus;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    LineContext ctx{line_no, {}};
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ctx, std::string("JSON parse error: ") + e.what());
    }
    try {
      auto graph = parse_record(rec, ctx, options, corpus.warnings);
      if (!ids.insert(graph.sentence_id()).second) {
        throw DataError("sentence '" + graph.sentence_id() + "': duplicate sentence_id");
      }
      corpus.graphs.push_back(std::move(graph));
    } catch (const DataError& e) {
      if (!options.skip_invalid || ctx.sentence_id.empty()) throw;
      corpus.skipped.push_back({ctx.sentence_id, e.what()});
      corpus.warnings.push_back(std::string("skipped: ") + e.what());
    }
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str(), options);
}

std::string graph_to_json_line(const LinguisticGraph& graph) {
  ordered_json rec;
  rec["sentence_id"] = graph.sentence_id();
  rec["num_tokens"] = graph.num_tokens();
  ordered_json nodes = ordered_json::array();
  for (const auto& n : graph.nodes()) {
    ordered_json jn;
    jn["id"] = n.id;
    jn["label"] = n.label ? ordered_json(*n.label) : ordered_json(nullptr);
    nodes.push_back(std::move(jn));
  }
  rec["nodes"] = std::move(nodes);
  ordered_json edges = ordered_json::array();
  for (const auto& e : graph.edges()) {
    ordered_json je;
    je["u"] = e.u;
    je["v"] = e.v;
    je["label"] = e.label ? ordered_json(*e.label) : ordered_json(nullptr);
    edges.push_back(std::move(je));
  }
  rec["edges"] = std::move(edges);
  ordered_json align = ordered_json::object();
  for (std::size_t v = 0; v < graph.num_nodes(); ++v) {
    if (auto t = graph.token_of(v)) align[std::to_string(v)] = *t;
  }
  rec["alignment"] = std::move(align);
  return rec.dump();
}

void save_corpus(const std::filesystem::path& path, const std::vector<LinguisticGraph>& graphs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write corpus file '" + path.string() + "'");
  for (const auto& g : graphs) out << graph_to_json_line(g) << '\n';
  if (!out) throw DataError("write failed for corpus file '" + path.string() + "'");
}

}  // namespace gp
