#include "graphprobe/graph.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "graphprobe/error.hpp"

namespace gp {

namespace {

[[noreturn]] void reject(const std::string& sentence_id, const std::string& reason) {
  throw DataError("sentence '" + sentence_id + "': " + reason);
}

}  // namespace

LinguisticGraph::LinguisticGraph(std::string sentence_id, std::size_t num_tokens,
                                 std::vector<Node> nodes, std::vector<Edge> edges,
                                 std::vector<std::optional<std::size_t>> token_of_node)
    : sentence_id_(std::move(sentence_id)),
      num_tokens_(num_tokens),
      nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      token_of_node_(std::move(token_of_node)) {
  const std::size_t n = nodes_.size();
  if (n == 0) reject(sentence_id_, "graph has no nodes");
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes_[i].id != i) {
      reject(sentence_id_, "node ids must be exactly 0..n-1 in order; found id " +
                               std::to_string(nodes_[i].id) + " at position " + std::to_string(i));
    }
  }
  if (token_of_node_.size() != n) reject(sentence_id_, "alignment table size differs from node count");

  neighbors_.assign(n, {});
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& e : edges_) {
    if (e.u >= n || e.v >= n) {
      reject(sentence_id_, "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                               ") has an endpoint outside 0.." + std::to_string(n - 1));
    }
    if (e.u == e.v) reject(sentence_id_, "self-loop on node " + std::to_string(e.u));
    auto key = std::minmax(e.u, e.v);
    if (!seen.insert(key).second) {
      reject(sentence_id_, "duplicate edge (" + std::to_string(key.first) + "," +
                               std::to_string(key.second) + ")");
    }
    neighbors_[e.u].push_back(e.v);
    neighbors_[e.v].push_back(e.u);
  }
  for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());

  std::vector<bool> token_used(num_tokens_, false);
  for (std::size_t v = 0; v < n; ++v) {
    const auto& t = token_of_node_[v];
    if (!t) continue;
    if (*t >= num_tokens_) {
      reject(sentence_id_, "node " + std::to_string(v) + " aligned to token " + std::to_string(*t) +
                               " outside [0," + std::to_string(num_tokens_) + ")");
    }
    if (token_used[*t]) reject(sentence_id_, "token " + std::to_string(*t) + " aligned to more than one node");
    token_used[*t] = true;
  }

  std::vector<bool> reached(n, false);
  std::vector<NodeId> stack{0};
  reached[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (NodeId w : neighbors_[v]) {
      if (!reached[w]) {
        reached[w] = true;
        ++count;
        stack.push_back(w);
      }
    }
  }
  if (count != n) {
    reject(sentence_id_, "graph is disconnected (" + std::to_string(count) + " of " +
                             std::to_string(n) + " nodes reachable from node 0)");
  }
}

std::vector<std::size_t> LinguisticGraph::aligned_tokens() const {
  std::vector<std::size_t> out;
  for (const auto& t : token_of_node_) {
    if (t) out.push_back(*t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool LinguisticGraph::has_edge(NodeId u, NodeId v) const {
  if (u >= neighbors_.size()) return false;
  return std::binary_search(neighbors_[u].begin(), neighbors_[u].end(), v);
}

std::size_t Adjacency::count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true)); }

Adjacency adjacency(const LinguisticGraph& graph) {
  Adjacency a(graph.num_nodes());
  for (const auto& e : graph.edges()) a.set(e.u, e.v);
  return a;
}

std::string SubgraphSelector::describe() const {
  switch (mode) {
    case Mode::NodeLabel:
      return "node-label:" + label;
    case Mode::EdgeLabel:
      return "edge-label:" + label;
    case Mode::NodeSet:
      break;
  }
  if (all_nodes) return "nodes:all";
  std::string s = "nodes:";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(nodes[i]);
  }
  return s;
}

std::vector<NodeId> select_nodes(const LinguisticGraph& graph, const SubgraphSelector& sel) {
  std::vector<NodeId> out;
  switch (sel.mode) {
    case SubgraphSelector::Mode::NodeLabel:
      for (const auto& node : graph.nodes()) {
        if (node.label && *node.label == sel.label) out.push_back(node.id);
      }
      break;
    case SubgraphSelector::Mode::EdgeLabel:
      for (const auto& e : graph.edges()) {
        if (e.label && *e.label == sel.label) {
          out.push_back(e.u);
          out.push_back(e.v);
        }
      }
      break;
    case SubgraphSelector::Mode::NodeSet:
      if (sel.all_nodes) {
        for (const auto& node : graph.nodes()) out.push_back(node.id);
      } else {
        for (NodeId v : sel.nodes) {
          if (v < graph.num_nodes()) out.push_back(v);
        }
      }
      break;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace gp
