#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace gp {

using NodeId = std::size_t;

struct Node {
  NodeId id = 0;
  std::optional<std::string> label;  // e.g. a POS tag
  friend bool operator==(const Node&, const Node&) = default;
};

/// Undirected edge. Direction from the source annotation is not kept.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  std::optional<std::string> label;  // e.g. a dependency relation
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// One sentence's graph with its node -> token alignment. Validated on
/// construction and immutable afterwards.
///
/// Invariants: node ids are exactly 0..n-1; edge endpoints are valid, no self
/// loops or duplicate undirected edges; alignment targets lie in
/// [0, num_tokens) and no token carries two nodes; the graph is connected.
/// Nodes may be unaligned, and tokens without a node are allowed.
class LinguisticGraph {
 public:
  LinguisticGraph(std::string sentence_id, std::size_t num_tokens, std::vector<Node> nodes,
                  std::vector<Edge> edges, std::vector<std::optional<std::size_t>> token_of_node);

  const std::string& sentence_id() const { return sentence_id_; }
  std::size_t num_tokens() const { return num_tokens_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<NodeId>& neighbors(NodeId v) const { return neighbors_[v]; }
  /// Token aligned to node v, if any.
  std::optional<std::size_t> token_of(NodeId v) const { return token_of_node_[v]; }
  const std::vector<std::optional<std::size_t>>& alignment() const { return token_of_node_; }
  /// Tokens carrying a node, ascending.
  std::vector<std::size_t> aligned_tokens() const;
  bool has_edge(NodeId u, NodeId v) const;

  friend bool operator==(const LinguisticGraph& a, const LinguisticGraph& b) {
    return a.sentence_id_ == b.sentence_id_ && a.num_tokens_ == b.num_tokens_ &&
           a.nodes_ == b.nodes_ && a.edges_ == b.edges_ && a.token_of_node_ == b.token_of_node_;
  }

 private:
  std::string sentence_id_;
  std::size_t num_tokens_;
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::optional<std::size_t>> token_of_node_;
  std::vector<std::vector<NodeId>> neighbors_;
};

/// Symmetric n x n boolean adjacency, row-major, zero diagonal.
class Adjacency {
 public:
  explicit Adjacency(std::size_t n) : n_(n), bits_(n * n, false) {}
  std::size_t size() const { return n_; }
  bool operator()(std::size_t u, std::size_t v) const { return bits_[u * n_ + v]; }
  void set(std::size_t u, std::size_t v) {
    bits_[u * n_ + v] = true;
    bits_[v * n_ + u] = true;
  }
  std::size_t count() const;

 private:
  std::size_t n_;
  std::vector<bool> bits_;
};

Adjacency adjacency(const LinguisticGraph& graph);

/// Chooses the nodes of a localized substructure.
struct SubgraphSelector {
  enum class Mode { NodeLabel, EdgeLabel, NodeSet };

  Mode mode = Mode::NodeSet;
  std::string label;
  std::vector<NodeId> nodes;  // NodeSet mode
  bool all_nodes = false;     // NodeSet mode: every node of each graph

  static SubgraphSelector node_label(std::string l) { return {Mode::NodeLabel, std::move(l), {}, false}; }
  static SubgraphSelector edge_label(std::string l) { return {Mode::EdgeLabel, std::move(l), {}, false}; }
  static SubgraphSelector node_set(std::vector<NodeId> ids) { return {Mode::NodeSet, {}, std::move(ids), false}; }
  static SubgraphSelector every_node() { return {Mode::NodeSet, {}, {}, true}; }

  std::string describe() const;
};

/// Sorted, de-duplicated node ids picked by the selector (possibly empty).
std::vector<NodeId> select_nodes(const LinguisticGraph& graph, const SubgraphSelector& sel);

}  // namespace gp
