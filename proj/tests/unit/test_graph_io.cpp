#include <doctest.h>

#include <cstring>

#include "fixtures.hpp"
#include "graphprobe/corpus_io.hpp"
#include "graphprobe/embedding_io.hpp"
#include "graphprobe/error.hpp"
#include "graphprobe/graph.hpp"

using namespace gp;

namespace {

LinguisticGraph path_graph(const std::string& id, std::size_t n) {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::vector<std::optional<std::size_t>> align;
  for (std::size_t i = 0; i < n; ++i) {
    nodes.push_back({i, "NN"});
    align.emplace_back(i);
    if (i > 0) edges.push_back({i - 1, i, "dep"});
  }
  return LinguisticGraph(id, n, nodes, edges, align);
}

const char* kGood =
    R"({"sentence_id":"a","num_tokens":3,"nodes":[{"id":0,"label":"DT"},{"id":1,"label":"NN"},{"id":2,"label":null}],)"
    R"("edges":[{"u":1,"v":0,"label":"det"},{"u":1,"v":2,"label":null}],"alignment":{"0":0,"1":2}})";

}  // namespace

TEST_SUITE("graph") {
  TEST_CASE("valid graph exposes adjacency and alignment") {
    auto g = path_graph("s", 4);
    CHECK(g.has_edge(2, 1));
    CHECK_FALSE(g.has_edge(0, 2));
    CHECK(adjacency(g).count() == 6);  // both directions
    CHECK(g.aligned_tokens() == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK(g.neighbors(1).size() == 2);
  }

  TEST_CASE("invariant violations name the sentence") {
    std::vector<Node> two{{0, {}}, {1, {}}};
    std::vector<std::optional<std::size_t>> al{0, 1};
    auto bad = [&](std::vector<Node> nodes, std::vector<Edge> edges, std::vector<std::optional<std::size_t>> a,
                   std::size_t tokens = 2) {
      try {
        LinguisticGraph("bad1", tokens, nodes, edges, a);
      } catch (const DataError& e) {
        return std::string(e.what()).find("bad1") != std::string::npos;
      }
      return false;
    };
    CHECK(bad(two, {{0, 0, {}}}, al));                    // self loop
    CHECK(bad(two, {{0, 1, {}}, {1, 0, {}}}, al));        // duplicate undirected edge
    CHECK(bad(two, {{0, 2, {}}}, al));                    // bad endpoint
    CHECK(bad(two, {}, al));                              // disconnected
    CHECK(bad(two, {{0, 1, {}}}, {0, 0}));                // token carries two nodes
    CHECK(bad(two, {{0, 1, {}}}, {0, 5}));                // token out of range
    CHECK(bad({{0, {}}, {2, {}}}, {{0, 1, {}}}, al));     // ids not 0..n-1
    CHECK_NOTHROW(LinguisticGraph("ok", 2, two, {{0, 1, {}}}, {0, std::nullopt}));
  }

  TEST_CASE("selectors") {
    auto c = parse_corpus(kGood);
    const auto& g = c.graphs.at(0);
    CHECK(select_nodes(g, SubgraphSelector::node_label("NN")) == std::vector<NodeId>{1});
    CHECK(select_nodes(g, SubgraphSelector::edge_label("det")) == std::vector<NodeId>{0, 1});
    CHECK(select_nodes(g, SubgraphSelector::every_node()).size() == 3);
    CHECK(select_nodes(g, SubgraphSelector::node_set({2, 2, 0, 9})) == std::vector<NodeId>{0, 2});
    CHECK(select_nodes(g, SubgraphSelector::node_label("VB")).empty());
  }
}

TEST_SUITE("corpus_io") {
  TEST_CASE("parse and canonical round trip") {
    auto c = parse_corpus(std::string(kGood) + "\n\n");
    REQUIRE(c.graphs.size() == 1);
    const auto& g = c.graphs[0];
    CHECK(g.num_tokens() == 3);
    CHECK(g.token_of(1) == std::optional<std::size_t>(2));
    CHECK_FALSE(g.token_of(2).has_value());
    CHECK_FALSE(g.nodes()[2].label.has_value());
    const std::string line = graph_to_json_line(g);
    auto again = parse_corpus(line);
    CHECK(again.graphs.at(0) == g);
    CHECK(graph_to_json_line(again.graphs[0]) == line);

    fx::TempDir dir("corpus_rt");
    std::vector<LinguisticGraph> gs{g, path_graph("p", 5)};
    save_corpus(dir / "c.jsonl", gs);
    auto loaded = load_corpus(dir / "c.jsonl");
    CHECK(loaded.graphs == gs);
  }

  TEST_CASE("errors carry the line number") {
    const std::string text = std::string(kGood) + "\n" + R"({"sentence_id":"b","num_tokens":2,"nodes":[{"id":0}],"edges":[)";
    try {
      parse_corpus(text);
      FAIL("expected a DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }

  TEST_CASE("unknown keys: error when strict, warning otherwise") {
    std::string text = kGood;
    text.insert(1, R"("extra":1,)");
    CHECK_THROWS_AS(parse_corpus(text), DataError);
    auto c = parse_corpus(text, {false, false});
    CHECK(c.graphs.size() == 1);
    CHECK(c.warnings.size() == 1);
  }

  TEST_CASE("invalid records are skipped and listed on request") {
    const std::string bad = R"({"sentence_id":"broken","num_tokens":2,"nodes":[{"id":0},{"id":1}],"edges":[],"alignment":{}})";
    const std::string text = std::string(kGood) + "\n" + bad + "\n";
    CHECK_THROWS_AS(parse_corpus(text), DataError);
    auto c = parse_corpus(text, {true, true});
    CHECK(c.graphs.size() == 1);
    REQUIRE(c.skipped.size() == 1);
    CHECK(c.skipped[0].sentence_id == "broken");
  }

  TEST_CASE("duplicate sentence ids are rejected") {
    const std::string text = std::string(kGood) + "\n" + kGood;
    CHECK_THROWS_AS(parse_corpus(text), DataError);
  }
}

TEST_SUITE("embedding_io") {
  TEST_CASE("header layout and round trip") {
    fx::TempDir dir("gpem");
    Matrix m(2, 3, std::vector<float>{1, 2, 3, 4, 5, -6.5f});
    write_embedding_matrix(dir / "m.gpem", m);
    const std::string bytes = fx::slurp(dir / "m.gpem");
    REQUIRE(bytes.size() == kEmbeddingHeaderBytes + 6 * 4);
    CHECK(bytes.substr(0, 4) == "GPEM");
    std::uint32_t version;
    std::uint64_t rows, cols;
    std::memcpy(&version, bytes.data() + 4, 4);
    std::memcpy(&rows, bytes.data() + 8, 8);
    std::memcpy(&cols, bytes.data() + 16, 8);
    CHECK(version == 1);
    CHECK(rows == 2);
    CHECK(cols == 3);
    float last;
    std::memcpy(&last, bytes.data() + kEmbeddingHeaderBytes + 5 * 4, 4);
    CHECK(last == -6.5f);
    CHECK(read_embedding_matrix(dir / "m.gpem").storage() == m.storage());
  }

  TEST_CASE("corrupt files are rejected") {
    fx::TempDir dir("gpem_bad");
    Matrix m(2, 2, 1.0f);
    write_embedding_matrix(dir / "m.gpem", m);
    std::string bytes = fx::slurp(dir / "m.gpem");

    fx::spit(dir / "short.gpem", bytes.substr(0, bytes.size() - 1));
    CHECK_THROWS_AS(read_embedding_matrix(dir / "short.gpem"), DataError);
    fx::spit(dir / "long.gpem", bytes + "x");
    CHECK_THROWS_AS(read_embedding_matrix(dir / "long.gpem"), DataError);
    std::string magic = bytes;
    magic[0] = 'X';
    fx::spit(dir / "magic.gpem", magic);
    CHECK_THROWS_AS(read_embedding_matrix(dir / "magic.gpem"), DataError);
    std::string nan = bytes;
    const float q = std::nanf("");
    std::memcpy(nan.data() + kEmbeddingHeaderBytes, &q, 4);
    fx::spit(dir / "nan.gpem", nan);
    CHECK_THROWS_AS(read_embedding_matrix(dir / "nan.gpem"), DataError);
    CHECK_THROWS_AS(read_embedding_matrix(dir / "missing.gpem"), DataError);
  }

  TEST_CASE("manifest ranges must tile the rows") {
    Matrix m(4, 2, 0.5f);
    CHECK_NOTHROW(EmbeddingStore(m, {{"a", 0, 3, {0, 1, 2}}, {"b", 3, 1, {4}}}));
    CHECK_NOTHROW(EmbeddingStore(m, {{"b", 3, 1, {4}}, {"a", 0, 3, {0, 1, 2}}}));
    CHECK_THROWS_AS(EmbeddingStore(m, {{"a", 0, 3, {0, 1, 2}}, {"b", 2, 2, {0, 1}}}), DataError);  // overlap
    CHECK_THROWS_AS(EmbeddingStore(m, {{"a", 0, 2, {0, 1}}, {"b", 3, 1, {0}}}), DataError);        // gap
    CHECK_THROWS_AS(EmbeddingStore(m, {{"a", 0, 4, {0, 1}}}), DataError);                        // index count
    CHECK_THROWS_AS(EmbeddingStore(m, {{"a", 0, 2, {0, 1}}, {"a", 2, 2, {0, 1}}}), DataError);   // duplicate
  }

  TEST_CASE("store round trip through file and manifest") {
    fx::TempDir dir("store");
    std::vector<SentenceEmbedding> s{{"x", Matrix(2, 3, 1.0f), {0, 2}}, {"y", Matrix(1, 3, 2.0f), {1}}};
    auto store = EmbeddingStore::from_sentences(s);
    write_embedding_store(dir / "z.gpem", store);
    CHECK(std::filesystem::exists(manifest_path_for(dir / "z.gpem")));
    auto back = read_embedding_store(dir / "z.gpem");
    CHECK(back.manifest() == store.manifest());
    CHECK(back.sentence("y").rows(0, 0) == 2.0f);
    CHECK(back.sentence("x").token_indices == std::vector<std::size_t>{0, 2});
    CHECK_THROWS_AS(back.entry("nope"), DataError);
    CHECK_THROWS_AS(manifest_from_json("{\"format\":\"other\"}"), DataError);
  }
}
