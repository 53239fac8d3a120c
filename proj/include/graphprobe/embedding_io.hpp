#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "graphprobe/graph_embed.hpp"
#include "graphprobe/matrix.hpp"

namespace gp {

// Binary embedding file: 24-byte little-endian header
//   bytes 0..3   magic "GPEM"
//   bytes 4..7   format version (u32) = 1
//   bytes 8..15  row count (u64)
//   bytes 16..23 column count (u64)
// followed by rows*cols little-endian IEEE-754 float32 values, row-major.
// The companion manifest `<file>.manifest.json` maps sentences to row blocks.

inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 24;

struct ManifestEntry {
  std::string sentence_id;
  std::uint64_t row_offset = 0;
  std::uint64_t row_count = 0;
  std::vector<std::size_t> kept_token_indices;
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Every sentence's rows in one matrix plus the sentence -> rows manifest.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  /// Validates that manifest ranges are disjoint, cover [0, rows) and that
  /// kept_token_indices has row_count entries.
  EmbeddingStore(Matrix data, std::vector<ManifestEntry> manifest);

  static EmbeddingStore from_sentences(const std::vector<SentenceEmbedding>& sentences);

  const Matrix& data() const { return data_; }
  const std::vector<ManifestEntry>& manifest() const { return manifest_; }
  std::size_t cols() const { return data_.cols(); }
  bool contains(const std::string& sentence_id) const { return index_.count(sentence_id) != 0; }
  const ManifestEntry& entry(const std::string& sentence_id) const;
  SentenceEmbedding sentence(const std::string& sentence_id) const;
  std::vector<SentenceEmbedding> sentences() const;

 private:
  Matrix data_;
  std::vector<ManifestEntry> manifest_;
  std::map<std::string, std::size_t> index_;
};

void write_embedding_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_embedding_matrix(const std::filesystem::path& path);

std::filesystem::path manifest_path_for(const std::filesystem::path& embedding_path);
std::string manifest_to_json(const std::vector<ManifestEntry>& manifest, std::size_t rows,
                             std::size_t cols);
std::vector<ManifestEntry> manifest_from_json(const std::string& text);

/// Writes the binary file and its manifest.
void write_embedding_store(const std::filesystem::path& path, const EmbeddingStore& store);
EmbeddingStore read_embedding_store(const std::filesystem::path& path);

}  // namespace gp
