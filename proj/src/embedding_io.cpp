#include "graphprobe/embedding_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "graphprobe/error.hpp"
#include "json.hpp"

namespace gp {

namespace {

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

EmbeddingStore::EmbeddingStore(Matrix data, std::vector<ManifestEntry> manifest)
    : data_(std::move(data)), manifest_(std::move(manifest)) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranges;
  for (std::size_t i = 0; i < manifest_.size(); ++i) {
    const auto& e = manifest_[i];
    if (e.kept_token_indices.size() != e.row_count) {
      throw DataError("manifest: sentence '" + e.sentence_id + "' lists " +
                      std::to_string(e.kept_token_indices.size()) + " kept tokens for " +
                      std::to_string(e.row_count) + " rows");
    }
    if (e.row_offset + e.row_count > data_.rows()) {
      throw DataError("manifest: sentence '" + e.sentence_id + "' rows exceed the embedding file");
    }
    if (!index_.emplace(e.sentence_id, i).second) {
      throw DataError("manifest: duplicate sentence_id '" + e.sentence_id + "'");
    }
    if (e.row_count > 0) ranges.emplace_back(e.row_offset, e.row_count);
  }
  std::sort(ranges.begin(), ranges.end());
  std::uint64_t next = 0;
  for (const auto& [off, cnt] : ranges) {
    if (off != next) throw DataError("manifest: row ranges overlap or leave a gap at row " + std::to_string(next));
    next = off + cnt;
  }
  if (next != data_.rows()) throw DataError("manifest: row ranges do not cover every row");
}

EmbeddingStore EmbeddingStore::from_sentences(const std::vector<SentenceEmbedding>& sentences) {
  std::vector<ManifestEntry> manifest;
  std::vector<Matrix> blocks;
  std::size_t cols = 0;
  std::uint64_t offset = 0;
  for (const auto& s : sentences) {
    if (s.rows.rows() > 0) {
      if (cols == 0) cols = s.rows.cols();
      if (s.rows.cols() != cols) throw DataError("embedding blocks have differing widths");
      blocks.push_back(s.rows);
    }
    manifest.push_back({s.sentence_id, offset, s.rows.rows(), s.token_indices});
    offset += s.rows.rows();
  }
  Matrix data = blocks.empty() ? Matrix(0, cols) : Matrix::vconcat(blocks);
  return EmbeddingStore(std::move(data), std::move(manifest));
}

const ManifestEntry& EmbeddingStore::entry(const std::string& sentence_id) const {
  auto it = index_.find(sentence_id);
  if (it == index_.end()) throw DataError("embedding manifest has no sentence '" + sentence_id + "'");
  return manifest_[it->second];
}

SentenceEmbedding EmbeddingStore::sentence(const std::string& sentence_id) const {
  const auto& e = entry(sentence_id);
  SentenceEmbedding s;
  s.sentence_id = e.sentence_id;
  s.token_indices = e.kept_token_indices;
  s.rows = Matrix(e.row_count, data_.cols());
  for (std::uint64_t r = 0; r < e.row_count; ++r) {
    auto src = data_.row(e.row_offset + r);
    std::copy(src.begin(), src.end(), s.rows.row(r).begin());
  }
  return s;
}

std::vector<SentenceEmbedding> EmbeddingStore::sentences() const {
  std::vector<SentenceEmbedding> out;
  for (const auto& e : manifest_) out.push_back(sentence(e.sentence_id));
  return out;
}

void write_embedding_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::string buf;
  buf.reserve(kEmbeddingHeaderBytes + 4 * m.size());
  buf.append("GPEM");
  put_u32(buf, kEmbeddingFormatVersion);
  put_u64(buf, m.rows());
  put_u64(buf, m.cols());
  for (float v : m.values()) put_u32(buf, std::bit_cast<std::uint32_t>(v));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

Matrix read_embedding_matrix(const std::filesystem::path& path) {
  const std::string buf = slurp(path);
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  if (buf.size() < kEmbeddingHeaderBytes || std::memcmp(p, "GPEM", 4) != 0) {
    throw DataError("'" + path.string() + "' is not a GPEM embedding file");
  }
  const auto version = static_cast<std::uint32_t>(get_le(p + 4, 4));
  if (version != kEmbeddingFormatVersion) {
    throw DataError("'" + path.string() + "': unsupported format version " + std::to_string(version));
  }
  const std::uint64_t rows = get_le(p + 8, 8);
  const std::uint64_t cols = get_le(p + 16, 8);
  if (cols != 0 && rows > (buf.size() / 4) / cols) {
    throw DataError("'" + path.string() + "': header dimensions exceed file size");
  }
  if (buf.size() != kEmbeddingHeaderBytes + 4 * rows * cols) {
    throw DataError("'" + path.string() + "': file length " + std::to_string(buf.size()) +
                    " does not match header (" + std::to_string(rows) + "x" + std::to_string(cols) + ")");
  }
  std::vector<float> data(rows * cols);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(p + kEmbeddingHeaderBytes + 4 * i, 4)));
  }
  try {
    return Matrix(rows, cols, std::move(data));
  } catch (const NumericalError&) {
    throw DataError("'" + path.string() + "' contains non-finite values");
  }
}

std::filesystem::path manifest_path_for(const std::filesystem::path& embedding_path) {
  return std::filesystem::path(embedding_path.string() + ".manifest.json");
}

std::string manifest_to_json(const std::vector<ManifestEntry>& manifest, std::size_t rows,
                             std::size_t cols) {
  nlohmann::ordered_json j;
  j["format"] = "gpem-manifest/1";
  j["rows"] = rows;
  j["cols"] = cols;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : manifest) {
    nlohmann::ordered_json je;
    je["sentence_id"] = e.sentence_id;
    je["row_offset"] = e.row_offset;
    je["row_count"] = e.row_count;
    je["kept_token_indices"] = e.kept_token_indices;
    arr.push_back(std::move(je));
  }
  j["sentences"] = std::move(arr);
  return j.dump(1) + "\n";
}

std::vector<ManifestEntry> manifest_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("manifest JSON parse error: ") + e.what());
  }
  try {
    if (j.value("format", std::string()) != "gpem-manifest/1") {
      throw DataError("manifest: missing or unsupported format tag");
    }
    std::vector<ManifestEntry> out;
    for (const auto& je : j.at("sentences")) {
      ManifestEntry e;
      e.sentence_id = je.at("sentence_id").get<std::string>();
      e.row_offset = je.at("row_offset").get<std::uint64_t>();
      e.row_count = je.at("row_count").get<std::uint64_t>();
      e.kept_token_indices = je.at("kept_token_indices").get<std::vector<std::size_t>>();
      out.push_back(std::move(e));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("manifest: malformed entry: ") + e.what());
  }
}

void write_embedding_store(const std::filesystem::path& path, const EmbeddingStore& store) {
  write_embedding_matrix(path, store.data());
  std::ofstream out(manifest_path_for(path), std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write manifest for '" + path.string() + "'");
  out << manifest_to_json(store.manifest(), store.data().rows(), store.data().cols());
}

EmbeddingStore read_embedding_store(const std::filesystem::path& path) {
  Matrix data = read_embedding_matrix(path);
  auto manifest = manifest_from_json(slurp(manifest_path_for(path)));
  return EmbeddingStore(std::move(data), std::move(manifest));
}

}  // namespace gp
