#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace gownet {

// Pretrained word vectors, immutable after load and freely shared.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t dim,
                 std::unordered_map<std::string, std::vector<double>> entries)
      : dim_(dim), entries_(std::move(entries)) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t skipped_lines() const { return skipped_lines_; }

  // Exact-match lookup after lowercase normalization. Absent means
  // unknown word; the caller decides the substitution policy.
  std::optional<std::vector<double>> lookup(const std::string& token) const;

  friend EmbeddingTable load_embeddings(const std::string& path,
                                        const std::unordered_set<std::string>* vocabulary);

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> entries_;
  std::size_t skipped_lines_ = 0;
};

// Loads a textual word-vectors file: optional "count dim" header line,
// then "token v1 v2 ... vdim" lines. Gzip-compressed files are accepted
// (detected by magic bytes). Malformed lines are skipped and counted;
// inconsistent dimensions raise FormatError. When a vocabulary filter is
// given, only those tokens are retained.
EmbeddingTable load_embeddings(const std::string& path,
                               const std::unordered_set<std::string>* vocabulary = nullptr);

std::string to_lower(const std::string& s);

}  // namespace gownet
